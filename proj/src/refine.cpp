#include "voltopo/refine.hpp"

#include <algorithm>
#include <cmath>

#include "voltopo/errors.hpp"
#include "voltopo/io_util.hpp"

namespace voltopo {

void validate(const RefineConfig& c) {
    if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda)) throw InvalidArgument("lambda must be >= 0");
    if (c.steps == 0) throw InvalidArgument("steps must be positive");
    if (!(c.step_size > 0.0) || !std::isfinite(c.step_size)) throw InvalidArgument("step_size must be > 0");
    if (c.ph_downsample == 0) throw InvalidArgument("ph_downsample must be >= 1");
    if (!(c.clamp_eps > 0.0 && c.clamp_eps < 0.5)) throw InvalidArgument("clamp_eps must lie in (0, 0.5)");
    if (!(c.loss.persistence_floor >= 0.0)) throw InvalidArgument("persistence floor must be >= 0");
}

double proximity_loss(const ScalarVolume& y, const ScalarVolume& y0) {
    if (!(y.dims() == y0.dims())) throw InvalidArgument("proximity_loss: dims mismatch");
    if (y.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - y0[i];
        sum += d * d;
    }
    return sum / static_cast<double>(y.size());
}

double logistic(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double logit(double y) { return std::log(y / (1.0 - y)); }

ObjectiveValue refine_objective(const ScalarVolume& logits, const ScalarVolume& y0, const RefineConfig& config) {
    if (!(logits.dims() == y0.dims())) throw InvalidArgument("refine_objective: dims mismatch");
    const std::size_t n = y0.size();
    ScalarVolume y(y0.dims(), y0.spacing(), 0.0);
    for (std::size_t i = 0; i < n; ++i) y[i] = logistic(logits[i]);

    ObjectiveValue out;
    out.proximity = proximity_loss(y, y0);

    const ScalarVolume coarse = downsample(y, config.ph_downsample);
    const Barcode bc = compute_barcode(coarse, {config.threads});
    out.topo = topo_loss(bc, config.target, config.loss).total;
    out.total = out.proximity + config.lambda * out.topo;
    out.betti = betti_numbers(bc, 0.5);

    const ScalarVolume coarse_grad =
        topo_loss_gradient(bc, config.target, coarse.dims(), coarse.spacing(), config.loss);
    const ScalarVolume topo_grad =
        downsample_adjoint(coarse_grad, y0.dims(), y0.spacing(), config.ph_downsample);

    out.grad = ScalarVolume(y0.dims(), y0.spacing(), 0.0);
    const double scale = 2.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double dy = scale * (y[i] - y0[i]) + config.lambda * topo_grad[i];
        out.grad[i] = dy * y[i] * (1.0 - y[i]);
    }
    return out;
}

RefineResult refine(const ScalarVolume& y0, const RefineConfig& config) {
    validate(config);
    if (y0.empty()) throw InvalidArgument("refine: empty volume");
    if (!y0.is_probability()) throw InvalidArgument("refine: input must be a probability volume");

    ScalarVolume z(y0.dims(), y0.spacing(), 0.0);
    for (std::size_t i = 0; i < y0.size(); ++i) {
        z[i] = logit(std::clamp(y0[i], config.clamp_eps, 1.0 - config.clamp_eps));
    }

    RefineResult out;
    out.trace.reserve(config.steps + 1);
    for (std::size_t it = 0; it <= config.steps; ++it) {
        const ObjectiveValue f = refine_objective(z, y0, config);
        out.trace.push_back({it, f.proximity, f.topo, f.total, f.betti});
        if (it == config.steps) break;
        for (std::size_t i = 0; i < z.size(); ++i) z[i] -= config.step_size * f.grad[i];
    }

    out.refined = ScalarVolume(y0.dims(), y0.spacing(), 0.0);
    for (std::size_t i = 0; i < z.size(); ++i) out.refined[i] = logistic(z[i]);
    return out;
}

std::string trace_to_csv(const std::vector<RefineRecord>& trace) {
    std::string out = "iter,proximity,topo,total,b0,b1,b2\n";
    for (const auto& r : trace) {
        out += std::to_string(r.iter) + ',' + format_double(r.proximity) + ',' + format_double(r.topo) + ',' +
               format_double(r.total) + ',' + std::to_string(r.betti[0]) + ',' + std::to_string(r.betti[1]) +
               ',' + std::to_string(r.betti[2]) + '\n';
    }
    return out;
}

}  // namespace voltopo
