#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "voltopo/cubical_ph.hpp"
#include "voltopo/topo_loss.hpp"
#include "voltopo/volume.hpp"

namespace voltopo {

struct RefineConfig {
    double lambda = 0.01;
    std::size_t steps = 100;
    double step_size = 1000.0;
    std::size_t ph_downsample = 1;
    BettiTarget target{};
    double clamp_eps = 1e-4;
    TopoLossOptions loss{};
    unsigned threads = 1;
};

/// Throws InvalidArgument on out-of-range fields.
void validate(const RefineConfig& config);

struct RefineRecord {
    std::size_t iter = 0;
    double proximity = 0.0;
    double topo = 0.0;
    double total = 0.0;
    /// At p = 0.5 on the downsampled volume the loss sees.
    Betti betti{};
};

struct RefineResult {
    ScalarVolume refined;
    std::vector<RefineRecord> trace;  // steps + 1 entries, initial state first
};

/// Mean squared voxel difference.
double proximity_loss(const ScalarVolume& y, const ScalarVolume& y0);

double logistic(double z);
double logit(double y);

struct ObjectiveValue {
    double proximity = 0.0;
    double topo = 0.0;
    double total = 0.0;
    Betti betti{};
    ScalarVolume grad;  // d total / d logits
};

/// Refinement objective at logits z (same grid as y0):
///   mean((s(z) - y0)^2) + lambda * topo_loss(downsample(s(z), ph_downsample))
/// with s the logistic function, and its gradient with respect to z.
ObjectiveValue refine_objective(const ScalarVolume& logits, const ScalarVolume& y0, const RefineConfig& config);

/// Fixed-step gradient descent on logits initialized at logit(clamp(y0, eps,
/// 1 - eps)). Single-threaded iteration; PH may use config.threads.
RefineResult refine(const ScalarVolume& y0, const RefineConfig& config = {});

/// `iter,proximity,topo,total,b0,b1,b2`
std::string trace_to_csv(const std::vector<RefineRecord>& trace);

}  // namespace voltopo
