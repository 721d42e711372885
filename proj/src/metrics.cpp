#include "voltopo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "voltopo/errors.hpp"
#include "voltopo/io_util.hpp"

namespace voltopo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_same_grid(const BinaryVolume& a, const BinaryVolume& b) {
    if (!(a.dims() == b.dims())) throw InvalidArgument("masks have different dims");
}

// One pass of the lower-envelope squared distance transform along a line of
// samples spaced `h` apart (Felzenszwalb & Huttenlocher). Infinite samples
// carry no site.
void edt_line(std::vector<double>& f, double h, std::vector<std::size_t>& v, std::vector<double>& z,
              std::vector<double>& out) {
    const std::size_t n = f.size();
    v.resize(n);
    z.resize(n + 1);
    out.resize(n);
    auto cross = [&](std::size_t q, std::size_t p) {
        const double xq = static_cast<double>(q) * h, xp = static_cast<double>(p) * h;
        return ((f[q] + xq * xq) - (f[p] + xp * xp)) / (2.0 * (xq - xp));
    };
    long k = -1;
    for (std::size_t q = 0; q < n; ++q) {
        if (f[q] == kInf) continue;
        while (k >= 0 && cross(q, v[static_cast<std::size_t>(k)]) <= z[static_cast<std::size_t>(k)]) --k;
        ++k;
        v[static_cast<std::size_t>(k)] = q;
        z[static_cast<std::size_t>(k)] = k == 0 ? -kInf : cross(q, v[static_cast<std::size_t>(k) - 1]);
        z[static_cast<std::size_t>(k) + 1] = kInf;
    }
    if (k < 0) {
        std::fill(out.begin(), out.end(), kInf);
        f.swap(out);
        return;
    }
    std::size_t j = 0;
    for (std::size_t q = 0; q < n; ++q) {
        const double x = static_cast<double>(q) * h;
        while (z[j + 1] < x) ++j;
        const double dx = (static_cast<double>(q) - static_cast<double>(v[j])) * h;
        out[q] = dx * dx + f[v[j]];
    }
    f.swap(out);
}

// Squared Euclidean distance from every voxel center to the nearest site.
std::vector<double> squared_distance_to(const BinaryVolume& sites) {
    const Dims& d = sites.dims();
    const Spacing& s = sites.spacing();
    std::vector<double> dist(d.count());
    for (std::size_t i = 0; i < dist.size(); ++i) dist[i] = sites[i] ? 0.0 : kInf;

    std::vector<double> line, out, z;
    std::vector<std::size_t> v;
    const std::size_t len[3] = {d.nx, d.ny, d.nz};
    const std::size_t stride[3] = {1, d.nx, d.nx * d.ny};
    const double h[3] = {s.sx, s.sy, s.sz};
    for (int axis = 0; axis < 3; ++axis) {
        const std::size_t n = len[axis], st = stride[axis];
        for (std::size_t base = 0; base < d.count(); ++base) {
            if ((base / st) % n != 0) continue;  // start of a line along this axis
            line.resize(n);
            for (std::size_t t = 0; t < n; ++t) line[t] = dist[base + t * st];
            edt_line(line, h[axis], v, z, out);
            for (std::size_t t = 0; t < n; ++t) dist[base + t * st] = line[t];
        }
    }
    return dist;
}

std::vector<double> directed(const BinaryVolume& from_surface, const std::vector<double>& sq_to_other) {
    std::vector<double> out;
    for (std::size_t i = 0; i < from_surface.size(); ++i) {
        if (from_surface[i]) out.push_back(std::sqrt(sq_to_other[i]));
    }
    return out;
}

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

}  // namespace

double dice(const BinaryVolume& a, const BinaryVolume& b) {
    check_same_grid(a, b);
    std::size_t both = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        na += a[i];
        nb += b[i];
        both += a[i] && b[i];
    }
    if (na + nb == 0) return 1.0;
    return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

BinaryVolume surface_voxels(const BinaryVolume& mask) {
    const Dims& d = mask.dims();
    BinaryVolume out(d, mask.spacing(), false);
    for (std::size_t k = 0; k < d.nz; ++k)
        for (std::size_t j = 0; j < d.ny; ++j)
            for (std::size_t i = 0; i < d.nx; ++i) {
                const std::size_t v = d.index(i, j, k);
                if (!mask[v]) continue;
                const bool boundary = i == 0 || j == 0 || k == 0 || i + 1 == d.nx || j + 1 == d.ny || k + 1 == d.nz;
                if (boundary || !mask[v - 1] || !mask[v + 1] || !mask[v - d.nx] || !mask[v + d.nx] ||
                    !mask[v - d.nx * d.ny] || !mask[v + d.nx * d.ny]) {
                    out.set(v, true);
                }
            }
    return out;
}

SurfaceDistances surface_distances(const BinaryVolume& a, const BinaryVolume& b) {
    check_same_grid(a, b);
    if (!(a.spacing() == b.spacing())) throw InvalidArgument("masks have different spacing");
    if (a.count() == 0 || b.count() == 0) throw UndefinedMetric("surface distance of an empty mask");
    const BinaryVolume sa = surface_voxels(a), sb = surface_voxels(b);
    return {directed(sa, squared_distance_to(sb)), directed(sb, squared_distance_to(sa))};
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw UndefinedMetric("percentile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

double hausdorff(const SurfaceDistances& d) { return std::max(max_of(d.a_to_b), max_of(d.b_to_a)); }

double hausdorff95(const SurfaceDistances& d) {
    return std::max(percentile(d.a_to_b, 95.0), percentile(d.b_to_a, 95.0));
}

double average_surface_distance(const SurfaceDistances& d) {
    const double sum = std::accumulate(d.a_to_b.begin(), d.a_to_b.end(), 0.0) +
                       std::accumulate(d.b_to_a.begin(), d.b_to_a.end(), 0.0);
    return sum / static_cast<double>(d.a_to_b.size() + d.b_to_a.size());
}

MetricReport evaluate(const BinaryVolume& pred, const BinaryVolume& ref) {
    const SurfaceDistances d = surface_distances(pred, ref);
    return {dice(pred, ref), hausdorff(d), hausdorff95(d), average_surface_distance(d)};
}

std::string metrics_csv_header() { return "case,dice,hd,hd95,asd\n"; }

std::string metrics_csv_row(const std::string& case_name, const MetricReport& r) {
    return case_name + ',' + format_double(r.dice) + ',' + format_double(r.hd_mm) + ',' +
           format_double(r.hd95_mm) + ',' + format_double(r.asd_mm) + '\n';
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0 && b > 0)) throw InvalidArgument("incomplete beta needs a, b > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    if (x > (a + 1.0) / (a + b + 2.0)) return 1.0 - regularized_incomplete_beta(b, a, 1.0 - x);

    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                             b * std::log1p(-x);
    // Modified Lentz evaluation of the continued fraction.
    constexpr double tiny = 1e-300;
    double c = 1.0;
    double d = 1.0 - (a + b) * x / (a + 1.0);
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 10000; ++m) {
        const double mm = m;
        double num = mm * (b - mm) * x / ((a + 2 * mm - 1) * (a + 2 * mm));
        d = 1.0 + num * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + num / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        num = -(a + mm) * (a + b + mm) * x / ((a + 2 * mm) * (a + 2 * mm + 1));
        d = 1.0 + num * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + num / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-15) break;
    }
    return std::exp(log_front) * h / a;
}

double student_t_cdf(double t, double df) {
    if (!(df > 0)) throw InvalidArgument("degrees of freedom must be > 0");
    const double tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
    return t >= 0 ? 1.0 - tail : tail;
}

TTestResult paired_t_test(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidArgument("paired t-test needs equal-length samples");
    const std::size_t n = x.size();
    if (n < 2) throw InvalidArgument("paired t-test needs at least 2 pairs");
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = x[i] - y[i];
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : d) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) throw DegenerateInput("paired differences have zero variance");

    TTestResult r;
    r.df = n - 1;
    r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
    const double dfd = static_cast<double>(r.df);
    r.p_value = std::clamp(regularized_incomplete_beta(dfd / 2.0, 0.5, dfd / (dfd + r.t * r.t)), 0.0, 1.0);
    return r;
}

}  // namespace voltopo
