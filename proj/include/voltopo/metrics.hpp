#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "voltopo/volume.hpp"

namespace voltopo {

struct MetricReport {
    double dice = 0.0;
    double hd_mm = 0.0;
    double hd95_mm = 0.0;
    double asd_mm = 0.0;
};

/// 2|A n B| / (|A| + |B|); 1 when both masks are empty.
double dice(const BinaryVolume& a, const BinaryVolume& b);

/// Foreground voxels with at least one of their 6 face neighbors in the
/// background; voxels outside the volume count as background.
BinaryVolume surface_voxels(const BinaryVolume& mask);

struct SurfaceDistances {
    std::vector<double> a_to_b;  // per surface voxel of a, in a's linear order
    std::vector<double> b_to_a;
};

/// Euclidean distance (mm) from every surface voxel center of one mask to the
/// nearest surface voxel center of the other. Both masks must be nonempty.
SurfaceDistances surface_distances(const BinaryVolume& a, const BinaryVolume& b);

/// Linear-interpolation percentile, q in [0, 100].
double percentile(std::vector<double> values, double q);

double hausdorff(const SurfaceDistances& d);
/// Larger of the two directed 95th percentiles.
double hausdorff95(const SurfaceDistances& d);
double average_surface_distance(const SurfaceDistances& d);

MetricReport evaluate(const BinaryVolume& pred, const BinaryVolume& ref);

/// `case,dice,hd,hd95,asd` with a header line.
std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& case_name, const MetricReport& r);

struct TTestResult {
    double t = 0.0;
    double p_value = 1.0;
    std::size_t df = 0;
};

/// Two-sided paired t-test on x - y.
TTestResult paired_t_test(std::span<const double> x, std::span<const double> y);

/// I_x(a, b) via its continued fraction.
double regularized_incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double df);

}  // namespace voltopo
