#pragma once

#include <array>
#include <string>
#include <vector>

#include "voltopo/volume.hpp"

namespace voltopo {

using Point3 = std::array<double, 3>;

/// Polyline in millimeters. A closed path also joins the last point to the first.
struct Path3D {
    std::vector<Point3> points;
    bool closed = false;

    std::size_t segment_count() const;
    std::array<Point3, 2> segment(std::size_t i) const;
    double length() const;

    friend bool operator==(const Path3D&, const Path3D&) = default;
};

/// Throws InvalidArgument unless the path has >= 2 points and consecutive
/// points (including last/first when closed) are distinct.
void validate_path(const Path3D& path);

/// Center of voxel (i, j, k): ((i + 0.5) sx, (j + 0.5) sy, (k + 0.5) sz).
Point3 voxel_center(const Spacing& spacing, std::size_t i, std::size_t j, std::size_t k);

double distance_to_segment(const Point3& p, const Point3& a, const Point3& b);
double distance_to_path(const Path3D& path, const Point3& p);

/// Radius giving a tube 3 voxels across: 1.5 x the smallest spacing.
double inner_cylinder_radius(const Spacing& spacing);

/// Voxels whose center lies within `radius_mm` of the polyline. The path must
/// lie inside the box [0, n * s] on every axis.
BinaryVolume rasterize_tube(const Path3D& path, double radius_mm, const Dims& dims, const Spacing& spacing);

struct GrowConfig {
    double margin_mm = 30.0;
    double lo = -80.0;
    double hi = 200.0;
};

/// Voxels within margin of the path whose intensity lies in [lo, hi].
BinaryVolume grow_and_threshold(const Path3D& path, const ScalarVolume& intensity,
                                const GrowConfig& config = {});

/// {"points": [[x, y, z], ...], "closed": false}. A bare array of points is
/// also accepted on input.
std::string path_to_json(const Path3D& path);
Path3D path_from_json(const std::string& text);

}  // namespace voltopo
