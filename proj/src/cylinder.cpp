#include "voltopo/cylinder.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>

#include "voltopo/errors.hpp"

namespace voltopo {

namespace {

double dot(const Point3& a, const Point3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Point3 sub(const Point3& a, const Point3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

void check_in_bounds(const Path3D& path, const Dims& dims, const Spacing& spacing) {
    const Point3 hi{static_cast<double>(dims.nx) * spacing.sx, static_cast<double>(dims.ny) * spacing.sy,
                    static_cast<double>(dims.nz) * spacing.sz};
    for (const auto& p : path.points) {
        for (int a = 0; a < 3; ++a) {
            if (!(p[a] >= 0.0 && p[a] <= hi[a])) {
                throw InvalidArgument("path point outside the volume bounds");
            }
        }
    }
}

// Marks voxels within `radius` of any segment, visiting only each segment's
// bounding box.
template <typename Mark>
void for_voxels_near_path(const Path3D& path, double radius, const Dims& dims, const Spacing& spacing,
                          Mark&& mark) {
    const double s[3] = {spacing.sx, spacing.sy, spacing.sz};
    const std::size_t n[3] = {dims.nx, dims.ny, dims.nz};
    for (std::size_t seg = 0; seg < path.segment_count(); ++seg) {
        const auto [a, b] = path.segment(seg);
        std::size_t lo[3], hi[3];
        for (int ax = 0; ax < 3; ++ax) {
            const double mn = std::min(a[ax], b[ax]) - radius;
            const double mx = std::max(a[ax], b[ax]) + radius;
            // Centers at (i + 0.5) s.
            const double first = std::ceil(mn / s[ax] - 0.5);
            const double last = std::floor(mx / s[ax] - 0.5);
            lo[ax] = static_cast<std::size_t>(std::max(0.0, first));
            hi[ax] = last < 0 ? 0 : std::min(n[ax], static_cast<std::size_t>(last) + 1);
        }
        for (std::size_t k = lo[2]; k < hi[2]; ++k)
            for (std::size_t j = lo[1]; j < hi[1]; ++j)
                for (std::size_t i = lo[0]; i < hi[0]; ++i) {
                    if (distance_to_segment(voxel_center(spacing, i, j, k), a, b) <= radius) {
                        mark(dims.index(i, j, k));
                    }
                }
    }
}

}  // namespace

std::size_t Path3D::segment_count() const {
    if (points.size() < 2) return 0;
    return closed ? points.size() : points.size() - 1;
}

std::array<Point3, 2> Path3D::segment(std::size_t i) const {
    return {points[i], points[(i + 1) % points.size()]};
}

double Path3D::length() const {
    double total = 0.0;
    for (std::size_t i = 0; i < segment_count(); ++i) {
        const auto [a, b] = segment(i);
        const Point3 d = sub(b, a);
        total += std::sqrt(dot(d, d));
    }
    return total;
}

void validate_path(const Path3D& path) {
    if (path.points.size() < 2) throw InvalidArgument("path needs at least 2 points");
    for (const auto& p : path.points) {
        if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2])) {
            throw InvalidArgument("path coordinates must be finite");
        }
    }
    for (std::size_t i = 0; i < path.segment_count(); ++i) {
        const auto [a, b] = path.segment(i);
        if (a == b) throw InvalidArgument("consecutive path points must be distinct");
    }
}

Point3 voxel_center(const Spacing& spacing, std::size_t i, std::size_t j, std::size_t k) {
    return {(static_cast<double>(i) + 0.5) * spacing.sx, (static_cast<double>(j) + 0.5) * spacing.sy,
            (static_cast<double>(k) + 0.5) * spacing.sz};
}

double distance_to_segment(const Point3& p, const Point3& a, const Point3& b) {
    const Point3 ab = sub(b, a);
    const Point3 ap = sub(p, a);
    const double len2 = dot(ab, ab);
    const double t = len2 > 0.0 ? std::clamp(dot(ap, ab) / len2, 0.0, 1.0) : 0.0;
    const Point3 d{ap[0] - t * ab[0], ap[1] - t * ab[1], ap[2] - t * ab[2]};
    return std::sqrt(dot(d, d));
}

double distance_to_path(const Path3D& path, const Point3& p) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < path.segment_count(); ++i) {
        const auto [a, b] = path.segment(i);
        best = std::min(best, distance_to_segment(p, a, b));
    }
    return best;
}

double inner_cylinder_radius(const Spacing& spacing) { return 1.5 * spacing.min(); }

BinaryVolume rasterize_tube(const Path3D& path, double radius_mm, const Dims& dims, const Spacing& spacing) {
    validate_path(path);
    if (!(radius_mm > 0.0)) throw InvalidArgument("tube radius must be > 0");
    BinaryVolume out(dims, spacing, false);
    check_in_bounds(path, dims, spacing);
    for_voxels_near_path(path, radius_mm, dims, spacing, [&](std::size_t v) { out.set(v, true); });
    return out;
}

BinaryVolume grow_and_threshold(const Path3D& path, const ScalarVolume& intensity, const GrowConfig& config) {
    if (!(config.margin_mm > 0.0)) throw InvalidArgument("margin must be > 0");
    if (!(config.lo <= config.hi)) throw InvalidArgument("intensity window needs lo <= hi");
    if (intensity.empty()) throw InvalidArgument("intensity volume is empty");
    BinaryVolume out = rasterize_tube(path, config.margin_mm, intensity.dims(), intensity.spacing());
    for (std::size_t v = 0; v < out.size(); ++v) {
        if (out[v] && !(intensity[v] >= config.lo && intensity[v] <= config.hi)) out.set(v, false);
    }
    return out;
}

std::string path_to_json(const Path3D& path) {
    nlohmann::json j;
    j["points"] = nlohmann::json::array();
    for (const auto& p : path.points) j["points"].push_back({p[0], p[1], p[2]});
    j["closed"] = path.closed;
    return j.dump() + "\n";
}

Path3D path_from_json(const std::string& text) {
    Path3D path;
    try {
        const auto j = nlohmann::json::parse(text);
        const nlohmann::json* pts = &j;
        if (j.is_object()) {
            pts = &j.at("points");
            if (j.contains("closed")) path.closed = j.at("closed").get<bool>();
        }
        if (!pts->is_array()) throw InvalidArgument("path points must be an array");
        for (const auto& p : *pts) {
            if (!p.is_array() || p.size() != 3) throw InvalidArgument("path points must be [x, y, z]");
            path.points.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed path json: ") + e.what());
    }
    validate_path(path);
    return path;
}

}  // namespace voltopo
