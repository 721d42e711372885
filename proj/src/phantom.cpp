#include "voltopo/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "voltopo/errors.hpp"

namespace voltopo {

namespace {

constexpr double kPi = std::numbers::pi;

struct Extent {
    double x, y, z;
    double min_xy() const { return std::min(x, y); }
};

Extent extent_of(const PhantomSpec& s) {
    return {static_cast<double>(s.dims.nx) * s.spacing.sx, static_cast<double>(s.dims.ny) * s.spacing.sy,
            static_cast<double>(s.dims.nz) * s.spacing.sz};
}

double max_spacing(const Spacing& s) { return std::max({s.sx, s.sy, s.sz}); }

// Distance from the box wall kept free around every path point.
double wall_margin(const PhantomSpec& s) { return s.tube_radius_mm + 2.0 * max_spacing(s.spacing); }

void require(bool ok, const char* what) {
    if (!ok) throw InvalidArgument(std::string("phantom: ") + what);
}

Path3D straight_path(const PhantomSpec& s, const Extent& e, SplitMix64& rng) {
    const double m = wall_margin(s);
    const double j = 0.05 * e.min_xy();
    require(e.z > 2 * m + s.tube_radius_mm && e.min_xy() > 2 * (m + j), "volume too small for a tube");
    Path3D p;
    p.points.push_back({e.x / 2 + rng.uniform(-j, j), e.y / 2 + rng.uniform(-j, j), m});
    p.points.push_back({e.x / 2 + rng.uniform(-j, j), e.y / 2 + rng.uniform(-j, j), e.z - m});
    return p;
}

// Helix around the z axis through the box center. `dip` pulls one stretch of
// the second turn down onto the first so that the tubes meet.
Path3D helix_path(const PhantomSpec& s, const Extent& e, SplitMix64& rng, bool dip) {
    const double r = s.tube_radius_mm;
    const double m = wall_margin(s);
    const double radius = 0.25 * e.min_xy();
    const double pitch = 3.5 * r;
    require(radius > r + 2.0 * max_spacing(s.spacing) && radius + r + m <= 0.5 * e.min_xy(),
            "volume too small for a helix of this tube radius");
    const double j = std::min(1.5, 0.5 * e.min_xy() - radius - m);
    const double cx = e.x / 2 + rng.uniform(-j, j);
    const double cy = e.y / 2 + rng.uniform(-j, j);
    const double phase = rng.uniform(0.0, 2 * kPi);

    const double z0 = m;
    const double turns = (e.z - 2 * m) / pitch;
    require(turns >= (dip ? 2.5 : 1.0), "volume too short for the helix");
    const double dip_at = phase + 2 * kPi * (1.0 + rng.uniform(0.25, 0.75));
    const double dip_depth = pitch - 1.5 * r;
    const double dip_width = 0.35;

    const double theta_end = 2 * kPi * turns;
    const double step = std::min(0.5, 1.0 / radius);  // ~1 mm or finer
    Path3D p;
    for (double t = 0.0; t <= theta_end + 1e-12; t += step) {
        const double theta = phase + t;
        double z = z0 + pitch * t / (2 * kPi);
        if (dip) z -= dip_depth * std::exp(-std::pow((theta - dip_at) / dip_width, 2));
        p.points.push_back({cx + radius * std::cos(theta), cy + radius * std::sin(theta), z});
    }
    return p;
}

Path3D ring_path(const PhantomSpec& s, const Extent& e, SplitMix64& rng) {
    const double r = s.tube_radius_mm;
    const double m = wall_margin(s);
    const double radius = 0.25 * e.min_xy();
    require(radius > r + 2.0 * max_spacing(s.spacing) && radius + m <= 0.5 * e.min_xy() && e.z > 2 * m,
            "volume too small for a ring");
    const double jz = std::min(0.05 * e.z, e.z / 2 - m);
    const double cz = e.z / 2 + rng.uniform(-jz, jz);
    const double phase = rng.uniform(0.0, 2 * kPi);
    const auto n = static_cast<std::size_t>(std::ceil(2 * kPi * radius));
    Path3D p;
    p.closed = true;
    for (std::size_t i = 0; i < n; ++i) {
        const double theta = phase + 2 * kPi * static_cast<double>(i) / static_cast<double>(n);
        p.points.push_back({e.x / 2 + radius * std::cos(theta), e.y / 2 + radius * std::sin(theta), cz});
    }
    return p;
}

// Hairpin in an xz plane: up one arm, a half-circle turn, down the other. The
// second arm bends toward the first around one height so the tubes touch.
Path3D hairpin_path(const PhantomSpec& s, const Extent& e, SplitMix64& rng) {
    const double r = s.tube_radius_mm;
    const double m = wall_margin(s);
    const double half = 2.0 * r;
    require(e.x > 2 * (half + m) && e.y > 2 * m && e.z > 2 * m + 6 * half, "volume too small for a hairpin");
    const double jy = std::min(0.05 * e.y, e.y / 2 - m);
    const double y = e.y / 2 + rng.uniform(-jy, jy);
    const double cx = e.x / 2;
    const double z_bottom = m;
    const double z_top = e.z - m - half;
    const double pinch_z = z_bottom + (z_top - z_bottom) * rng.uniform(0.3, 0.6);
    const double pinch_width = 2.0 * r;
    const double pinch_depth = 2 * half - 1.5 * r;

    Path3D p;
    for (double z = z_bottom; z < z_top; z += 1.0) p.points.push_back({cx - half, y, z});
    const auto turn_steps = static_cast<std::size_t>(std::ceil(kPi * half));
    for (std::size_t i = 0; i <= turn_steps; ++i) {
        const double t = kPi * (1.0 - static_cast<double>(i) / static_cast<double>(turn_steps));
        p.points.push_back({cx + half * std::cos(t), y, z_top + half * std::sin(t)});
    }
    for (double z = z_top - 1.0; z >= z_bottom - 1e-9; z -= 1.0) {
        double x = cx + half;
        const double u = (z - pinch_z) / pinch_width;
        if (std::abs(u) < 1.0) x -= pinch_depth * std::pow(std::cos(kPi * u / 2), 2);
        p.points.push_back({x, y, z});
    }
    return p;
}

// Cumulative arc length at each path point.
std::vector<double> arc_positions(const Path3D& path) {
    std::vector<double> s(path.points.size() + 1, 0.0);
    for (std::size_t i = 0; i < path.segment_count(); ++i) {
        const auto [a, b] = path.segment(i);
        s[i + 1] = s[i] + std::hypot(b[0] - a[0], b[1] - a[1], b[2] - a[2]);
    }
    return s;
}

// Voxels within `reach` of two stretches of the path that are at least
// `separation` apart in arc length: where the tube meets itself.
BinaryVolume contact_zone(const Path3D& path, double reach, double separation, const Dims& dims,
                          const Spacing& spacing) {
    const BinaryVolume near = rasterize_tube(path, reach, dims, spacing);
    const std::vector<double> arc = arc_positions(path);
    const double total = arc[path.segment_count()];
    const std::size_t nseg = path.segment_count();
    BinaryVolume zone(dims, spacing, false);
    std::vector<double> dist(nseg);
    for (std::size_t v = 0; v < near.size(); ++v) {
        if (!near[v]) continue;
        const auto c = dims.coords(v);
        const Point3 p = voxel_center(spacing, c[0], c[1], c[2]);
        std::size_t best = 0;
        for (std::size_t i = 0; i < nseg; ++i) {
            const auto [a, b] = path.segment(i);
            dist[i] = distance_to_segment(p, a, b);
            if (dist[i] < dist[best]) best = i;
        }
        const double s0 = arc[best], s1 = arc[best + 1];
        for (std::size_t i = 0; i < nseg; ++i) {
            if (dist[i] > reach) continue;
            // Gap between the two segments' arc intervals.
            double gap = std::max(arc[i] - s1, s0 - arc[i + 1]);
            if (path.closed) gap = std::min(gap, total - std::max(s1, arc[i + 1]) + std::min(s0, arc[i]));
            if (gap >= separation) {
                zone.set(v, true);
                break;
            }
        }
    }
    return zone;
}

BinaryVolume ball_mask(const Point3& center, double radius, const Dims& dims, const Spacing& spacing) {
    Path3D dot;
    dot.points = {center, {center[0] + 1e-6, center[1], center[2]}};
    return rasterize_tube(dot, radius, dims, spacing);
}

// mean(mask, blur(mask)) * level
ScalarVolume soften(const BinaryVolume& mask, double level) {
    ScalarVolume hard = mask.to_scalar();
    ScalarVolume soft = box_blur3(hard);
    for (std::size_t i = 0; i < soft.size(); ++i) soft[i] = level * 0.5 * (hard[i] + soft[i]);
    return soft;
}

}  // namespace

std::uint64_t SplitMix64::next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::string to_string(PhantomKind kind) {
    switch (kind) {
        case PhantomKind::straight_tube: return "straight_tube";
        case PhantomKind::helix: return "helix";
        case PhantomKind::closed_ring: return "closed_ring";
        case PhantomKind::two_tube_bridged: return "two_tube_bridged";
        case PhantomKind::coil_touching: return "coil_touching";
    }
    return "?";
}

PhantomKind phantom_kind_from_string(std::string_view name) {
    for (auto k : {PhantomKind::straight_tube, PhantomKind::helix, PhantomKind::closed_ring,
                   PhantomKind::two_tube_bridged, PhantomKind::coil_touching}) {
        if (to_string(k) == name) return k;
    }
    throw InvalidArgument("unknown phantom kind '" + std::string(name) + "'");
}

ScalarVolume box_blur3(const ScalarVolume& vol) {
    ScalarVolume cur = vol;
    const Dims& d = vol.dims();
    const std::size_t strides[3] = {1, d.nx, d.nx * d.ny};
    const std::size_t lens[3] = {d.nx, d.ny, d.nz};
    for (int axis = 0; axis < 3; ++axis) {
        ScalarVolume next = cur;
        for (std::size_t v = 0; v < d.count(); ++v) {
            const std::size_t pos = d.coords(v)[static_cast<std::size_t>(axis)];
            double sum = cur[v];
            int n = 1;
            if (pos > 0) {
                sum += cur[v - strides[axis]];
                ++n;
            }
            if (pos + 1 < lens[axis]) {
                sum += cur[v + strides[axis]];
                ++n;
            }
            next[v] = sum / n;
        }
        cur = std::move(next);
    }
    return cur;
}

Phantom generate_phantom(const PhantomSpec& spec) {
    require(spec.dims.count() > 0, "dims must be positive");
    require(spec.tube_radius_mm > 0.0, "tube radius must be > 0");
    require(spec.noise_sigma >= 0.0, "noise_sigma must be >= 0");
    require(spec.contact_confidence > 0.5 && spec.contact_confidence <= 1.0,
            "contact_confidence must lie in (0.5, 1]");
    const bool touching = spec.kind == PhantomKind::two_tube_bridged || spec.kind == PhantomKind::coil_touching;
    if (touching) {
        require(spec.tube_radius_mm >= 2.5 * max_spacing(spec.spacing),
                "touching kinds need a tube radius of at least 2.5 voxels");
    }

    SplitMix64 rng(spec.seed);
    const Extent e = extent_of(spec);
    Phantom out;
    switch (spec.kind) {
        case PhantomKind::straight_tube: out.path = straight_path(spec, e, rng); break;
        case PhantomKind::helix: out.path = helix_path(spec, e, rng, false); break;
        case PhantomKind::closed_ring: out.path = ring_path(spec, e, rng); break;
        case PhantomKind::two_tube_bridged: out.path = hairpin_path(spec, e, rng); break;
        case PhantomKind::coil_touching: out.path = helix_path(spec, e, rng, true); break;
    }

    out.gt = rasterize_tube(out.path, spec.tube_radius_mm, spec.dims, spec.spacing);
    out.intensity = ScalarVolume(spec.dims, spec.spacing, spec.intensity_outside);
    for (std::size_t v = 0; v < out.gt.size(); ++v) {
        if (out.gt[v]) out.intensity[v] = spec.intensity_inside;
    }
    for (auto& x : out.intensity.data()) x = static_cast<float>(x);

    out.prob = soften(out.gt, 1.0);
    if (touching) {
        // Every gt voxel 26-adjacent to the other stretch of tube is within
        // reach of both stretches, so capping the zone caps the whole contact.
        const double reach = spec.tube_radius_mm + std::sqrt(3.0) * max_spacing(spec.spacing);
        const BinaryVolume zone = contact_zone(out.path, reach, 4.0 * reach, spec.dims, spec.spacing);
        for (std::size_t v = 0; v < zone.size(); ++v) {
            if (zone[v]) out.prob[v] = std::min(out.prob[v], spec.contact_confidence);
        }

        const double island_radius = 0.6 * spec.tube_radius_mm;
        const double wall = island_radius + 2.0 * max_spacing(spec.spacing);
        std::vector<Point3> placed;
        for (std::size_t tries = 0; placed.size() < spec.islands && tries < 10000; ++tries) {
            const Point3 c{rng.uniform(wall, e.x - wall), rng.uniform(wall, e.y - wall),
                           rng.uniform(wall, e.z - wall)};
            if (distance_to_path(out.path, c) < spec.tube_radius_mm + island_radius + 6.0) continue;
            bool clear = true;
            for (const auto& q : placed) {
                if (std::hypot(c[0] - q[0], c[1] - q[1], c[2] - q[2]) < 2 * island_radius + 4.0) clear = false;
            }
            if (clear) placed.push_back(c);
        }
        require(placed.size() == spec.islands, "could not place all islands");
        for (const auto& c : placed) {
            const ScalarVolume blob = soften(ball_mask(c, island_radius, spec.dims, spec.spacing), 0.8);
            for (std::size_t v = 0; v < blob.size(); ++v) out.prob[v] = std::max(out.prob[v], blob[v]);
        }
    }

    const double half_width = spec.noise_sigma * std::sqrt(3.0);
    for (auto& x : out.prob.data()) {
        const double noise = rng.uniform(-half_width, half_width);
        x = static_cast<float>(std::clamp(x + noise, 0.0, 1.0));
    }
    return out;
}

}  // namespace voltopo
