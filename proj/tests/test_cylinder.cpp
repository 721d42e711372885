#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "voltopo/cubical_ph.hpp"
#include "voltopo/cylinder.hpp"
#include "voltopo/errors.hpp"

using namespace voltopo;

namespace {

Betti topology(const BinaryVolume& m) { return betti_numbers(compute_barcode(m.to_scalar()), 1.0); }

Path3D ring(double cx, double cy, double cz, double r, int n) {
    Path3D p;
    p.closed = true;
    for (int t = 0; t < n; ++t) {
        const double a = 2.0 * M_PI * t / n;
        p.points.push_back({cx + r * std::cos(a), cy + r * std::sin(a), cz});
    }
    return p;
}

}  // namespace

TEST_CASE("axial tube of radius 1.5 covers a 3x3 block per slice") {
    const Dims d{9, 9, 9};
    const Path3D axis{{{4.5, 4.5, 0.0}, {4.5, 4.5, 9.0}}, false};
    const BinaryVolume tube = rasterize_tube(axis, 1.5, d, {});
    CHECK(tube.count() == 81);
    for (std::size_t k = 0; k < 9; ++k)
        for (std::size_t j = 0; j < 9; ++j)
            for (std::size_t i = 0; i < 9; ++i) {
                const double dx = static_cast<double>(i) - 4.0, dy = static_cast<double>(j) - 4.0;
                CHECK(tube.at(i, j, k) == (dx * dx + dy * dy <= 2.25));
            }
    CHECK(inner_cylinder_radius({1.0, 1.0, 1.0}) == 1.5);
    CHECK(inner_cylinder_radius({0.8, 2.0, 1.0}) == doctest::Approx(1.2));
}

TEST_CASE("distance to segment") {
    CHECK(distance_to_segment({0, 1, 0}, {0, 0, 0}, {2, 0, 0}) == 1.0);
    CHECK(distance_to_segment({-3, 4, 0}, {0, 0, 0}, {2, 0, 0}) == 5.0);
    CHECK(distance_to_segment({5, 0, 0}, {0, 0, 0}, {2, 0, 0}) == 3.0);
}

TEST_CASE("tube topology") {
    const Dims d{24, 24, 24};
    const Path3D bent{{{3, 3, 3}, {20, 4, 5}, {18, 20, 12}, {4, 18, 20}}, false};
    CHECK(topology(rasterize_tube(bent, 2.0, d, {})) == Betti{1, 0, 0});
    CHECK(topology(rasterize_tube(bent, 1.5, d, {})) == Betti{1, 0, 0});
    const Path3D loop = ring(12, 12, 12, 7, 48);
    CHECK(topology(rasterize_tube(loop, 2.5, d, {})) == Betti{1, 1, 0});
    CHECK(topology(rasterize_tube(loop, 1.5, d, {})) == Betti{1, 1, 0});
}

TEST_CASE("tube grows monotonically with radius") {
    const Dims d{16, 12, 10};
    const Spacing s{1.0, 1.5, 2.0};
    const Path3D p{{{1, 2, 3}, {14, 15, 17}, {3, 16, 4}}, false};
    BinaryVolume prev = rasterize_tube(p, 0.5, d, s);
    for (double r = 1.0; r <= 5.0; r += 0.5) {
        const BinaryVolume cur = rasterize_tube(p, r, d, s);
        for (std::size_t i = 0; i < cur.size(); ++i) CHECK((!prev[i] || cur[i]));
        prev = cur;
    }
}

TEST_CASE("tube matches brute-force distances with anisotropic spacing") {
    const Dims d{10, 8, 6};
    const Spacing s{0.7, 1.3, 2.1};
    const Path3D p{{{0.5, 0.5, 0.5}, {6.0, 9.0, 11.0}, {1.0, 8.0, 2.0}}, true};
    const BinaryVolume tube = rasterize_tube(p, 2.2, d, s);
    for (std::size_t k = 0; k < d.nz; ++k)
        for (std::size_t j = 0; j < d.ny; ++j)
            for (std::size_t i = 0; i < d.nx; ++i) {
                const Point3 c{(i + 0.5) * s.sx, (j + 0.5) * s.sy, (k + 0.5) * s.sz};
                double best = 1e300;
                for (std::size_t t = 0; t < p.points.size(); ++t) {
                    const Point3& a = p.points[t];
                    const Point3& b = p.points[(t + 1) % p.points.size()];
                    // Dense sampling of the segment as an independent check.
                    for (int m = 0; m <= 4000; ++m) {
                        const double u = m / 4000.0;
                        double dd = 0;
                        for (int ax = 0; ax < 3; ++ax) {
                            const double x = a[ax] + u * (b[ax] - a[ax]) - c[ax];
                            dd += x * x;
                        }
                        best = std::min(best, std::sqrt(dd));
                    }
                }
                if (std::abs(best - 2.2) > 1e-2) CHECK(tube.at(i, j, k) == (best <= 2.2));
            }
}

TEST_CASE("path validation") {
    const Dims d{8, 8, 8};
    CHECK_THROWS_AS(rasterize_tube({{{1, 1, 1}}, false}, 1.0, d, {}), InvalidArgument);
    CHECK_THROWS_AS(rasterize_tube({{{1, 1, 1}, {1, 1, 1}}, false}, 1.0, d, {}), InvalidArgument);
    CHECK_THROWS_AS(rasterize_tube({{{1, 1, 1}, {9, 1, 1}}, false}, 1.0, d, {}), InvalidArgument);
    CHECK_THROWS_AS(rasterize_tube({{{1, 1, 1}, {4, 1, 1}}, false}, 0.0, d, {}), InvalidArgument);
}

TEST_CASE("path json round trip") {
    const Path3D p{{{1.25, 2.0, 3.0}, {4.0, 5.5, 6.1}}, true};
    CHECK(path_from_json(path_to_json(p)) == p);
    const Path3D bare = path_from_json("[[0,0,0],[1,2,3]]");
    CHECK(bare.points.size() == 2);
    CHECK_FALSE(bare.closed);
    CHECK_THROWS_AS(path_from_json("{\"points\": [[0,0]]}"), InvalidArgument);
    CHECK_THROWS_AS(path_from_json("not json"), InvalidArgument);
}

TEST_CASE("grow and threshold") {
    const Dims d{20, 20, 20};
    const Path3D p{{{10, 10, 2}, {10, 10, 18}}, false};

    SUBCASE("in-range intensity reduces to the margin tube") {
        const ScalarVolume flat(d, {}, 100.0);
        CHECK(grow_and_threshold(p, flat, {5.0}) == rasterize_tube(p, 5.0, d, {}));
    }
    SUBCASE("out-of-range intensity gives nothing") {
        const ScalarVolume hot(d, {}, 500.0);
        CHECK(grow_and_threshold(p, hot, {5.0}).count() == 0);
    }
    SUBCASE("bright tube against dark background") {
        const BinaryVolume inside = rasterize_tube(p, 3.0, d, {});
        ScalarVolume img(d, {}, -500.0);
        for (std::size_t i = 0; i < img.size(); ++i)
            if (inside[i]) img[i] = 50.0;
        const BinaryVolume margin = rasterize_tube(p, 5.0, d, {});
        const BinaryVolume grown = grow_and_threshold(p, img, {5.0});
        for (std::size_t i = 0; i < img.size(); ++i) CHECK(grown[i] == (inside[i] && margin[i]));
        // Default margin of 30 mm covers the whole tube.
        CHECK(grow_and_threshold(p, img) == inside);
    }
    CHECK_THROWS_AS(grow_and_threshold(p, ScalarVolume(d, {}, 0.0), {0.0}), InvalidArgument);
    CHECK_THROWS_AS(grow_and_threshold(p, ScalarVolume(d, {}, 0.0), {5.0, 10.0, -10.0}), InvalidArgument);
}
