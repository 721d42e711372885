#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "voltopo/errors.hpp"
#include "voltopo/topo_loss.hpp"

using namespace voltopo;

namespace {

Bar bar(int dim, double b, double d, std::size_t bv, std::optional<std::size_t> dv) {
    return {dim, b, d, bv, dv};
}

double loss_at(const ScalarVolume& v, const BettiTarget& t) { return topo_loss(compute_barcode(v), t).total; }

// Central difference of the loss along `dir`.
double directional_fd(const ScalarVolume& v, const std::vector<double>& dir, const BettiTarget& t, double h) {
    ScalarVolume plus = v, minus = v;
    for (std::size_t i = 0; i < v.size(); ++i) {
        plus[i] += h * dir[i];
        minus[i] -= h * dir[i];
    }
    return (loss_at(plus, t) - loss_at(minus, t)) / (2.0 * h);
}

}  // namespace

TEST_CASE("loss examples") {
    const BettiTarget target;
    Barcode one;
    one.bars = {bar(0, 1.0, 0.0, 0, std::nullopt)};
    CHECK(topo_loss(one, target).total == 0.0);

    Barcode two;
    two.bars = {bar(0, 1.0, 0.0, 0, std::nullopt), bar(0, 0.6, 0.2, 1, 2)};
    const LossValue l2 = topo_loss(two, target);
    CHECK(l2.per_dim[0] == doctest::Approx(0.16));
    CHECK(l2.total == doctest::Approx(0.16));

    CHECK(topo_loss(Barcode{}, target).total == 1.0);

    Barcode mixed;
    mixed.bars = {bar(0, 1.0, 0.0, 0, std::nullopt), bar(1, 0.5, 0.3, 1, 2)};
    const LossValue lm = topo_loss(mixed, target);
    CHECK(lm.per_dim[0] == 0.0);
    CHECK(lm.per_dim[1] == doctest::Approx(0.04));
    CHECK(lm.total == doctest::Approx(0.04));
}

TEST_CASE("missing desired bars cost one each") {
    Barcode bc;
    bc.bars = {bar(0, 0.5, 0.0, 0, std::nullopt)};
    const LossValue l = topo_loss(bc, BettiTarget{{2, 1, 0}});
    CHECK(l.per_dim[0] == doctest::Approx((1 - 0.25) + 1.0));
    CHECK(l.per_dim[1] == 1.0);
    CHECK(l.total == doctest::Approx(2.75));
}

TEST_CASE("persistence floor drops short bars") {
    Barcode bc;
    bc.bars = {bar(0, 1.0, 0.0, 0, std::nullopt), bar(0, 0.6, 0.55, 1, 2)};
    CHECK(topo_loss(bc).total == doctest::Approx(0.0025));
    CHECK(topo_loss(bc, {}, {0.1}).total == 0.0);
}

TEST_CASE("loss is zero exactly at the target barcode") {
    Barcode ok;
    ok.bars = {bar(0, 1.0, 0.0, 0, std::nullopt), bar(1, 1.0, 0.0, 1, 2)};
    CHECK(topo_loss(ok, BettiTarget{{1, 1, 0}}).total == 0.0);
    CHECK(topo_loss(ok, BettiTarget{{1, 0, 0}}).total > 0.0);
    Barcode short_bar;
    short_bar.bars = {bar(0, 0.99, 0.0, 0, std::nullopt)};
    CHECK(topo_loss(short_bar).total > 0.0);
}

TEST_CASE("gradient examples") {
    const Dims dims{3, 1, 1};
    Barcode single;
    single.bars = {bar(0, 0.9, 0.0, 1, std::nullopt)};
    const ScalarVolume g1 = topo_loss_gradient(single, {}, dims);
    CHECK(g1[0] == 0.0);
    CHECK(g1[1] == doctest::Approx(-1.8));
    CHECK(g1[2] == 0.0);

    Barcode surplus;
    surplus.bars = {bar(0, 1.0, 0.0, 0, std::nullopt), bar(0, 0.6, 0.2, 1, 2)};
    const ScalarVolume g2 = topo_loss_gradient(surplus, {}, dims);
    CHECK(g2[0] == doctest::Approx(-2.0));
    CHECK(g2[1] == doctest::Approx(0.8));
    CHECK(g2[2] == doctest::Approx(-0.8));
}

TEST_CASE("gradient needs a pairing") {
    Barcode bc;
    Bar b;
    b.dim = 0;
    b.birth = 0.5;
    bc.bars = {b};
    CHECK_THROWS_AS(topo_loss_gradient(bc, {}, {2, 1, 1}), InvalidArgument);
    Barcode out_of_range;
    out_of_range.bars = {bar(0, 0.5, 0.0, 7, std::nullopt)};
    CHECK_THROWS_AS(topo_loss_gradient(out_of_range, {}, {2, 1, 1}), InvalidArgument);
}

TEST_CASE("gradient matches central differences on generic volumes") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const BettiTarget targets[] = {BettiTarget{{1, 0, 0}}, BettiTarget{{2, 2, 1}}};
    for (int trial = 0; trial < 8; ++trial) {
        const ScalarVolume v = oracle::distinct_volume(rng, {6, 6, 6});
        const Barcode bc = compute_barcode(v);
        for (const auto& target : targets) {
            const ScalarVolume g = topo_loss_gradient(bc, target, v.dims());
            std::vector<double> dir(v.size());
            for (auto& d : dir) d = u(rng);
            double analytic = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) analytic += g[i] * dir[i];
            const double fd = directional_fd(v, dir, target, 1e-6);
            CHECK(std::abs(fd - analytic) <= 1e-4 * std::max(std::abs(analytic), 1e-6));
        }
    }
}

TEST_CASE("every dimension contributes gradient that matches per-voxel differences") {
    std::mt19937_64 rng(77);
    const ScalarVolume v = oracle::distinct_volume(rng, {5, 5, 5});
    const Barcode bc = compute_barcode(v);
    REQUIRE(bc.count(1) > 0);
    REQUIRE(bc.count(2) > 0);
    const BettiTarget target{{1, 1, 1}};
    const ScalarVolume g = topo_loss_gradient(bc, target, v.dims());
    std::set<std::size_t> critical;
    for (const auto& b : bc.bars) {
        critical.insert(*b.birth_voxel);
        if (b.death_voxel) critical.insert(*b.death_voxel);
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::vector<double> e(v.size(), 0.0);
        e[i] = 1.0;
        const double fd = directional_fd(v, e, target, 1e-6);
        CHECK(fd == doctest::Approx(g[i]).epsilon(1e-4).scale(1e-6));
        if (!critical.count(i)) CHECK(g[i] == 0.0);
    }
}

TEST_CASE("axis flip leaves the loss unchanged") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        const ScalarVolume v = oracle::random_volume(rng, 7, trial % 2 ? 4 : 0);
        const Dims& d = v.dims();
        for (int axis = 0; axis < 3; ++axis) {
            ScalarVolume f(d, {}, 0.0);
            for (std::size_t k = 0; k < d.nz; ++k)
                for (std::size_t j = 0; j < d.ny; ++j)
                    for (std::size_t i = 0; i < d.nx; ++i) {
                        const std::size_t a = axis == 0 ? d.nx - 1 - i : i;
                        const std::size_t b = axis == 1 ? d.ny - 1 - j : j;
                        const std::size_t c = axis == 2 ? d.nz - 1 - k : k;
                        f[d.index(a, b, c)] = v.at(i, j, k);
                    }
            CHECK(loss_at(f, {}) == doctest::Approx(loss_at(v, {})).epsilon(1e-12));
        }
    }
}
