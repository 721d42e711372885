#pragma once

#include <array>
#include <cstddef>

#include "voltopo/cubical_ph.hpp"
#include "voltopo/volume.hpp"

namespace voltopo {

/// Desired Betti numbers; the default is one component, no loops, no voids.
struct BettiTarget {
    std::array<std::size_t, 3> betti{1, 0, 0};

    friend bool operator==(const BettiTarget&, const BettiTarget&) = default;
};

struct LossValue {
    double total = 0.0;
    std::array<double, 3> per_dim{0.0, 0.0, 0.0};
};

struct TopoLossOptions {
    /// Bars shorter than this are ignored. 0 keeps every bar.
    double persistence_floor = 0.0;
};

/// Betti-number loss. Per dimension k, bars are ranked longest first; the
/// first target[k] bars pay (1 - q^2) and every further bar pays q^2, where q is
/// the bar length. Desired bars that do not exist pay 1 each.
LossValue topo_loss(const Barcode& bc, const BettiTarget& target = {},
                    const TopoLossOptions& options = {});

/// Derivative of topo_loss with respect to every voxel value, routed through
/// the birth/death voxels of the pairing. The fixed death of the essential bar
/// receives nothing.
ScalarVolume topo_loss_gradient(const Barcode& bc, const BettiTarget& target, const Dims& dims,
                                const Spacing& spacing = {}, const TopoLossOptions& options = {});

}  // namespace voltopo
