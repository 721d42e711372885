#include "voltopo/topo_loss.hpp"

#include <algorithm>
#include <vector>

#include "voltopo/errors.hpp"

namespace voltopo {

namespace {

// Bars of one dimension, longest first.
std::vector<const Bar*> ranked(const Barcode& bc, int dim, double floor) {
    std::vector<const Bar*> out;
    for (const auto& b : bc.bars) {
        if (b.dim == dim && b.persistence() >= floor) out.push_back(&b);
    }
    std::stable_sort(out.begin(), out.end(), [](const Bar* x, const Bar* y) {
        if (x->persistence() != y->persistence()) return x->persistence() > y->persistence();
        if (x->birth != y->birth) return x->birth > y->birth;
        return x->birth_voxel < y->birth_voxel;
    });
    return out;
}

}  // namespace

LossValue topo_loss(const Barcode& bc, const BettiTarget& target, const TopoLossOptions& options) {
    LossValue out;
    for (int k = 0; k < 3; ++k) {
        const std::size_t want = target.betti[static_cast<std::size_t>(k)];
        const auto bars = ranked(bc, k, options.persistence_floor);
        double loss = 0.0;
        for (std::size_t i = 0; i < bars.size(); ++i) {
            const double q = bars[i]->persistence();
            loss += i < want ? 1.0 - q * q : q * q;
        }
        if (bars.size() < want) loss += static_cast<double>(want - bars.size());
        out.per_dim[static_cast<std::size_t>(k)] = loss;
        out.total += loss;
    }
    return out;
}

ScalarVolume topo_loss_gradient(const Barcode& bc, const BettiTarget& target, const Dims& dims,
                                const Spacing& spacing, const TopoLossOptions& options) {
    for (const auto& b : bc.bars) {
        if (!b.birth_voxel) throw InvalidArgument("topo_loss_gradient: barcode has no pairing");
        if (*b.birth_voxel >= dims.count() || (b.death_voxel && *b.death_voxel >= dims.count())) {
            throw InvalidArgument("topo_loss_gradient: critical voxel outside the volume");
        }
    }
    ScalarVolume grad(dims, spacing, 0.0);
    for (int k = 0; k < 3; ++k) {
        const std::size_t want = target.betti[static_cast<std::size_t>(k)];
        const auto bars = ranked(bc, k, options.persistence_floor);
        for (std::size_t i = 0; i < bars.size(); ++i) {
            const Bar& b = *bars[i];
            // d(1 - q^2)/dq = -2q for desired bars, d(q^2)/dq = 2q otherwise;
            // q = birth - death.
            const double dq = i < want ? -2.0 * b.persistence() : 2.0 * b.persistence();
            grad[*b.birth_voxel] += dq;
            if (b.death_voxel) grad[*b.death_voxel] -= dq;
        }
    }
    return grad;
}

}  // namespace voltopo
