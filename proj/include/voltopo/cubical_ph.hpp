#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voltopo/volume.hpp"

namespace voltopo {

/// One persistence interval of the super-level-set filtration. Features are
/// born at high thresholds and die at lower ones, so birth >= death.
struct Bar {
    int dim = 0;
    double birth = 0.0;
    double death = 0.0;
    std::optional<std::size_t> birth_voxel;
    std::optional<std::size_t> death_voxel;  // empty for the essential class

    double persistence() const { return birth - death; }
    bool essential() const { return !death_voxel.has_value(); }

    friend bool operator==(const Bar&, const Bar&) = default;
};

/// Bars ordered by dimension, then longest first; ties go to the higher birth,
/// then the smaller birth voxel. When produced by compute_barcode every bar
/// carries its critical voxels (the persistence pairing).
struct Barcode {
    std::vector<Bar> bars;

    std::vector<Bar> of_dim(int dim) const;
    std::size_t count(int dim) const;
    bool has_pairing() const;
};

using Betti = std::array<std::size_t, 3>;

struct PhOptions {
    /// Upper bound on worker threads; output does not depend on it.
    unsigned threads = 1;
};

/// Persistent homology of the super-level-set filtration of a probability
/// volume, in dimensions 0, 1 and 2.
///
/// Voxels are the top-dimensional cubes of a cubical complex on the voxel
/// grid; each lower-dimensional cell takes the largest value among its
/// incident voxels, so a cell is present at threshold p as soon as any
/// adjacent voxel is. Super-level components are therefore 26-connected and
/// enclosed voids are 6-connected background pockets. Every cell is credited to
/// the incident voxel realizing its value (smallest linear index on ties); a
/// bar's birth/death voxels are the credited voxels of its birth/death cells.
///
/// Zero-persistence pairs are dropped. The single essential class (dim 0) gets
/// death 0 and no death voxel; it is always reported, even for an all-zero
/// volume where its length is 0.
Barcode compute_barcode(const ScalarVolume& vol, const PhOptions& options = {});

/// Counts bars with birth >= p > death per dimension; p == 0 gives (1, 0, 0).
Betti betti_numbers(const Barcode& bc, double p);

std::vector<std::size_t> betti_curve(const Barcode& bc, int dim, std::span<const double> thresholds);

/// Puts bars into canonical order (see Barcode).
void sort_bars(std::vector<Bar>& bars);

/// CSV with header `dim,birth,death,birth_voxel,death_voxel`.
std::string barcode_to_csv(const Barcode& bc);

}  // namespace voltopo
