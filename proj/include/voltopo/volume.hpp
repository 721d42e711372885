#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace voltopo {

/// Grid extent (nx, ny, nz). Voxel (ix, iy, iz) lives at linear index
/// ix + nx * (iy + ny * iz), x fastest.
struct Dims {
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::size_t nz = 0;

    std::size_t count() const { return nx * ny * nz; }
    std::size_t index(std::size_t ix, std::size_t iy, std::size_t iz) const {
        return ix + nx * (iy + ny * iz);
    }
    std::array<std::size_t, 3> coords(std::size_t linear) const {
        return {linear % nx, (linear / nx) % ny, linear / (nx * ny)};
    }

    friend bool operator==(const Dims&, const Dims&) = default;
};

/// Physical voxel size in millimeters.
struct Spacing {
    double sx = 1.0;
    double sy = 1.0;
    double sz = 1.0;

    double min() const;

    friend bool operator==(const Spacing&, const Spacing&) = default;
};

/// Real-valued volume: probabilities, intensities, or gradients.
/// Immutable shape; the voxel buffer is exposed for element access.
class ScalarVolume {
public:
    ScalarVolume() = default;
    ScalarVolume(Dims dims, Spacing spacing, double fill = 0.0);
    ScalarVolume(Dims dims, Spacing spacing, std::vector<double> data);

    const Dims& dims() const { return dims_; }
    const Spacing& spacing() const { return spacing_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double at(std::size_t ix, std::size_t iy, std::size_t iz) const {
        return data_[dims_.index(ix, iy, iz)];
    }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    /// True when every value lies in [0, 1] (NaN fails).
    bool is_probability() const;

    friend bool operator==(const ScalarVolume&, const ScalarVolume&) = default;

private:
    Dims dims_{};
    Spacing spacing_{};
    std::vector<double> data_;
};

class BinaryVolume {
public:
    BinaryVolume() = default;
    BinaryVolume(Dims dims, Spacing spacing, bool fill = false);
    BinaryVolume(Dims dims, Spacing spacing, std::vector<std::uint8_t> data);

    const Dims& dims() const { return dims_; }
    const Spacing& spacing() const { return spacing_; }
    std::size_t size() const { return data_.size(); }

    bool operator[](std::size_t i) const { return data_[i] != 0; }
    void set(std::size_t i, bool v) { data_[i] = v ? 1 : 0; }
    bool at(std::size_t ix, std::size_t iy, std::size_t iz) const {
        return data_[dims_.index(ix, iy, iz)] != 0;
    }

    /// Raw 0/1 bytes.
    const std::vector<std::uint8_t>& data() const { return data_; }

    std::size_t count() const;
    ScalarVolume to_scalar() const;

    friend bool operator==(const BinaryVolume&, const BinaryVolume&) = default;

private:
    Dims dims_{};
    Spacing spacing_{};
    std::vector<std::uint8_t> data_;
};

/// Super-level set: voxel is set iff value >= p.
BinaryVolume threshold(const ScalarVolume& vol, double p);

/// Mean pooling over factor^3 blocks. Trailing partial blocks average the
/// voxels present. Output dims are ceil(dims / factor), spacing * factor.
ScalarVolume downsample(const ScalarVolume& vol, std::size_t factor);

/// Adjoint of downsample: each coarse value is spread over its block, divided
/// by the number of fine voxels in that block.
ScalarVolume downsample_adjoint(const ScalarVolume& coarse, const Dims& fine_dims,
                                const Spacing& fine_spacing, std::size_t factor);

}  // namespace voltopo
