#include "voltopo/volume.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "voltopo/errors.hpp"

namespace voltopo {

namespace {

void check_shape(const Dims& dims, const Spacing& spacing, std::size_t data_size) {
    if (!(spacing.sx > 0.0 && spacing.sy > 0.0 && spacing.sz > 0.0) ||
        !std::isfinite(spacing.sx) || !std::isfinite(spacing.sy) || !std::isfinite(spacing.sz)) {
        throw InvalidArgument("spacing components must be finite and > 0");
    }
    if (data_size != dims.count()) {
        throw InvalidArgument("data length " + std::to_string(data_size) +
                              " does not match dims product " + std::to_string(dims.count()));
    }
}

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

}  // namespace

double Spacing::min() const { return std::min({sx, sy, sz}); }

ScalarVolume::ScalarVolume(Dims dims, Spacing spacing, double fill)
    : dims_(dims), spacing_(spacing), data_(dims.count(), fill) {
    check_shape(dims_, spacing_, data_.size());
}

ScalarVolume::ScalarVolume(Dims dims, Spacing spacing, std::vector<double> data)
    : dims_(dims), spacing_(spacing), data_(std::move(data)) {
    check_shape(dims_, spacing_, data_.size());
}

bool ScalarVolume::is_probability() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
}

BinaryVolume::BinaryVolume(Dims dims, Spacing spacing, bool fill)
    : dims_(dims), spacing_(spacing), data_(dims.count(), fill ? 1 : 0) {
    check_shape(dims_, spacing_, data_.size());
}

BinaryVolume::BinaryVolume(Dims dims, Spacing spacing, std::vector<std::uint8_t> data)
    : dims_(dims), spacing_(spacing), data_(std::move(data)) {
    check_shape(dims_, spacing_, data_.size());
    for (auto& b : data_) b = b ? 1 : 0;
}

std::size_t BinaryVolume::count() const {
    return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

ScalarVolume BinaryVolume::to_scalar() const {
    std::vector<double> out(data_.begin(), data_.end());
    return {dims_, spacing_, std::move(out)};
}

BinaryVolume threshold(const ScalarVolume& vol, double p) {
    std::vector<std::uint8_t> out(vol.size());
    for (std::size_t i = 0; i < vol.size(); ++i) out[i] = vol[i] >= p ? 1 : 0;
    return {vol.dims(), vol.spacing(), std::move(out)};
}

ScalarVolume downsample(const ScalarVolume& vol, std::size_t factor) {
    if (factor == 0) throw InvalidArgument("downsample factor must be >= 1");
    if (factor == 1) return vol;

    const Dims& fd = vol.dims();
    const Dims cd{ceil_div(fd.nx, factor), ceil_div(fd.ny, factor), ceil_div(fd.nz, factor)};
    const Spacing& fs = vol.spacing();
    const Spacing cs{fs.sx * factor, fs.sy * factor, fs.sz * factor};

    std::vector<double> sum(cd.count(), 0.0);
    std::vector<std::size_t> n(cd.count(), 0);
    for (std::size_t iz = 0; iz < fd.nz; ++iz) {
        for (std::size_t iy = 0; iy < fd.ny; ++iy) {
            const std::size_t row = cd.index(0, iy / factor, iz / factor);
            for (std::size_t ix = 0; ix < fd.nx; ++ix) {
                const std::size_t c = row + ix / factor;
                sum[c] += vol[fd.index(ix, iy, iz)];
                ++n[c];
            }
        }
    }
    for (std::size_t c = 0; c < sum.size(); ++c) sum[c] /= static_cast<double>(n[c]);
    return {cd, cs, std::move(sum)};
}

ScalarVolume downsample_adjoint(const ScalarVolume& coarse, const Dims& fine_dims,
                                const Spacing& fine_spacing, std::size_t factor) {
    if (factor == 0) throw InvalidArgument("downsample factor must be >= 1");
    const Dims expect{ceil_div(fine_dims.nx, factor), ceil_div(fine_dims.ny, factor),
                      ceil_div(fine_dims.nz, factor)};
    if (!(coarse.dims() == expect)) {
        throw InvalidArgument("coarse dims do not match fine dims / factor");
    }
    auto block_len = [factor](std::size_t c, std::size_t n) {
        return std::min(factor, n - c * factor);
    };
    ScalarVolume fine(fine_dims, fine_spacing, 0.0);
    for (std::size_t iz = 0; iz < fine_dims.nz; ++iz) {
        const std::size_t cz = iz / factor;
        for (std::size_t iy = 0; iy < fine_dims.ny; ++iy) {
            const std::size_t cy = iy / factor;
            for (std::size_t ix = 0; ix < fine_dims.nx; ++ix) {
                const std::size_t cx = ix / factor;
                const double block = static_cast<double>(block_len(cx, fine_dims.nx) *
                                                         block_len(cy, fine_dims.ny) *
                                                         block_len(cz, fine_dims.nz));
                fine[fine_dims.index(ix, iy, iz)] = coarse[expect.index(cx, cy, cz)] / block;
            }
        }
    }
    return fine;
}

}  // namespace voltopo
