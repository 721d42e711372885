#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "voltopo/cylinder.hpp"
#include "voltopo/volume.hpp"

namespace voltopo {

enum class PhantomKind { straight_tube, helix, closed_ring, two_tube_bridged, coil_touching };

std::string to_string(PhantomKind kind);
PhantomKind phantom_kind_from_string(std::string_view name);

struct PhantomSpec {
    PhantomKind kind = PhantomKind::straight_tube;
    Dims dims{64, 64, 64};
    Spacing spacing{};
    double tube_radius_mm = 4.0;
    double intensity_inside = 50.0;
    double intensity_outside = -500.0;
    double noise_sigma = 0.05;
    std::uint64_t seed = 0;
    /// Defective kinds only: false-positive blobs added to the prediction.
    std::size_t islands = 5;
    /// Defective kinds only: prediction value cap where the tube touches itself.
    double contact_confidence = 0.7;
};

struct Phantom {
    ScalarVolume intensity;
    BinaryVolume gt;
    Path3D path;
    ScalarVolume prob;
};

/// splitmix64; uniform() takes the top 53 bits.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::uint64_t state_;
};

/// Deterministic synthetic case. gt is the tube of radius tube_radius_mm
/// around `path`; for the touching kinds that tube meets itself, so gt holds
/// the contact while the path and its inner cylinder stay free of it.
///
/// prob is a soft, corrupted prediction of gt: the mean of gt and its 3-tap
/// box blur (so that thresholding at 0.5 recovers gt exactly), capped at
/// contact_confidence inside self-contact zones, joined with `islands`
/// false-positive blobs, plus uniform noise of standard deviation noise_sigma,
/// clamped to [0, 1] and rounded to f32. intensity is intensity_inside on gt
/// and intensity_outside elsewhere.
///
/// Random draws, in order: geometry jitter, island placement, then one noise
/// draw per voxel in linear order.
Phantom generate_phantom(const PhantomSpec& spec);

/// Separable 3-tap box filter; border voxels average the taps that exist.
ScalarVolume box_blur3(const ScalarVolume& vol);

}  // namespace voltopo
