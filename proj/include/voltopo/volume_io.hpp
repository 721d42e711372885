#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "voltopo/volume.hpp"

namespace voltopo {

// svol layout: one JSON header line
//   {"dims":[nx,ny,nz],"spacing":[sx,sy,sz],"dtype":"f32","order":"xyz-row-major"}
// terminated by '\n', then the raw little-endian payload (x fastest).
// dtype is "f32" or "u8"; "f64" is also accepted for lossless scalar storage.

enum class ScalarDtype { f32, f64 };

using AnyVolume = std::variant<ScalarVolume, BinaryVolume>;

std::string encode_volume(const ScalarVolume& vol, ScalarDtype dtype = ScalarDtype::f32);
std::string encode_volume(const BinaryVolume& vol);
AnyVolume decode_volume(const std::string& bytes);

void write_volume(const ScalarVolume& vol, const std::filesystem::path& path,
                  ScalarDtype dtype = ScalarDtype::f32);
void write_volume(const BinaryVolume& vol, const std::filesystem::path& path);
AnyVolume read_volume(const std::filesystem::path& path);

/// Reads either dtype; u8 masks become 0/1 values.
ScalarVolume read_scalar_volume(const std::filesystem::path& path);
/// Reads either dtype; scalar volumes are thresholded at `p`.
BinaryVolume read_binary_volume(const std::filesystem::path& path, double p = 0.5);

}  // namespace voltopo
