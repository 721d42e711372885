#include "voltopo/volume_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <json.hpp>

#include "voltopo/errors.hpp"
#include "voltopo/io_util.hpp"

namespace voltopo {

namespace {

using Kind = VolumeIoError::Kind;
using nlohmann::json;

constexpr const char* kOrder = "xyz-row-major";

std::string header_line(const Dims& d, const Spacing& s, const char* dtype) {
    json h;
    h["dims"] = {d.nx, d.ny, d.nz};
    h["spacing"] = {s.sx, s.sy, s.sz};
    h["dtype"] = dtype;
    h["order"] = kOrder;
    return h.dump() + "\n";
}

template <typename UInt>
void put_le(std::string& out, UInt bits) {
    for (std::size_t b = 0; b < sizeof(UInt); ++b) {
        out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
    }
}

template <typename UInt>
UInt get_le(const unsigned char* p) {
    UInt v = 0;
    for (std::size_t b = 0; b < sizeof(UInt); ++b) v |= static_cast<UInt>(p[b]) << (8 * b);
    return v;
}

}  // namespace

std::string encode_volume(const ScalarVolume& vol, ScalarDtype dtype) {
    const bool f32 = dtype == ScalarDtype::f32;
    std::string out = header_line(vol.dims(), vol.spacing(), f32 ? "f32" : "f64");
    out.reserve(out.size() + vol.size() * (f32 ? 4 : 8));
    for (double v : vol.data()) {
        if (f32) {
            put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
        } else {
            put_le(out, std::bit_cast<std::uint64_t>(v));
        }
    }
    return out;
}

std::string encode_volume(const BinaryVolume& vol) {
    std::string out = header_line(vol.dims(), vol.spacing(), "u8");
    out.append(reinterpret_cast<const char*>(vol.data().data()), vol.size());
    return out;
}

AnyVolume decode_volume(const std::string& bytes) {
    const auto nl = bytes.find('\n');
    if (nl == std::string::npos) throw VolumeIoError(Kind::malformed_header, "missing header line");

    Dims dims;
    Spacing spacing;
    std::string dtype;
    try {
        const json h = json::parse(bytes.substr(0, nl));
        const auto& d = h.at("dims");
        const auto& s = h.at("spacing");
        if (!d.is_array() || d.size() != 3 || !s.is_array() || s.size() != 3) {
            throw VolumeIoError(Kind::malformed_header, "dims and spacing must have 3 entries");
        }
        for (const auto& e : d) {
            if (!e.is_number_unsigned()) {
                throw VolumeIoError(Kind::malformed_header, "dims must be non-negative integers");
            }
        }
        for (const auto& e : s) {
            if (!e.is_number()) throw VolumeIoError(Kind::malformed_header, "spacing must be numeric");
        }
        dims = {d[0].get<std::size_t>(), d[1].get<std::size_t>(), d[2].get<std::size_t>()};
        spacing = {s[0].get<double>(), s[1].get<double>(), s[2].get<double>()};
        dtype = h.at("dtype").get<std::string>();
        if (h.contains("order") && h.at("order").get<std::string>() != kOrder) {
            throw VolumeIoError(Kind::malformed_header, "unsupported voxel order");
        }
    } catch (const json::exception& e) {
        throw VolumeIoError(Kind::malformed_header, std::string("bad header: ") + e.what());
    }
    if (!(spacing.sx > 0 && spacing.sy > 0 && spacing.sz > 0)) {
        throw VolumeIoError(Kind::malformed_header, "spacing must be > 0");
    }

    std::size_t width = 0;
    if (dtype == "f32") width = 4;
    else if (dtype == "f64") width = 8;
    else if (dtype == "u8") width = 1;
    else throw VolumeIoError(Kind::malformed_header, "unknown dtype '" + dtype + "'");

    const std::size_t payload = bytes.size() - nl - 1;
    if (payload != dims.count() * width) {
        throw VolumeIoError(Kind::size_mismatch,
                            "payload has " + std::to_string(payload) + " bytes, expected " +
                                std::to_string(dims.count() * width));
    }
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + nl + 1);

    if (dtype == "u8") {
        std::vector<std::uint8_t> data(p, p + dims.count());
        for (auto b : data) {
            if (b > 1) throw VolumeIoError(Kind::size_mismatch, "u8 payload must hold 0/1 values");
        }
        return BinaryVolume(dims, spacing, std::move(data));
    }
    std::vector<double> data(dims.count());
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (width == 4) {
            data[i] = std::bit_cast<float>(get_le<std::uint32_t>(p + 4 * i));
        } else {
            data[i] = std::bit_cast<double>(get_le<std::uint64_t>(p + 8 * i));
        }
    }
    return ScalarVolume(dims, spacing, std::move(data));
}

void write_volume(const ScalarVolume& vol, const std::filesystem::path& path, ScalarDtype dtype) {
    write_file_atomic(path, encode_volume(vol, dtype));
}

void write_volume(const BinaryVolume& vol, const std::filesystem::path& path) {
    write_file_atomic(path, encode_volume(vol));
}

AnyVolume read_volume(const std::filesystem::path& path) { return decode_volume(read_file(path)); }

ScalarVolume read_scalar_volume(const std::filesystem::path& path) {
    auto v = read_volume(path);
    if (auto* b = std::get_if<BinaryVolume>(&v)) return b->to_scalar();
    return std::get<ScalarVolume>(std::move(v));
}

BinaryVolume read_binary_volume(const std::filesystem::path& path, double p) {
    auto v = read_volume(path);
    if (auto* s = std::get_if<ScalarVolume>(&v)) return threshold(*s, p);
    return std::get<BinaryVolume>(std::move(v));
}

}  // namespace voltopo
