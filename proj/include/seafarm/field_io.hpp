#pragma once

// Field file format: one JSON header line
//   {"kind":"scalar"|"vector","x0":..,"y0":..,"dx":..,"dy":..,"nx":..,"ny":..,"t0":..,"dt":..,"nt":..}
// terminated by '\n', followed by the raw little-endian f32 payload. Scalar fields
// carry nt*ny*nx values; vector fields carry the u block then the v block.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "seafarm/errors.hpp"
#include "seafarm/field.hpp"

namespace seafarm {

using AnyField = std::variant<ScalarField, FlowField>;

namespace detail {

inline void append_f32(std::string& out, std::span<const double> values) {
    const std::size_t start = out.size();
    out.resize(start + 4 * values.size());
    char* dst = out.data() + start;
    for (double v : values) {
        auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
        if constexpr (std::endian::native == std::endian::big) {
            bits = __builtin_bswap32(bits);
        }
        std::memcpy(dst, &bits, 4);
        dst += 4;
    }
}

inline std::vector<double> decode_f32(const char* src, std::size_t count) {
    std::vector<double> out(count);
    for (std::size_t n = 0; n < count; ++n) {
        std::uint32_t bits;
        std::memcpy(&bits, src + 4 * n, 4);
        if constexpr (std::endian::native == std::endian::big) {
            bits = __builtin_bswap32(bits);
        }
        const float f = std::bit_cast<float>(bits);
        if (!std::isfinite(f)) {
            throw FormatError("payload", "non-finite value at element " + std::to_string(n));
        }
        out[n] = static_cast<double>(f);
    }
    return out;
}

inline nlohmann::ordered_json field_header(const char* kind, const SpatialGrid& g, const TimeAxis& t) {
    nlohmann::ordered_json h;
    h["kind"] = kind;
    h["x0"] = g.x0();
    h["y0"] = g.y0();
    h["dx"] = g.dx();
    h["dy"] = g.dy();
    h["nx"] = g.nx();
    h["ny"] = g.ny();
    h["t0"] = t.t0();
    h["dt"] = t.dt();
    h["nt"] = t.nt();
    return h;
}

inline double header_number(const nlohmann::json& h, const char* key) {
    auto it = h.find(key);
    if (it == h.end()) {
        throw FormatError(key, "missing header key");
    }
    if (!it->is_number()) {
        throw FormatError(key, "expected a number");
    }
    return it->get<double>();
}

inline std::size_t header_count(const nlohmann::json& h, const char* key) {
    auto it = h.find(key);
    if (it == h.end()) {
        throw FormatError(key, "missing header key");
    }
    if (!it->is_number_unsigned()) {
        throw FormatError(key, "expected a non-negative integer");
    }
    return it->get<std::size_t>();
}

inline void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw FormatError(path.string(), "cannot open for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw FormatError(path.string(), "write failed");
    }
}

}  // namespace detail

inline std::string encode_field(const ScalarField& f) {
    std::string out = detail::field_header("scalar", f.grid(), f.time()).dump();
    out.push_back('\n');
    detail::append_f32(out, f.data());
    return out;
}

inline std::string encode_field(const FlowField& f) {
    std::string out = detail::field_header("vector", f.grid(), f.time()).dump();
    out.push_back('\n');
    detail::append_f32(out, f.u());
    detail::append_f32(out, f.v());
    return out;
}

inline AnyField decode_field(const std::string& bytes) {
    const auto eol = bytes.find('\n');
    if (eol == std::string::npos) {
        throw FormatError("header", "missing header line terminator");
    }
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(bytes.substr(0, eol));
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("header", e.what());
    }
    if (!h.is_object()) {
        throw FormatError("header", "expected a JSON object");
    }
    auto kind_it = h.find("kind");
    if (kind_it == h.end() || !kind_it->is_string()) {
        throw FormatError("kind", "missing or not a string");
    }
    const std::string kind = kind_it->get<std::string>();
    if (kind != "scalar" && kind != "vector") {
        throw FormatError("kind", "unknown kind '" + kind + "'");
    }

    const double x0 = detail::header_number(h, "x0");
    const double y0 = detail::header_number(h, "y0");
    const double dx = detail::header_number(h, "dx");
    const double dy = detail::header_number(h, "dy");
    const std::size_t nx = detail::header_count(h, "nx");
    const std::size_t ny = detail::header_count(h, "ny");
    const double t0 = detail::header_number(h, "t0");
    const double dt = detail::header_number(h, "dt");
    const std::size_t nt = detail::header_count(h, "nt");
    if (!(dx > 0.0)) throw FormatError("dx", "must be positive");
    if (!(dy > 0.0)) throw FormatError("dy", "must be positive");
    if (nx < 2) throw FormatError("nx", "must be at least 2");
    if (ny < 2) throw FormatError("ny", "must be at least 2");
    if (!(dt > 0.0)) throw FormatError("dt", "must be positive");
    if (nt < 1) throw FormatError("nt", "must be at least 1");

    const SpatialGrid grid = SpatialGrid::build(x0, y0, dx, dy, nx, ny);
    const TimeAxis time = TimeAxis::build(t0, dt, nt);
    const std::size_t count = nx * ny * nt;
    const std::size_t blocks = kind == "vector" ? 2 : 1;
    const std::size_t payload = bytes.size() - eol - 1;
    if (payload != 4 * count * blocks) {
        throw FormatError("payload", "expected " + std::to_string(4 * count * blocks) + " bytes for nx*ny*nt=" +
                                         std::to_string(count) + ", found " + std::to_string(payload));
    }
    const char* data = bytes.data() + eol + 1;
    if (kind == "scalar") {
        return ScalarField(grid, time, detail::decode_f32(data, count));
    }
    return FlowField(grid, time, detail::decode_f32(data, count), detail::decode_f32(data + 4 * count, count));
}

inline void write_field(const ScalarField& f, const std::filesystem::path& path) {
    detail::write_bytes(path, encode_field(f));
}

inline void write_field(const FlowField& f, const std::filesystem::path& path) {
    detail::write_bytes(path, encode_field(f));
}

inline AnyField read_field(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError(path.string(), "cannot open field file");
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_field(bytes);
}

inline ScalarField read_scalar_field(const std::filesystem::path& path) {
    AnyField f = read_field(path);
    if (auto* s = std::get_if<ScalarField>(&f)) {
        return std::move(*s);
    }
    throw FormatError("kind", path.string() + " holds a vector field, expected scalar");
}

inline FlowField read_flow_field(const std::filesystem::path& path) {
    AnyField f = read_field(path);
    if (auto* v = std::get_if<FlowField>(&f)) {
        return std::move(*v);
    }
    throw FormatError("kind", path.string() + " holds a scalar field, expected vector");
}

}  // namespace seafarm
