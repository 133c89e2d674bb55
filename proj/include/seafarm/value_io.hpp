#pragma once

// A ValueFunction persists as a scalar field file plus a JSON sidecar
// "<path>.json" holding {u_max, tau, t_start, T, cfl}; tau is null when undiscounted.

#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "seafarm/field_io.hpp"
#include "seafarm/hj_solver.hpp"

namespace seafarm {

inline std::filesystem::path sidecar_path(const std::filesystem::path& field_path) {
    return std::filesystem::path(field_path.string() + ".json");
}

inline nlohmann::ordered_json value_sidecar(const ValueFunction& vf) {
    nlohmann::ordered_json j;
    j["u_max"] = vf.config().u_max;
    j["tau"] = vf.config().tau ? nlohmann::ordered_json(*vf.config().tau) : nlohmann::ordered_json(nullptr);
    j["t_start"] = vf.t_start();
    j["T"] = vf.t_end();
    j["cfl"] = vf.config().cfl;
    return j;
}

inline void write_value_function(const ValueFunction& vf, const std::filesystem::path& path) {
    write_field(vf.slices(), path);
    std::ofstream out(sidecar_path(path), std::ios::trunc);
    if (!out) {
        throw FormatError(sidecar_path(path).string(), "cannot open for writing");
    }
    out << value_sidecar(vf).dump(2) << '\n';
}

inline ValueFunction read_value_function(const std::filesystem::path& path) {
    ScalarField slices = read_scalar_field(path);
    std::ifstream in(sidecar_path(path));
    if (!in) {
        throw FormatError(sidecar_path(path).string(), "missing value-function sidecar");
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("sidecar", e.what());
    }
    SolveConfig cfg;
    try {
        cfg.u_max = j.at("u_max").get<double>();
        cfg.cfl = j.at("cfl").get<double>();
        if (!j.at("tau").is_null()) {
            cfg.tau = j.at("tau").get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("sidecar", e.what());
    }
    return ValueFunction(std::move(slices), cfg);
}

}  // namespace seafarm
