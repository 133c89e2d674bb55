#pragma once

// Scenario configuration (JSON), in-memory materialisation, and the on-disk
// scenario directory layout:
//
//   scenario.json   resolved configuration
//   truth.field     fine-grid true currents
//   avg.field       coarse-grid block-averaged currents
//   growth.field    fine-grid gross growth rate (1/s)
//   missions.json   sampled missions

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seafarm/errors.hpp"
#include "seafarm/field.hpp"
#include "seafarm/field_io.hpp"
#include "seafarm/growth.hpp"
#include "seafarm/mission.hpp"
#include "seafarm/scenarios.hpp"
#include "seafarm/simulation.hpp"

namespace seafarm {

inline constexpr int kScenarioSchemaVersion = 1;

struct ScenarioConfig {
    std::uint64_t seed{1};
    double x_min{0.0};
    double x_max{400000.0};
    double y_min{0.0};
    double y_max{200000.0};
    std::size_t fine_nx{41};
    std::size_t fine_ny{21};
    std::size_t coarse_nx{21};
    std::size_t coarse_ny{11};
    double t0{0.0};
    double span{65.0 * kSecondsPerDay};
    double dt{3600.0};

    std::string flow_kind{"double_gyre"};  ///< double_gyre | uniform | highway | composite
    std::optional<DoubleGyre> gyre{DoubleGyre{0.12, 0.25, 2.0 * std::numbers::pi / (10.0 * kSecondsPerDay)}};
    std::optional<Highway> highway{};
    std::optional<Vec2> uniform{};

    GrowthSettings growth{};
    ErrorModel error{0.05, 0.3, 30000.0};
    double refresh_interval{kSecondsPerDay};
    double forecast_length{5.0 * kSecondsPerDay};
    double avg_window{30.0 * kSecondsPerDay};
    AverageBias avg_bias{};

    std::size_t n_missions{50};
    double min_border_dist{30000.0};
    double t_first{0.0};
    double t_last{30.0 * kSecondsPerDay};
    double horizon{30.0 * kSecondsPerDay};
    double m0{100.0};
    double u_max{0.1};
    std::vector<TimedPosition> starts;  ///< fixed mission starts; replaces sampling when non-empty

    double sim_step{600.0};
    double output_cadence{3600.0};
    double cfl{0.5};
    TimeIntegrator integrator{TimeIntegrator::Euler};

    SpatialGrid fine_grid() const { return SpatialGrid::spanning(x_min, x_max, y_min, y_max, fine_nx, fine_ny); }
    SpatialGrid coarse_grid() const {
        return SpatialGrid::spanning(x_min, x_max, y_min, y_max, coarse_nx, coarse_ny);
    }
    TimeAxis time_axis() const {
        const auto steps = static_cast<std::size_t>(std::llround(span / dt));
        return TimeAxis::build(t0, span / static_cast<double>(steps), steps + 1);
    }

    void validate() const {
        if (!(x_max > x_min) || !(y_max > y_min)) throw InvalidArgument("domain box is empty");
        if (coarse_nx > fine_nx || coarse_ny > fine_ny) throw InvalidArgument("coarse grid finer than fine grid");
        if (!(span > 0.0) || !(dt > 0.0) || std::llround(span / dt) < 1) throw InvalidArgument("bad time span");
        if (!(error.sigma0 >= 0.0)) throw InvalidArgument("sigma0 must be non-negative");
        for (const auto& b : growth.blobs) {
            if (b.peak < -growth.resp_rate) throw InvalidArgument("blob peak below the respiration bound");
        }
        if (flow_kind != "double_gyre" && flow_kind != "uniform" && flow_kind != "highway" && flow_kind != "composite") {
            throw InvalidArgument("unknown flow kind '" + flow_kind + "'");
        }
        if (flow_kind == "double_gyre" && !gyre) throw InvalidArgument("double_gyre flow needs gyre parameters");
        if (flow_kind == "highway" && !highway) throw InvalidArgument("highway flow needs highway parameters");
        if (flow_kind == "uniform" && !uniform) throw InvalidArgument("uniform flow needs a velocity");
        if (t_last + horizon > t0 + span + 1e-6) throw InvalidArgument("missions run past the scenario span");
        for (const auto& s : starts) {
            if (!fine_grid().contains(s.p)) throw InvalidArgument("mission start outside the domain");
            if (s.t < t0 || s.t + horizon > t0 + span + 1e-6) throw InvalidArgument("fixed mission runs past the scenario span");
        }
    }
};

namespace detail {

template <class T>
T cfg_get(const nlohmann::json& obj, const std::string& path, const char* key, T fallback) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw FormatError(path + "." + key, "wrong type");
    }
}

inline const nlohmann::json& cfg_section(const nlohmann::json& root, const char* key) {
    static const nlohmann::json empty = nlohmann::json::object();
    auto it = root.find(key);
    if (it == root.end()) return empty;
    if (!it->is_object()) throw FormatError(key, "expected an object");
    return *it;
}

}  // namespace detail

inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
    using detail::cfg_get;
    using detail::cfg_section;
    if (!j.is_object()) throw FormatError("scenario", "expected a JSON object");
    const int version = cfg_get<int>(j, "", "schema_version", kScenarioSchemaVersion);
    if (version != kScenarioSchemaVersion) throw FormatError("schema_version", "unsupported version");

    ScenarioConfig c;
    c.seed = cfg_get<std::uint64_t>(j, "", "seed", c.seed);

    const auto& dom = cfg_section(j, "domain");
    c.x_min = cfg_get(dom, "domain", "x_min", c.x_min);
    c.x_max = cfg_get(dom, "domain", "x_max", c.x_max);
    c.y_min = cfg_get(dom, "domain", "y_min", c.y_min);
    c.y_max = cfg_get(dom, "domain", "y_max", c.y_max);

    const auto& fine = cfg_section(j, "fine_grid");
    c.fine_nx = cfg_get<std::size_t>(fine, "fine_grid", "nx", c.fine_nx);
    c.fine_ny = cfg_get<std::size_t>(fine, "fine_grid", "ny", c.fine_ny);
    const auto& coarse = cfg_section(j, "coarse_grid");
    c.coarse_nx = cfg_get<std::size_t>(coarse, "coarse_grid", "nx", c.coarse_nx);
    c.coarse_ny = cfg_get<std::size_t>(coarse, "coarse_grid", "ny", c.coarse_ny);

    const auto& time = cfg_section(j, "time");
    c.t0 = cfg_get(time, "time", "t0", c.t0);
    c.span = cfg_get(time, "time", "span", c.span);
    c.dt = cfg_get(time, "time", "dt", c.dt);

    const auto& flow = cfg_section(j, "flow");
    c.flow_kind = cfg_get<std::string>(flow, "flow", "kind", c.flow_kind);
    c.gyre.reset();
    if (auto it = flow.find("double_gyre"); it != flow.end()) {
        DoubleGyre g = *ScenarioConfig{}.gyre;
        g.amplitude = cfg_get(*it, "flow.double_gyre", "amplitude", g.amplitude);
        g.eps = cfg_get(*it, "flow.double_gyre", "eps", g.eps);
        g.omega = cfg_get(*it, "flow.double_gyre", "omega", g.omega);
        c.gyre = g;
    } else if (c.flow_kind == "double_gyre") {
        c.gyre = ScenarioConfig{}.gyre;
    }
    if (auto it = flow.find("highway"); it != flow.end()) {
        Highway h;
        h.speed = cfg_get(*it, "flow.highway", "speed", 0.0);
        h.y_center = cfg_get(*it, "flow.highway", "y_center", 0.5 * (c.y_min + c.y_max));
        h.half_width = cfg_get(*it, "flow.highway", "half_width", 0.1 * (c.y_max - c.y_min));
        h.x_begin = cfg_get(*it, "flow.highway", "x_begin", c.x_min);
        h.x_end = cfg_get(*it, "flow.highway", "x_end", c.x_max);
        h.taper = cfg_get(*it, "flow.highway", "taper", 0.0);
        c.highway = h;
    }
    if (auto it = flow.find("uniform"); it != flow.end()) {
        c.uniform = Vec2{cfg_get(*it, "flow.uniform", "u", 0.0), cfg_get(*it, "flow.uniform", "v", 0.0)};
    }

    const auto& gr = cfg_section(j, "growth");
    c.growth.background = per_day(cfg_get(gr, "growth", "background_per_day", 0.0));
    c.growth.resp_rate = per_day(cfg_get(gr, "growth", "resp_per_day", 0.0));
    c.growth.diurnal = cfg_get(gr, "growth", "diurnal", false);
    c.growth.day_length = cfg_get(gr, "growth", "day_length", kSecondsPerDay);
    c.growth.light_fraction = cfg_get(gr, "growth", "light_fraction", 1.0);
    if (auto it = gr.find("drift"); it != gr.end()) {
        c.growth.drift = {cfg_get(*it, "growth.drift", "x", 0.0), cfg_get(*it, "growth.drift", "y", 0.0)};
    }
    if (auto it = gr.find("blobs"); it != gr.end()) {
        if (!it->is_array()) throw FormatError("growth.blobs", "expected an array");
        for (const auto& b : *it) {
            GrowthBlob blob;
            blob.center = {cfg_get(b, "growth.blobs[]", "x", 0.0), cfg_get(b, "growth.blobs[]", "y", 0.0)};
            blob.radius = cfg_get(b, "growth.blobs[]", "radius", 1.0);
            blob.peak = per_day(cfg_get(b, "growth.blobs[]", "peak_per_day", 0.0));
            c.growth.blobs.push_back(blob);
        }
    }

    const auto& fc = cfg_section(j, "forecast");
    c.error.sigma0 = cfg_get(fc, "forecast", "sigma0", c.error.sigma0);
    c.error.growth_per_day = cfg_get(fc, "forecast", "growth_per_day", c.error.growth_per_day);
    c.error.corr_len = cfg_get(fc, "forecast", "corr_len", c.error.corr_len);
    c.refresh_interval = cfg_get(fc, "forecast", "refresh_interval", c.refresh_interval);
    c.forecast_length = cfg_get(fc, "forecast", "forecast_length", c.forecast_length);

    const auto& avg = cfg_section(j, "average");
    c.avg_window = cfg_get(avg, "average", "window", c.avg_window);
    c.avg_bias.scale = cfg_get(avg, "average", "bias_scale", 1.0);
    c.avg_bias.rotation = cfg_get(avg, "average", "bias_rotation", 0.0);

    const auto& mi = cfg_section(j, "missions");
    c.n_missions = cfg_get<std::size_t>(mi, "missions", "n", c.n_missions);
    c.min_border_dist = cfg_get(mi, "missions", "min_border_dist", c.min_border_dist);
    c.t_first = cfg_get(mi, "missions", "t_first", c.t_first);
    c.t_last = cfg_get(mi, "missions", "t_last", c.t_last);
    c.horizon = cfg_get(mi, "missions", "horizon", c.horizon);
    c.m0 = cfg_get(mi, "missions", "m0", c.m0);
    c.u_max = cfg_get(mi, "missions", "u_max", c.u_max);
    if (auto it = mi.find("starts"); it != mi.end()) {
        if (!it->is_array()) throw FormatError("missions.starts", "expected an array");
        for (const auto& e : *it) {
            try {
                c.starts.push_back({e.value("t0", c.t_first), {e.at("x").get<double>(), e.at("y").get<double>()}});
            } catch (const nlohmann::json::exception&) {
                throw FormatError("missions.starts", "each start needs numeric x and y");
            }
        }
    }

    const auto& sim = cfg_section(j, "sim");
    c.sim_step = cfg_get(sim, "sim", "sim_step", c.sim_step);
    c.output_cadence = cfg_get(sim, "sim", "output_cadence", c.output_cadence);
    c.cfl = cfg_get(sim, "sim", "cfl", c.cfl);
    const auto integ = cfg_get<std::string>(sim, "sim", "integrator", "euler");
    if (integ == "euler") {
        c.integrator = TimeIntegrator::Euler;
    } else if (integ == "rk2") {
        c.integrator = TimeIntegrator::Rk2;
    } else {
        throw FormatError("sim.integrator", "expected 'euler' or 'rk2'");
    }
    c.validate();
    return c;
}

inline nlohmann::ordered_json scenario_to_json(const ScenarioConfig& c) {
    nlohmann::ordered_json j;
    j["schema_version"] = kScenarioSchemaVersion;
    j["seed"] = c.seed;
    j["domain"] = {{"x_min", c.x_min}, {"x_max", c.x_max}, {"y_min", c.y_min}, {"y_max", c.y_max}};
    j["fine_grid"] = {{"nx", c.fine_nx}, {"ny", c.fine_ny}};
    j["coarse_grid"] = {{"nx", c.coarse_nx}, {"ny", c.coarse_ny}};
    j["time"] = {{"t0", c.t0}, {"span", c.span}, {"dt", c.dt}};
    nlohmann::ordered_json flow;
    flow["kind"] = c.flow_kind;
    if (c.gyre) flow["double_gyre"] = {{"amplitude", c.gyre->amplitude}, {"eps", c.gyre->eps}, {"omega", c.gyre->omega}};
    if (c.highway) {
        flow["highway"] = {{"speed", c.highway->speed},         {"y_center", c.highway->y_center},
                           {"half_width", c.highway->half_width}, {"x_begin", c.highway->x_begin},
                           {"x_end", c.highway->x_end},         {"taper", c.highway->taper}};
    }
    if (c.uniform) flow["uniform"] = {{"u", c.uniform->x}, {"v", c.uniform->y}};
    j["flow"] = flow;
    nlohmann::ordered_json gr;
    gr["background_per_day"] = c.growth.background * kSecondsPerDay;
    gr["resp_per_day"] = c.growth.resp_rate * kSecondsPerDay;
    gr["diurnal"] = c.growth.diurnal;
    gr["day_length"] = c.growth.day_length;
    gr["light_fraction"] = c.growth.light_fraction;
    gr["drift"] = {{"x", c.growth.drift.x}, {"y", c.growth.drift.y}};
    gr["blobs"] = nlohmann::ordered_json::array();
    for (const auto& b : c.growth.blobs) {
        gr["blobs"].push_back({{"x", b.center.x},
                               {"y", b.center.y},
                               {"radius", b.radius},
                               {"peak_per_day", b.peak * kSecondsPerDay}});
    }
    j["growth"] = gr;
    j["forecast"] = {{"sigma0", c.error.sigma0},
                     {"growth_per_day", c.error.growth_per_day},
                     {"corr_len", c.error.corr_len},
                     {"refresh_interval", c.refresh_interval},
                     {"forecast_length", c.forecast_length}};
    j["average"] = {{"window", c.avg_window}, {"bias_scale", c.avg_bias.scale}, {"bias_rotation", c.avg_bias.rotation}};
    j["missions"] = {{"n", c.n_missions},         {"min_border_dist", c.min_border_dist},
                     {"t_first", c.t_first},      {"t_last", c.t_last},
                     {"horizon", c.horizon},      {"m0", c.m0},
                     {"u_max", c.u_max}};
    if (!c.starts.empty()) {
        auto& arr = j["missions"]["starts"] = nlohmann::ordered_json::array();
        for (const auto& s : c.starts) arr.push_back({{"x", s.p.x}, {"y", s.p.y}, {"t0", s.t}});
    }
    j["sim"] = {{"sim_step", c.sim_step},
                {"output_cadence", c.output_cadence},
                {"cfl", c.cfl},
                {"integrator", c.integrator == TimeIntegrator::Euler ? "euler" : "rk2"}};
    return j;
}

/// Materialised scenario. Owns every field a SimulationContext points into, so it
/// must outlive contexts made from it and must not be moved while they are in use.
struct Scenario {
    ScenarioConfig config;
    FlowField truth;
    FlowField avg;
    GrowthModel growth;
    std::vector<Mission> missions;

    SimulationContext context() const {
        SimulationContext ctx;
        ctx.truth = &truth;
        ctx.avg = &avg;
        ctx.growth = &growth;
        ctx.provider.truth = &truth;
        ctx.provider.error = config.error;
        ctx.provider.refresh_interval = config.refresh_interval;
        ctx.provider.forecast_length = config.forecast_length;
        ctx.provider.seed = splitmix64(config.seed + 0x5EEDULL);
        ctx.sim_step = config.sim_step;
        ctx.output_cadence = config.output_cadence;
        ctx.cfl = config.cfl;
        ctx.integrator = config.integrator;
        return ctx;
    }
};

/// Gyre geometry always follows the domain: [x_min, x_min + 2L] x [y_min, y_max], L = y_max - y_min.
inline FlowField make_truth_flow(const ScenarioConfig& c) {
    const SpatialGrid g = c.fine_grid();
    const TimeAxis t = c.time_axis();
    const bool composite = c.flow_kind == "composite";
    std::optional<DoubleGyre> gyre = c.gyre;
    if (gyre) {
        gyre->x0 = c.x_min;
        gyre->y0 = c.y_min;
        gyre->length = c.y_max - c.y_min;
    }
    return FlowField::from_function(g, t, [&](double x, double y, double time) {
        Vec2 v{};
        if ((composite || c.flow_kind == "double_gyre") && gyre) v += (*gyre)(x, y, time);
        if ((composite || c.flow_kind == "highway") && c.highway) v += (*c.highway)(x, y, time);
        if ((composite || c.flow_kind == "uniform") && c.uniform) v += *c.uniform;
        return v;
    });
}

inline MissionSampling mission_sampling(const ScenarioConfig& c) {
    MissionSampling s;
    s.x_min = c.x_min;
    s.x_max = c.x_max;
    s.y_min = c.y_min;
    s.y_max = c.y_max;
    s.min_border_dist = c.min_border_dist;
    s.t_first = c.t_first;
    s.t_last = c.t_last;
    s.horizon = c.horizon;
    s.m0 = c.m0;
    s.u_max = c.u_max;
    return s;
}

inline Scenario build_scenario(const ScenarioConfig& c) {
    c.validate();
    FlowField truth = make_truth_flow(c);
    const double window = std::min(c.avg_window, c.span);
    FlowField avg = monthly_average(truth, window, c.coarse_grid(), c.avg_bias);
    GrowthModel growth = growth_blobs(c.growth, c.fine_grid(), c.time_axis());
    std::vector<Mission> missions;
    if (c.starts.empty()) {
        missions = sample_missions(mission_sampling(c), c.n_missions, c.seed);
    } else {
        for (std::size_t k = 0; k < c.starts.size(); ++k) {
            missions.push_back({k, c.starts[k].p, c.starts[k].t, c.horizon, c.m0, c.u_max});
        }
    }
    return Scenario{c, std::move(truth), std::move(avg), std::move(growth), std::move(missions)};
}

inline nlohmann::ordered_json missions_to_json(const std::vector<Mission>& ms) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& m : ms) {
        arr.push_back({{"id", m.id},
                       {"x", m.x0.x},
                       {"y", m.x0.y},
                       {"t0", m.t0},
                       {"horizon", m.horizon},
                       {"m0", m.m0},
                       {"u_max", m.u_max}});
    }
    return arr;
}

inline std::vector<Mission> missions_from_json(const nlohmann::json& arr) {
    if (!arr.is_array()) throw FormatError("missions", "expected an array");
    std::vector<Mission> out;
    for (const auto& e : arr) {
        try {
            Mission m;
            m.id = e.at("id").get<std::uint64_t>();
            m.x0 = {e.at("x").get<double>(), e.at("y").get<double>()};
            m.t0 = e.at("t0").get<double>();
            m.horizon = e.at("horizon").get<double>();
            m.m0 = e.at("m0").get<double>();
            m.u_max = e.at("u_max").get<double>();
            out.push_back(m);
        } catch (const nlohmann::json::exception& ex) {
            throw FormatError("missions[]", ex.what());
        }
    }
    return out;
}

namespace detail {

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError(path.string(), "cannot open");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path.string(), e.what());
    }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError(path.string(), "cannot open for writing");
    out << text;
}

}  // namespace detail

inline ScenarioConfig read_scenario_config(const std::filesystem::path& path) {
    return scenario_from_json(detail::read_json_file(path));
}

inline void save_scenario(const Scenario& s, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    detail::write_text_file(dir / "scenario.json", scenario_to_json(s.config).dump(2) + "\n");
    write_field(s.truth, dir / "truth.field");
    write_field(s.avg, dir / "avg.field");
    write_field(s.growth.gross(), dir / "growth.field");
    detail::write_text_file(dir / "missions.json", missions_to_json(s.missions).dump(2) + "\n");
}

inline Scenario load_scenario(const std::filesystem::path& dir) {
    ScenarioConfig c = read_scenario_config(dir / "scenario.json");
    FlowField truth = read_flow_field(dir / "truth.field");
    FlowField avg = read_flow_field(dir / "avg.field");
    ScalarField gross = read_scalar_field(dir / "growth.field");
    GrowthModel growth(std::move(gross), c.growth.resp_rate, c.growth.diurnal, c.growth.day_length,
                       c.growth.light_fraction);
    std::vector<Mission> missions = missions_from_json(detail::read_json_file(dir / "missions.json"));
    return Scenario{std::move(c), std::move(truth), std::move(avg), std::move(growth), std::move(missions)};
}

}  // namespace seafarm
