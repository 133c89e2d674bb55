#pragma once

// Batch experiments and per-mission normalised metrics.
//
// Relative growth compares final masses within one mission: 100 * m(result) / m(baseline).
// Aggregates are reported twice: over the admissible intersection (missions every
// controller completed without leaving the domain) and over all missions.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "seafarm/errors.hpp"
#include "seafarm/mission.hpp"
#include "seafarm/simulation.hpp"

namespace seafarm {

inline constexpr int kReportSchemaVersion = 1;

inline double relative_growth(const MissionResult& result, const MissionResult& baseline) {
    if (result.mission_id != baseline.mission_id) {
        throw InvalidArgument("relative growth needs results of the same mission");
    }
    if (!(baseline.final_mass > 0.0)) {
        throw InvalidArgument("baseline final mass must be positive");
    }
    return 100.0 * result.final_mass / baseline.final_mass;
}

struct BatchRow {
    std::uint64_t mission_id{0};
    std::string controller;
    double final_mass{0.0};
    Termination termination{Termination::Completed};
    std::optional<double> relative_growth{};  ///< percent of the baseline's final mass
    std::string diagnostic;
};

struct ControllerAggregate {
    std::string controller;
    std::size_t n{0};
    double mean_final_mass{0.0};
    double std_final_mass{0.0};  ///< sample standard deviation (n - 1)
    double mean_relative_growth{0.0};
};

struct BatchReport {
    std::string baseline;
    std::vector<std::string> controllers;  ///< in spec order
    std::vector<BatchRow> rows;            ///< mission-major, then controller order
    std::vector<std::uint64_t> admissible;
    std::vector<ControllerAggregate> aggregates_admissible;
    std::vector<ControllerAggregate> aggregates_all;

    const ControllerAggregate* aggregate(const std::string& controller, bool admissible_only = true) const {
        const auto& v = admissible_only ? aggregates_admissible : aggregates_all;
        for (const auto& a : v) {
            if (a.controller == controller) return &a;
        }
        return nullptr;
    }
};

inline std::vector<ControllerAggregate> aggregate_rows(const std::vector<BatchRow>& rows,
                                                       const std::vector<std::string>& controllers,
                                                       const std::set<std::uint64_t>* only) {
    std::vector<ControllerAggregate> out;
    for (const auto& name : controllers) {
        ControllerAggregate a;
        a.controller = name;
        double sum = 0.0;
        double sum_rel = 0.0;
        std::size_t n_rel = 0;
        std::vector<double> masses;
        for (const auto& r : rows) {
            if (r.controller != name) continue;
            if (only && !only->contains(r.mission_id)) continue;
            masses.push_back(r.final_mass);
            sum += r.final_mass;
            if (r.relative_growth) {
                sum_rel += *r.relative_growth;
                ++n_rel;
            }
        }
        a.n = masses.size();
        if (a.n > 0) {
            a.mean_final_mass = sum / static_cast<double>(a.n);
            if (a.n > 1) {
                double ss = 0.0;
                for (double m : masses) ss += (m - a.mean_final_mass) * (m - a.mean_final_mass);
                a.std_final_mass = std::sqrt(ss / static_cast<double>(a.n - 1));
            }
        }
        a.mean_relative_growth = n_rel > 0 ? sum_rel / static_cast<double>(n_rel) : 0.0;
        out.push_back(a);
    }
    return out;
}

/// Fills relative growth, the admissible set and both aggregate tables from raw rows.
inline BatchReport assemble_report(std::vector<BatchRow> rows, std::vector<std::string> controllers,
                                   const std::string& baseline) {
    if (std::find(controllers.begin(), controllers.end(), baseline) == controllers.end()) {
        throw InvalidArgument("baseline controller '" + baseline + "' is not part of the batch");
    }
    std::map<std::uint64_t, double> base_mass;
    std::map<std::uint64_t, bool> ok;
    for (const auto& r : rows) {
        if (r.controller == baseline) base_mass[r.mission_id] = r.final_mass;
        auto [it, inserted] = ok.try_emplace(r.mission_id, true);
        it->second = it->second && r.termination == Termination::Completed;
    }
    for (auto& r : rows) {
        auto it = base_mass.find(r.mission_id);
        if (it != base_mass.end() && it->second > 0.0) {
            r.relative_growth = 100.0 * r.final_mass / it->second;
        } else {
            r.relative_growth.reset();
        }
    }
    // A mission is admissible only if every controller has a completed row for it.
    std::map<std::uint64_t, std::size_t> count;
    for (const auto& r : rows) ++count[r.mission_id];
    BatchReport rep;
    rep.baseline = baseline;
    std::set<std::uint64_t> admissible;
    for (const auto& [id, good] : ok) {
        if (good && count[id] == controllers.size()) admissible.insert(id);
    }
    rep.admissible.assign(admissible.begin(), admissible.end());
    rep.aggregates_admissible = aggregate_rows(rows, controllers, &admissible);
    rep.aggregates_all = aggregate_rows(rows, controllers, nullptr);
    rep.controllers = std::move(controllers);
    rep.rows = std::move(rows);
    return rep;
}

struct BatchOptions {
    std::size_t jobs{1};
    std::string baseline;  ///< controller label; empty means the first spec
};

struct BatchOutcome {
    BatchReport report;
    std::vector<MissionResult> results;  ///< mission-major, then spec order
};

/// Runs every (mission, controller) pair on a bounded worker pool. Failures are
/// recorded per row and never abort the batch.
inline BatchOutcome run_batch(const SimulationContext& ctx, const std::vector<ControllerSpec>& specs,
                              const std::vector<Mission>& missions, const BatchOptions& opts = {}) {
    if (specs.empty()) throw InvalidArgument("batch needs at least one controller");
    std::vector<std::string> names;
    for (const auto& s : specs) {
        s.validate();
        if (std::find(names.begin(), names.end(), s.label()) != names.end()) {
            throw InvalidArgument("duplicate controller label '" + s.label() + "'");
        }
        names.push_back(s.label());
    }
    const std::string baseline = opts.baseline.empty() ? names.front() : opts.baseline;
    if (std::find(names.begin(), names.end(), baseline) == names.end()) {
        throw InvalidArgument("baseline controller '" + baseline + "' is not part of the batch");
    }

    const std::size_t total = missions.size() * specs.size();
    std::vector<MissionResult> results(total);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t n = next++; n < total; n = next++) {
            const Mission& m = missions[n / specs.size()];
            const ControllerSpec& s = specs[n % specs.size()];
            try {
                results[n] = run_mission(m, s, ctx);
            } catch (const std::exception& e) {
                MissionResult r;
                r.mission_id = m.id;
                r.controller = s.label();
                r.final_mass = m.m0;
                r.mass_trace = {m.m0};
                r.trajectory = {{m.t0, m.x0}};
                r.termination = Termination::Failed;
                r.diagnostic = e.what();
                results[n] = std::move(r);
            }
        }
    };
    const std::size_t jobs = std::max<std::size_t>(1, std::min(opts.jobs, total));
    if (jobs == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(jobs);
        for (std::size_t w = 0; w < jobs; ++w) pool.emplace_back(work);
    }

    std::vector<BatchRow> rows;
    rows.reserve(total);
    for (const auto& r : results) {
        rows.push_back({r.mission_id, r.controller, r.final_mass, r.termination, std::nullopt, r.diagnostic});
    }
    return {assemble_report(std::move(rows), names, baseline), std::move(results)};
}

// ------------------------------------------------------------ serialization

inline Termination termination_from_string(const std::string& s) {
    for (auto t : {Termination::Completed, Termination::ExitedDomain, Termination::Failed}) {
        if (to_string(t) == s) return t;
    }
    throw FormatError("termination", "unknown value '" + s + "'");
}

inline nlohmann::ordered_json aggregate_to_json(const ControllerAggregate& a) {
    return {{"controller", a.controller},
            {"n", a.n},
            {"mean_final_mass", a.mean_final_mass},
            {"std_final_mass", a.std_final_mass},
            {"mean_relative_growth", a.mean_relative_growth}};
}

inline nlohmann::ordered_json report_to_json(const BatchReport& rep) {
    nlohmann::ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    j["baseline"] = rep.baseline;
    j["controllers"] = rep.controllers;
    j["admissible"] = rep.admissible;
    j["aggregates"]["admissible"] = nlohmann::ordered_json::array();
    for (const auto& a : rep.aggregates_admissible) j["aggregates"]["admissible"].push_back(aggregate_to_json(a));
    j["aggregates"]["all"] = nlohmann::ordered_json::array();
    for (const auto& a : rep.aggregates_all) j["aggregates"]["all"].push_back(aggregate_to_json(a));
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rep.rows) {
        nlohmann::ordered_json row;
        row["mission_id"] = r.mission_id;
        row["controller"] = r.controller;
        row["final_mass"] = r.final_mass;
        row["termination"] = to_string(r.termination);
        row["relative_growth"] = r.relative_growth ? nlohmann::ordered_json(*r.relative_growth) : nlohmann::ordered_json(nullptr);
        row["diagnostic"] = r.diagnostic;
        j["rows"].push_back(row);
    }
    return j;
}

/// Parses the rows and controller list of a report; aggregates are recomputed.
inline BatchReport report_from_json(const nlohmann::json& j) {
    try {
        if (j.at("schema_version").get<int>() != kReportSchemaVersion) {
            throw FormatError("schema_version", "unsupported version");
        }
        std::vector<BatchRow> rows;
        for (const auto& r : j.at("rows")) {
            BatchRow row;
            row.mission_id = r.at("mission_id").get<std::uint64_t>();
            row.controller = r.at("controller").get<std::string>();
            row.final_mass = r.at("final_mass").get<double>();
            row.termination = termination_from_string(r.at("termination").get<std::string>());
            row.diagnostic = r.value("diagnostic", "");
            rows.push_back(row);
        }
        return assemble_report(std::move(rows), j.at("controllers").get<std::vector<std::string>>(),
                               j.at("baseline").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("report", e.what());
    }
}

/// Merges several reports (one or more controllers each) and re-normalises
/// against `baseline`. Rows for a (mission, controller) pair seen twice keep the first.
inline BatchReport compare_reports(const std::vector<BatchReport>& reports, const std::string& baseline) {
    std::vector<std::string> names;
    std::vector<BatchRow> rows;
    std::set<std::pair<std::uint64_t, std::string>> seen;
    for (const auto& rep : reports) {
        for (const auto& c : rep.controllers) {
            if (std::find(names.begin(), names.end(), c) == names.end()) names.push_back(c);
        }
        for (const auto& r : rep.rows) {
            if (seen.insert({r.mission_id, r.controller}).second) rows.push_back(r);
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [&](const BatchRow& a, const BatchRow& b) {
        if (a.mission_id != b.mission_id) return a.mission_id < b.mission_id;
        const auto ia = std::find(names.begin(), names.end(), a.controller) - names.begin();
        const auto ib = std::find(names.begin(), names.end(), b.controller) - names.begin();
        return ia < ib;
    });
    return assemble_report(std::move(rows), std::move(names), baseline);
}

inline nlohmann::ordered_json result_to_json(const MissionResult& r, bool include_trace = false) {
    nlohmann::ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    j["mission_id"] = r.mission_id;
    j["controller"] = r.controller;
    j["final_mass"] = r.final_mass;
    j["termination"] = to_string(r.termination);
    j["steps"] = r.controls.size();
    j["t_final"] = r.trajectory.empty() ? 0.0 : r.trajectory.back().t;
    j["x_final"] = r.trajectory.empty() ? 0.0 : r.trajectory.back().p.x;
    j["y_final"] = r.trajectory.empty() ? 0.0 : r.trajectory.back().p.y;
    j["replan_log"] = r.replan_log;
    j["diagnostic"] = r.diagnostic;
    if (include_trace) {
        nlohmann::ordered_json tr = nlohmann::ordered_json::array();
        for (std::size_t n = 0; n < r.trajectory.size(); ++n) {
            tr.push_back({r.trajectory[n].t, r.trajectory[n].p.x, r.trajectory[n].p.y, r.mass_trace[n]});
        }
        j["trajectory"] = tr;
    }
    return j;
}

/// Per-step CSV: t,x,y,ux,uy,mass. The final row has no control and leaves ux,uy empty.
inline std::string trajectory_csv(const MissionResult& r) {
    std::string out = "t,x,y,ux,uy,mass\n";
    auto num = [](double v) { return nlohmann::json(v).dump(); };
    for (std::size_t n = 0; n < r.trajectory.size(); ++n) {
        out += num(r.trajectory[n].t) + "," + num(r.trajectory[n].p.x) + "," + num(r.trajectory[n].p.y) + ",";
        if (n < r.controls.size()) {
            out += num(r.controls[n].u.ux) + "," + num(r.controls[n].u.uy);
        } else {
            out += ",";
        }
        out += "," + num(r.mass_trace[n]) + "\n";
    }
    return out;
}

inline std::string rows_csv(const BatchReport& rep) {
    std::string out = "mission_id,controller,final_mass,termination,relative_growth\n";
    for (const auto& r : rep.rows) {
        out += std::to_string(r.mission_id) + "," + r.controller + "," + nlohmann::json(r.final_mass).dump() + "," +
               std::string(to_string(r.termination)) + "," +
               (r.relative_growth ? nlohmann::json(*r.relative_growth).dump() : std::string()) + "\n";
    }
    return out;
}

inline std::string aggregates_csv(const BatchReport& rep) {
    std::string out = "mode,controller,n,mean_final_mass,std_final_mass,mean_relative_growth\n";
    auto emit = [&](const char* mode, const std::vector<ControllerAggregate>& v) {
        for (const auto& a : v) {
            out += std::string(mode) + "," + a.controller + "," + std::to_string(a.n) + "," +
                   nlohmann::json(a.mean_final_mass).dump() + "," + nlohmann::json(a.std_final_mass).dump() + "," +
                   nlohmann::json(a.mean_relative_growth).dump() + "\n";
        }
    };
    emit("admissible", rep.aggregates_admissible);
    emit("all", rep.aggregates_all);
    return out;
}

// ------------------------------------------------------------ controller specs

inline ControllerSpec controller_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw FormatError("controller", "expected an object");
    ControllerSpec s;
    try {
        s.kind = controller_kind_from_string(j.at("kind").get<std::string>());
        s.name = j.value("name", std::string(to_string(s.kind)));
        if (j.contains("tau") && !j.at("tau").is_null()) s.tau = j.at("tau").get<double>();
        s.planning_horizon = j.value("planning_horizon", 0.0);
        const bool longterm = s.kind == ControllerKind::Longterm || s.kind == ControllerKind::LongtermDiscounted;
        s.uses_avg_currents = j.value("uses_avg_currents", longterm);
        if (j.contains("u_max") && !j.at("u_max").is_null()) s.u_max = j.at("u_max").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("controller", e.what());
    } catch (const InvalidArgument& e) {
        throw FormatError("controller.kind", e.what());
    }
    s.validate();
    return s;
}

/// Accepts a single spec object, an array of specs, or {"controllers": [...]}.
inline std::vector<ControllerSpec> controllers_from_json(const nlohmann::json& j) {
    std::vector<ControllerSpec> out;
    if (j.is_array()) {
        for (const auto& e : j) out.push_back(controller_from_json(e));
    } else if (j.is_object() && j.contains("controllers")) {
        for (const auto& e : j.at("controllers")) out.push_back(controller_from_json(e));
    } else {
        out.push_back(controller_from_json(j));
    }
    return out;
}

}  // namespace seafarm
