// seafarm: scenario generation, value-function solves and mission experiments.
//
// Every command exits 0 on success. Failures print a single line
//   error: <kind>: <message>
// on stderr and exit non-zero (2 usage, 3 bad input, 4 runtime failure).

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "seafarm/seafarm.hpp"

namespace fs = std::filesystem;
using namespace seafarm;

namespace {

struct CliError {
    int code;
    std::string kind;
    std::string message;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(path.string(), "cannot open for writing");
    out << text;
}

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError(path.string(), "cannot open");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path.string(), e.what());
    }
}

TimeIntegrator parse_integrator(const std::string& s) {
    if (s == "euler") return TimeIntegrator::Euler;
    if (s == "rk2") return TimeIntegrator::Rk2;
    throw InvalidArgument("integrator must be 'euler' or 'rk2'");
}

// ---------------------------------------------------------------- gen-scenario

struct GenArgs {
    std::string config;
    std::string out;
};

int cmd_gen(const GenArgs& a) {
    const ScenarioConfig cfg = read_scenario_config(a.config);
    const Scenario s = build_scenario(cfg);
    save_scenario(s, a.out);
    nlohmann::ordered_json summary;
    summary["out"] = a.out;
    summary["missions"] = s.missions.size();
    summary["fine_grid"] = {s.truth.grid().nx(), s.truth.grid().ny()};
    summary["coarse_grid"] = {s.avg.grid().nx(), s.avg.grid().ny()};
    summary["slices"] = s.truth.time().nt();
    std::cout << summary.dump() << '\n';
    return 0;
}

// ----------------------------------------------------------------------- solve

struct SolveArgs {
    std::string flow;
    std::string growth;
    std::string terminal;
    std::optional<double> tau;
    double umax{0.0};
    double t0{0.0};
    double T{0.0};
    std::string out;
    double cfl{0.5};
    double cadence{3600.0};
    std::string integrator{"euler"};
};

int cmd_solve(const SolveArgs& a) {
    const FlowField flow = read_flow_field(a.flow);
    const ScalarField growth = read_scalar_field(a.growth);
    SolveConfig cfg;
    cfg.u_max = a.umax;
    cfg.tau = a.tau;
    cfg.cfl = a.cfl;
    cfg.integrator = parse_integrator(a.integrator);

    const SpatialGrid& grid = flow.grid();
    ScalarField terminal = ScalarField::constant(grid, TimeAxis::build(a.T, 1.0, 1), 0.0);
    if (!a.terminal.empty()) {
        const ScalarField src = read_scalar_field(a.terminal);
        if (!src.grid().covers(grid)) throw InvalidArgument("terminal field does not cover the flow grid");
        const double ts = std::clamp(a.T, src.time().t0(), src.time().t_end());
        terminal = ScalarField::from_function(grid, TimeAxis::build(a.T, 1.0, 1),
                                              [&](double x, double y, double) { return src.sample({x, y}, ts); });
    }
    const ValueFunction vf = solve_backward(flow, growth, terminal, a.t0, a.T, cfg,
                                            TimeAxis::covering(a.t0, a.T, a.cadence));
    write_value_function(vf, a.out);

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    const auto start = vf.slices().slice(0);
    for (std::size_t j = 1; j + 1 < grid.ny(); ++j) {
        for (std::size_t i = 1; i + 1 < grid.nx(); ++i) {
            lo = std::min(lo, start[j * grid.nx() + i]);
            hi = std::max(hi, start[j * grid.nx() + i]);
        }
    }
    nlohmann::ordered_json summary;
    summary["out"] = a.out;
    summary["slices"] = vf.time().nt();
    summary["start_interior_min"] = lo;
    summary["start_interior_max"] = hi;
    std::cout << summary.dump() << '\n';
    return 0;
}

// ------------------------------------------------------------------------- run

struct RunArgs {
    std::string scenario;
    std::string controller;
    std::string name;
    std::uint64_t mission{0};
    std::string out;
};

int cmd_run(const RunArgs& a) {
    const Scenario s = load_scenario(a.scenario);
    const auto specs = controllers_from_json(read_json(a.controller));
    const ControllerSpec* spec = nullptr;
    if (!a.name.empty()) {
        for (const auto& c : specs) {
            if (c.label() == a.name) spec = &c;
        }
        if (spec == nullptr) throw InvalidArgument("no controller named '" + a.name + "'");
    } else if (specs.size() == 1) {
        spec = &specs.front();
    } else {
        throw InvalidArgument("controller file holds several specs; pick one with --name");
    }
    const auto it = std::find_if(s.missions.begin(), s.missions.end(), [&](const Mission& m) { return m.id == a.mission; });
    if (it == s.missions.end()) throw InvalidArgument("no mission with id " + std::to_string(a.mission));

    const MissionResult r = run_mission(*it, *spec, s.context());
    fs::create_directories(a.out);
    write_text(fs::path(a.out) / "result.json", result_to_json(r).dump(2) + "\n");
    write_text(fs::path(a.out) / "trajectory.csv", trajectory_csv(r));
    std::cout << result_to_json(r).dump() << '\n';
    return 0;
}

// ----------------------------------------------------------------------- batch

struct BatchArgs {
    std::string scenario;
    std::string controllers;
    std::string out;
    std::size_t jobs{1};
    std::string baseline;
};

int cmd_batch(const BatchArgs& a) {
    const Scenario s = load_scenario(a.scenario);
    const auto specs = controllers_from_json(read_json(a.controllers));
    BatchOptions opts;
    opts.jobs = a.jobs;
    opts.baseline = a.baseline;
    const BatchOutcome outcome = run_batch(s.context(), specs, s.missions, opts);

    const fs::path dir(a.out);
    fs::create_directories(dir);
    write_text(dir / "report.json", report_to_json(outcome.report).dump(2) + "\n");
    std::string lines;
    for (const auto& r : outcome.results) lines += result_to_json(r).dump() + "\n";
    write_text(dir / "results.jsonl", lines);
    write_text(dir / "rows.csv", rows_csv(outcome.report));
    write_text(dir / "aggregates.csv", aggregates_csv(outcome.report));
    std::cout << aggregates_csv(outcome.report);
    return 0;
}

// --------------------------------------------------------------------- compare

struct CompareArgs {
    std::vector<std::string> reports;
    std::string baseline;
    std::string out;
};

std::string relative_table(const BatchReport& rep) {
    std::string out = "mission_id";
    for (const auto& c : rep.controllers) out += "," + c;
    out += "\n";
    std::uint64_t current = 0;
    bool open = false;
    std::vector<std::string> cells;
    auto flush = [&] {
        if (!open) return;
        out += std::to_string(current);
        for (const auto& c : cells) out += "," + c;
        out += "\n";
    };
    for (const auto& r : rep.rows) {
        if (!open || r.mission_id != current) {
            flush();
            current = r.mission_id;
            cells.assign(rep.controllers.size(), "");
            open = true;
        }
        const auto k = static_cast<std::size_t>(
            std::find(rep.controllers.begin(), rep.controllers.end(), r.controller) - rep.controllers.begin());
        if (k < cells.size() && r.relative_growth) cells[k] = nlohmann::json(*r.relative_growth).dump();
    }
    flush();
    return out;
}

int cmd_compare(const CompareArgs& a) {
    std::vector<BatchReport> reports;
    for (const auto& p : a.reports) reports.push_back(report_from_json(read_json(p)));
    const BatchReport merged = compare_reports(reports, a.baseline);
    const std::string table = relative_table(merged);
    if (!a.out.empty()) {
        const fs::path dir(a.out);
        fs::create_directories(dir);
        write_text(dir / "report.json", report_to_json(merged).dump(2) + "\n");
        write_text(dir / "relative_growth.csv", table);
        write_text(dir / "aggregates.csv", aggregates_csv(merged));
    }
    std::cout << table;
    return 0;
}

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Growth-optimal control of drifting seaweed farms"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* g = app.add_subcommand("gen-scenario", "Materialise truth, average and growth fields plus missions");
    g->add_option("--config", gen.config, "Scenario JSON")->required();
    g->add_option("--out", gen.out, "Output directory")->required();

    SolveArgs sol;
    auto* s = app.add_subcommand("solve", "One backward value-function solve");
    s->add_option("--flow", sol.flow, "Vector field file")->required();
    s->add_option("--growth", sol.growth, "Scalar running-reward field file (1/s)")->required();
    s->add_option("--terminal", sol.terminal, "Scalar terminal reward field file");
    s->add_option("--tau", sol.tau, "Discount time constant (s)");
    s->add_option("--umax", sol.umax, "Actuation bound")->required();
    s->add_option("--t0", sol.t0, "Start time (s)")->required();
    s->add_option("--T", sol.T, "Final time (s)")->required();
    s->add_option("--out", sol.out, "Value function output file")->required();
    s->add_option("--cfl", sol.cfl, "Courant number")->capture_default_str();
    s->add_option("--cadence", sol.cadence, "Stored slice spacing (s)")->capture_default_str();
    s->add_option("--integrator", sol.integrator, "euler or rk2")->capture_default_str();

    RunArgs run;
    auto* r = app.add_subcommand("run", "One closed-loop mission");
    r->add_option("--scenario", run.scenario, "Scenario directory")->required();
    r->add_option("--controller", run.controller, "Controller spec JSON")->required();
    r->add_option("--name", run.name, "Controller label when the file holds several");
    r->add_option("--mission", run.mission, "Mission id")->required();
    r->add_option("--out", run.out, "Output directory")->required();

    BatchArgs bat;
    auto* b = app.add_subcommand("batch", "Every mission against every controller");
    b->add_option("--scenario", bat.scenario, "Scenario directory")->required();
    b->add_option("--controllers", bat.controllers, "Controller spec JSON")->required();
    b->add_option("--out", bat.out, "Output directory")->required();
    b->add_option("--jobs", bat.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    b->add_option("--baseline", bat.baseline, "Baseline controller label (default: first)");

    CompareArgs cmp;
    auto* c = app.add_subcommand("compare", "Relative-growth tables across reports");
    c->add_option("--reports", cmp.reports, "Batch report JSON files")->required()->expected(1, -1);
    c->add_option("--baseline", cmp.baseline, "Baseline controller label")->required();
    c->add_option("--out", cmp.out, "Optional output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: usage: " << one_line(e.what()) << '\n';
        return 2;
    }

    try {
        if (*g) return cmd_gen(gen);
        if (*s) return cmd_solve(sol);
        if (*r) return cmd_run(run);
        if (*b) return cmd_batch(bat);
        if (*c) return cmd_compare(cmp);
    } catch (const FormatError& e) {
        std::cerr << "error: format: " << one_line(e.what()) << '\n';
        return 3;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: invalid-argument: " << one_line(e.what()) << '\n';
        return 3;
    } catch (const OutOfDomain& e) {
        std::cerr << "error: out-of-domain: " << one_line(e.what()) << '\n';
        return 3;
    } catch (const SolverDiverged& e) {
        std::cerr << "error: solver-diverged: " << one_line(e.what()) << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: runtime: " << one_line(e.what()) << '\n';
        return 4;
    }
    return 2;
}
