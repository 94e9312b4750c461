#include "symper/cli/commands.hpp"

#include "symper/cli/invariant_suite.hpp"
#include "symper/cli/run_config.hpp"
#include "symper/errors.hpp"
#include "symper/perturbation_lab.hpp"
#include "symper/serialization.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <optional>
#include <ostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

namespace symper::cli {

namespace {

constexpr const char* kScanSchema = "symper.scan/1";
constexpr const char* kVerifySchema = "symper.verify/1";

struct Flags {
    std::string config;
    std::string system;
    std::vector<std::string> params;
    std::optional<std::string> u;
    std::optional<std::string> scales;
    std::optional<int> steps;
    std::optional<std::string> method;
    std::optional<std::string> s0_form;
    std::optional<std::string> out_json;
    std::optional<std::string> out_csv;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> grid_x;
    std::optional<std::string> grid_y;
    std::optional<int> jobs;
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "Run configuration file (INI sections)");
    sub->add_option("--system", f.system, "System family: mathieu, coupled-triple or sampled");
    sub->add_option("--param", f.params, "System parameter k=v (repeatable)")->take_all()->allow_extra_args(false);
    sub->add_option("--steps", f.steps, "Integration steps per period");
    sub->add_option("--method", f.method, "Integrator: gauss6, gauss4 or rk4");
    sub->add_option("--s0-form", f.s0_form, "Color form: jw or wj");
    sub->add_option("--out-json", f.out_json, "Write the JSON report here");
    sub->add_option("--out-csv", f.out_csv, "Write CSV data here");
    sub->add_option("--seed", f.seed, "Seed for randomized checks");
}

void add_perturbation(CLI::App* sub, Flags& f) {
    sub->add_option("--u", f.u, "Perturbation vector v1,v2,...");
    sub->add_option("--scales", f.scales, "Scales applied to u, s1,s2,...");
}

RunConfig resolve(const Flags& f) {
    RunConfig c = f.config.empty() ? RunConfig{} : parse_config_file(f.config);
    if (!f.system.empty()) {
        if (f.system != c.family) {
            c.params.clear();
            c.samples_path.clear();
        }
        c.family = f.system;
    }
    for (const auto& p : f.params) {
        apply_param(c, p);
    }
    if (f.u) c.u = parse_list(*f.u, "--u");
    if (f.scales) c.scales = parse_list(*f.scales, "--scales");
    if (f.steps) c.propagation.steps_per_period = *f.steps;
    try {
        if (f.method) c.propagation.method = parse_method(*f.method);
        if (f.s0_form) c.tolerances.s0_form = parse_s0_form(*f.s0_form);
        c.propagation.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    if (f.out_json) c.out_json = *f.out_json;
    if (f.out_csv) c.out_csv = *f.out_csv;
    if (f.seed) c.seed = *f.seed;
    if (f.grid_x) c.scan_x = parse_axis(*f.grid_x, "--grid-x");
    if (f.grid_y) c.scan_y = parse_axis(*f.grid_y, "--grid-y");
    if (f.jobs) c.jobs = *f.jobs;
    if (c.jobs < 0) {
        throw ConfigError("jobs must be >= 0");
    }
    return c;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write '" + path + "'");
    }
    return out;
}

void write_json(const std::string& path, const Json& doc) {
    if (path.empty()) {
        return;
    }
    auto out = open_output(path);
    out << doc.dump(2) << '\n';
}

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            row.push_back(number_to_json(m(i, k)));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Json system_json(const RunConfig& c, const PeriodicCoefficient& system) {
    Json params = Json::object();
    for (const auto& [key, value] : c.params) {
        params[key] = number_to_json(value);
    }
    Json out{{"family", c.family}, {"params", params}};
    if (!c.samples_path.empty()) {
        out["samples"] = c.samples_path;
    }
    out["label"] = system.label();
    out["period"] = number_to_json(system.period());
    out["dimension"] = system.dimension();
    return out;
}

Json propagation_json(const PropagationConfig& p) {
    return Json{{"method", std::string(to_string(p.method))},
                {"steps_per_period", p.steps_per_period},
                {"newton_tolerance", number_to_json(p.newton_tolerance)},
                {"max_newton_iterations", p.max_newton_iterations},
                {"residual_alarm", number_to_json(p.residual_alarm)}};
}

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : std::string("n/a"); }

std::string verdict_word(const StabilityVerdict& v) {
    if (v.strongly_stable) {
        return "strongly stable";
    }
    return v.stable ? "stable, not strongly stable" : "unstable";
}

void print_criterion(std::ostream& out, const char* name, const Criterion& c) {
    out << fmt::format("  {:<16} {:<5} value {:<24} bound {}\n", name, c.pass ? "pass" : "fail",
                       optional_number(c.value), format_number(c.bound));
}

void print_verdict(std::ostream& out, const StabilityVerdict& v) {
    out << fmt::format("delta_kgl    {}\n", optional_number(v.delta_kgl));
    out << fmt::format("delta_s      {}\n", optional_number(v.delta_color));
    out << fmt::format("max_modulus  {}\n", format_number(v.max_modulus));
    out << "criteria\n";
    print_criterion(out, "unit_circle", v.unit_circle);
    print_criterion(out, "semi_simple", v.semi_simple);
    print_criterion(out, "no_mixed_color", v.no_mixed_color);
    print_criterion(out, "color_gap", v.color_gap);
    print_criterion(out, "definiteness", v.definiteness);
    print_criterion(out, "projector", v.projector);
    print_criterion(out, "kgl", v.kgl);
    out << fmt::format("verdict      {}\n", verdict_word(v));
}

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) {
        return text;
    }
    std::string quoted = "\"";
    for (char ch : text) {
        if (ch == '"') {
            quoted += '"';
        }
        quoted += ch == '\n' ? ' ' : ch;
    }
    return quoted + "\"";
}

std::string series_path(const std::string& base, std::size_t index, std::size_t count) {
    if (count == 1) {
        return base;
    }
    const std::filesystem::path p(base);
    const std::filesystem::path name = p.stem().string() + fmt::format("_s{}", index) + p.extension().string();
    return (p.parent_path() / name).string();
}

int cmd_analyze(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const PeriodicCoefficient system = build_system(c);
    const StructureMatrix& j = system.structure();
    const int dim = system.dimension();

    const Trajectory x = propagate(system, c.propagation, system.period(), Matrix::Identity(dim, dim));
    const Monodromy w = monodromy_of(x, j, system.label());
    const auto records = multipliers(w, j, c.tolerances);
    const StabilityVerdict verdict = strong_stability_verdict(w, j, c.tolerances);
    if (w.degraded) {
        err << fmt::format("warning: symplecticity residual {} exceeds the alarm {}\n", format_number(w.residual),
                           format_number(c.propagation.residual_alarm));
    }

    out << fmt::format("system       {}\n", describe_system(c));
    out << fmt::format("period       {}\n", format_number(system.period()));
    out << fmt::format("integrator   {}, {} steps per period\n", to_string(c.propagation.method),
                       c.propagation.steps_per_period);
    out << fmt::format("residual     {}{}\n", format_number(w.residual), w.degraded ? " (degraded)" : "");
    out << fmt::format("trace        {}\n", format_number(w.matrix.trace()));
    out << fmt::format("{:>3}  {:>24} {:>24}  {:>24}  {:<10} {:<10} {:>24} {:>24}\n", "#", "re", "im", "modulus", "kind",
                       "color", "kind_form", "color_form");
    for (std::size_t k = 0; k < records.size(); ++k) {
        const auto& r = records[k];
        out << fmt::format("{:>3}  {:>24} {:>24}  {:>24}  {:<10} {:<10} {:>24} {:>24}\n", k,
                           format_number(r.value.real()), format_number(r.value.imag()), format_number(r.modulus),
                           to_string(r.kind), to_string(r.color), format_number(r.kind_form),
                           format_number(r.color_form));
    }
    print_verdict(out, verdict);

    Json doc{{"schema", kAnalysisSchema},
             {"system", system_json(c, system)},
             {"propagation", propagation_json(c.propagation)},
             {"monodromy",
              Json{{"matrix", matrix_to_json(w.matrix)},
                   {"residual", number_to_json(w.residual)},
                   {"degraded", w.degraded}}},
             {"multipliers", to_json(records)},
             {"verdict", to_json(verdict)}};
    write_json(c.out_json, doc);
    if (!c.out_csv.empty()) {
        auto csv = open_output(c.out_csv);
        write_trajectory_csv(csv, x);
    }
    return verdict.stable ? kExitOk : kExitUnstable;
}

int cmd_perturb(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const PeriodicCoefficient system = build_system(c);
    if (c.u.empty()) {
        throw ConfigError("perturb needs a perturbation vector (--u or [perturbation] u)");
    }
    PerturbationExperiment experiment{system, Eigen::Map<const Vector>(c.u.data(), static_cast<Eigen::Index>(c.u.size())),
                                      c.scales, c.propagation, c.tolerances};
    if (experiment.u.isZero(0.0)) {
        experiment.scales = {1.0};
    }
    try {
        experiment.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }

    const NeighborhoodReport report = neighborhood_scan(experiment);
    const std::vector<PsiSeries> series = psi_series(experiment);

    out << fmt::format("system         {}\n", describe_system(c));
    out << fmt::format("base verdict   {}\n", verdict_word(report.base_verdict));
    out << fmt::format("{:>24} {:>24} {:>24} {:>24} {:>24}  {:<28} {:>24}\n", "scale", "e_norm_max", "rank_one_norm",
                       "psi_max", "max_residual", "verdict", "delta_color");
    bool complete = true;
    for (const auto& row : report.rows) {
        if (!row.ok()) {
            complete = false;
            out << fmt::format("{:>24} error: {}\n", format_number(row.scale), row.error);
            continue;
        }
        out << fmt::format("{:>24} {:>24} {:>24} {:>24} {:>24}  {:<28} {:>24}\n", format_number(row.scale),
                           optional_number(row.e_norm_max), optional_number(row.rank_one_norm),
                           optional_number(row.psi_max), optional_number(row.max_residual),
                           verdict_word(*row.verdict), optional_number(row.verdict->delta_color));
    }
    out << fmt::format("largest stable scale  {}\n", optional_number(report.largest_stable_scale));

    Json doc = to_json(report);
    doc["system"] = system_json(c, system);
    doc["propagation"] = propagation_json(c.propagation);
    Json u = Json::array();
    for (double v : c.u) {
        u.push_back(number_to_json(v));
    }
    doc["u"] = u;
    write_json(c.out_json, doc);
    if (!c.out_csv.empty()) {
        for (std::size_t k = 0; k < series.size(); ++k) {
            auto csv = open_output(series_path(c.out_csv, k, series.size()));
            write_psi_csv(csv, series[k]);
        }
    }
    if (!complete) {
        err << "error: some perturbation rows failed\n";
        return kExitNumerical;
    }
    return kExitOk;
}

struct ScanRow {
    double x = 0.0;
    double y = 0.0;
    std::optional<StabilityVerdict> verdict;
    std::string error;
};

ScanRow scan_point(RunConfig c, double x, double y) {
    ScanRow row{x, y, std::nullopt, {}};
    c.params[c.scan_x.param] = x;
    c.params[c.scan_y.param] = y;
    try {
        const PeriodicCoefficient system = build_system(c);
        const Monodromy w = monodromy(system, c.propagation);
        row.verdict = strong_stability_verdict(w, system.structure(), c.tolerances);
    } catch (const Error& e) {
        row.error = e.what();
    }
    return row;
}

int cmd_scan(const RunConfig& c, std::ostream& out, std::ostream& err) {
    if (c.scan_x.param == c.scan_y.param) {
        throw ConfigError("scan axes must name different parameters");
    }
    {
        const auto known = family_parameters(c.family);
        for (const GridAxis* axis : {&c.scan_x, &c.scan_y}) {
            if (known.count(axis->param) == 0) {
                throw ConfigError(fmt::format("system family '{}' has no parameter '{}'", c.family, axis->param));
            }
        }
    }
    const int nx = c.scan_x.count;
    const int ny = c.scan_y.count;
    const std::size_t total = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    std::vector<ScanRow> rows(total);

    unsigned workers = c.jobs > 0 ? static_cast<unsigned>(c.jobs) : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, total));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k = next++; k < total; k = next++) {
            const int ix = static_cast<int>(k / static_cast<std::size_t>(ny));
            const int iy = static_cast<int>(k % static_cast<std::size_t>(ny));
            rows[k] = scan_point(c, c.scan_x.value(ix), c.scan_y.value(iy));
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < workers; ++t) {
        pool.emplace_back(work);
    }
    work();
    for (auto& t : pool) {
        t.join();
    }

    std::string csv = fmt::format("{},{},stable,strongly_stable,delta_color,max_modulus,error\n", c.scan_x.param,
                                  c.scan_y.param);
    Json json_rows = Json::array();
    std::size_t failed = 0;
    for (const auto& r : rows) {
        if (r.verdict) {
            csv += fmt::format("{},{},{},{},{},{},\n", format_number(r.x), format_number(r.y), r.verdict->stable,
                               r.verdict->strongly_stable, optional_number(r.verdict->delta_color),
                               format_number(r.verdict->max_modulus));
        } else {
            ++failed;
            csv += fmt::format("{},{},,,,,{}\n", format_number(r.x), format_number(r.y), csv_field(r.error));
        }
        Json jr{{c.scan_x.param, number_to_json(r.x)}, {c.scan_y.param, number_to_json(r.y)}};
        jr["stable"] = r.verdict ? Json(r.verdict->stable) : Json();
        jr["strongly_stable"] = r.verdict ? Json(r.verdict->strongly_stable) : Json();
        jr["delta_color"] = r.verdict ? number_to_json(r.verdict->delta_color) : Json();
        jr["max_modulus"] = r.verdict ? number_to_json(r.verdict->max_modulus) : Json();
        jr["error"] = r.error.empty() ? Json() : Json(r.error);
        json_rows.push_back(std::move(jr));
    }
    if (c.out_csv.empty()) {
        out << csv;
    } else {
        auto file = open_output(c.out_csv);
        file << csv;
        out << fmt::format("wrote {} rows to {}\n", total, c.out_csv);
    }
    if (failed > 0) {
        err << fmt::format("warning: {} of {} grid points failed\n", failed, total);
    }
    write_json(c.out_json, Json{{"schema", kScanSchema},
                                {"system", Json{{"family", c.family}}},
                                {"propagation", propagation_json(c.propagation)},
                                {"rows", json_rows}});
    return kExitOk;
}

int cmd_verify(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const PeriodicCoefficient system = build_system(c);
    InvariantSuiteOptions options;
    options.propagation = c.propagation;
    options.tolerances = c.tolerances;
    options.seed = c.seed;
    if (!c.u.empty()) {
        if (static_cast<int>(c.u.size()) != system.dimension()) {
            throw ConfigError(
                fmt::format("perturbation vector has length {}, system needs {}", c.u.size(), system.dimension()));
        }
        options.u = Eigen::Map<const Vector>(c.u.data(), static_cast<Eigen::Index>(c.u.size()));
    }
    const InvariantReport report = run_invariant_suite(system, options);
    out << fmt::format("system  {}\n", describe_system(c));
    print_invariant_table(out, report);

    Json results = Json::array();
    for (const auto& r : report.results) {
        results.push_back(Json{{"name", r.name},
                               {"value", number_to_json(r.value)},
                               {"bound", number_to_json(r.bound)},
                               {"pass", r.pass},
                               {"skipped", r.skipped},
                               {"note", r.note}});
    }
    write_json(c.out_json, Json{{"schema", kVerifySchema},
                                {"system", system_json(c, system)},
                                {"propagation", propagation_json(c.propagation)},
                                {"seed", c.seed},
                                {"results", results},
                                {"pass", report.all_pass()}});
    if (!report.all_pass()) {
        std::string names;
        for (const auto& n : report.failures()) {
            names += names.empty() ? n : ", " + n;
        }
        err << "failed invariants: " << names << '\n';
        return kExitUnstable;
    }
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stability analysis of periodic linear Hamiltonian systems", "symper"};
    app.require_subcommand(1);
    Flags flags;

    auto* analyze = app.add_subcommand("analyze", "Monodromy, multiplier classification and strong stability verdict");
    add_common(analyze, flags);
    auto* perturb = app.add_subcommand("perturb", "Rank-one perturbation experiment over a list of scales");
    add_common(perturb, flags);
    add_perturbation(perturb, flags);
    auto* scan = app.add_subcommand("scan", "Stability map over a two-parameter grid");
    add_common(scan, flags);
    scan->add_option("--grid-x", flags.grid_x, "First axis name:min:max:count");
    scan->add_option("--grid-y", flags.grid_y, "Second axis name:min:max:count");
    scan->add_option("--jobs", flags.jobs, "Worker threads (0: all cores)");
    auto* verify = app.add_subcommand("verify", "Run the invariant suite on a system");
    add_common(verify, flags);
    add_perturbation(verify, flags);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitBadInput;
    }

    RunConfig config;
    try {
        config = resolve(flags);
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kExitBadInput;
    }

    try {
        if (analyze->parsed()) return cmd_analyze(config, out, err);
        if (perturb->parsed()) return cmd_perturb(config, out, err);
        if (scan->parsed()) return cmd_scan(config, out, err);
        return cmd_verify(config, out, err);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitBadInput;
    } catch (const Error& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << '\n';
        return kExitNumerical;
    }
}

}  // namespace symper::cli
