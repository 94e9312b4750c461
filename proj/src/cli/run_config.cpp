#include "symper/cli/run_config.hpp"

#include "symper/errors.hpp"
#include "symper/serialization.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

namespace symper::cli {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

int parse_int(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw ConfigError(fmt::format("{}: '{}' is not an integer", what, text));
    }
    return value;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw ConfigError(fmt::format("{}: '{}' is not a nonnegative integer", what, text));
    }
    return value;
}

std::string join_numbers(const std::vector<double>& values) {
    std::string out;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k > 0) {
            out += ", ";
        }
        out += format_number(values[k]);
    }
    return out;
}

std::string emit_axis(const GridAxis& axis) {
    return fmt::format("{}:{}:{}:{}", axis.param, format_number(axis.min), format_number(axis.max), axis.count);
}

const std::set<std::string> kSections{"system", "propagation", "tolerances", "perturbation", "scan", "output"};

void require_known(const pt::ptree& section, const std::string& name, const std::set<std::string>& keys) {
    for (const auto& [key, value] : section) {
        if (!value.empty()) {
            throw ConfigError(fmt::format("[{}]: nested key '{}' is not allowed", name, key));
        }
        if (!keys.empty() && keys.count(key) == 0) {
            throw ConfigError(fmt::format("[{}]: unknown key '{}'", name, key));
        }
    }
}

double require_param(const RunConfig& config, const std::string& key) {
    const auto it = config.params.find(key);
    if (it == config.params.end()) {
        throw ConfigError(fmt::format("system family '{}' needs parameter '{}'", config.family, key));
    }
    return it->second;
}

double param_or(const RunConfig& config, const std::string& key, double fallback) {
    const auto it = config.params.find(key);
    return it == config.params.end() ? fallback : it->second;
}

void reject_unknown_params(const RunConfig& config, const std::set<std::string>& allowed) {
    for (const auto& [key, value] : config.params) {
        if (allowed.count(key) == 0) {
            throw ConfigError(fmt::format("system family '{}' has no parameter '{}'", config.family, key));
        }
    }
}

}  // namespace

double GridAxis::value(int index) const {
    if (count <= 1) {
        return min;
    }
    return min + (max - min) * static_cast<double>(index) / static_cast<double>(count - 1);
}

double parse_double(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
        throw ConfigError(fmt::format("{}: '{}' is not a number", what, text));
    }
    return value;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    if (trim(text).empty()) {
        return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(parse_double(item, what));
    }
    return out;
}

GridAxis parse_axis(const std::string& text, const std::string& what) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) {
        parts.push_back(trim(item));
    }
    if (parts.size() != 4 || parts[0].empty()) {
        throw ConfigError(fmt::format("{}: expected name:min:max:count, got '{}'", what, text));
    }
    GridAxis axis{parts[0], parse_double(parts[1], what), parse_double(parts[2], what), parse_int(parts[3], what)};
    if (axis.count < 1 || !std::isfinite(axis.min) || !std::isfinite(axis.max) || axis.min > axis.max) {
        throw ConfigError(fmt::format("{}: need finite min <= max and count >= 1, got '{}'", what, text));
    }
    return axis;
}

void apply_param(RunConfig& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError(fmt::format("--param expects k=v, got '{}'", assignment));
    }
    const std::string key = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    if (key == "samples") {
        config.samples_path = value;
    } else if (key == "family") {
        config.family = value;
    } else {
        config.params[key] = parse_double(value, "--param " + key);
    }
}

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    RunConfig config;
    for (const auto& [name, section] : tree) {
        if (kSections.count(name) == 0) {
            throw ConfigError(fmt::format("config: unknown section [{}]", name.empty() ? std::string("<top>") : name));
        }
        if (section.empty()) {
            throw ConfigError(fmt::format("config: '{}' must be a section", name));
        }
    }

    if (const auto sys = tree.get_child_optional("system")) {
        require_known(*sys, "system", {});
        for (const auto& [key, value] : *sys) {
            const std::string text = value.get_value<std::string>();
            if (key == "family") {
                config.family = trim(text);
            } else if (key == "samples") {
                std::filesystem::path p = trim(text);
                if (p.is_relative() && !base_dir.empty()) {
                    p = base_dir / p;
                }
                config.samples_path = p.string();
            } else {
                config.params[key] = parse_double(text, "[system] " + key);
            }
        }
    }
    if (const auto prop = tree.get_child_optional("propagation")) {
        require_known(*prop, "propagation",
                      {"steps", "method", "newton_tolerance", "max_newton_iterations", "residual_alarm"});
        auto& p = config.propagation;
        if (auto v = prop->get_optional<std::string>("steps")) p.steps_per_period = parse_int(*v, "[propagation] steps");
        if (auto v = prop->get_optional<std::string>("method")) {
            try {
                p.method = parse_method(trim(*v));
            } catch (const InvalidParameter& e) {
                throw ConfigError(e.what());
            }
        }
        if (auto v = prop->get_optional<std::string>("newton_tolerance"))
            p.newton_tolerance = parse_double(*v, "[propagation] newton_tolerance");
        if (auto v = prop->get_optional<std::string>("max_newton_iterations"))
            p.max_newton_iterations = parse_int(*v, "[propagation] max_newton_iterations");
        if (auto v = prop->get_optional<std::string>("residual_alarm"))
            p.residual_alarm = parse_double(*v, "[propagation] residual_alarm");
    }
    if (const auto tol = tree.get_child_optional("tolerances")) {
        require_known(*tol, "tolerances",
                      {"circle", "form_relative", "cluster_radius", "rank_threshold", "gap_floor", "psd_relative",
                       "projector", "imaginary", "s0_form"});
        auto& t = config.tolerances;
        const std::pair<const char*, double*> fields[] = {
            {"circle", &t.circle},           {"form_relative", &t.form_relative}, {"cluster_radius", &t.cluster_radius},
            {"rank_threshold", &t.rank_threshold}, {"gap_floor", &t.gap_floor}, {"psd_relative", &t.psd_relative},
            {"projector", &t.projector},     {"imaginary", &t.imaginary}};
        for (const auto& [key, target] : fields) {
            if (auto v = tol->get_optional<std::string>(key)) {
                *target = parse_double(*v, std::string("[tolerances] ") + key);
            }
        }
        if (auto v = tol->get_optional<std::string>("s0_form")) {
            try {
                t.s0_form = parse_s0_form(trim(*v));
            } catch (const InvalidParameter& e) {
                throw ConfigError(e.what());
            }
        }
    }
    if (const auto pert = tree.get_child_optional("perturbation")) {
        require_known(*pert, "perturbation", {"u", "scales"});
        if (auto v = pert->get_optional<std::string>("u")) config.u = parse_list(*v, "[perturbation] u");
        if (auto v = pert->get_optional<std::string>("scales")) config.scales = parse_list(*v, "[perturbation] scales");
    }
    if (const auto scan = tree.get_child_optional("scan")) {
        require_known(*scan, "scan", {"x", "y", "jobs"});
        if (auto v = scan->get_optional<std::string>("x")) config.scan_x = parse_axis(*v, "[scan] x");
        if (auto v = scan->get_optional<std::string>("y")) config.scan_y = parse_axis(*v, "[scan] y");
        if (auto v = scan->get_optional<std::string>("jobs")) config.jobs = parse_int(*v, "[scan] jobs");
    }
    if (const auto out = tree.get_child_optional("output")) {
        require_known(*out, "output", {"json", "csv", "seed"});
        if (auto v = out->get_optional<std::string>("json")) config.out_json = trim(*v);
        if (auto v = out->get_optional<std::string>("csv")) config.out_csv = trim(*v);
        if (auto v = out->get_optional<std::string>("seed")) config.seed = parse_u64(*v, "[output] seed");
    }
    return config;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path.string() + "'");
    }
    return parse_config(in, path.parent_path());
}

std::string emit_config(const RunConfig& c) {
    std::string out;
    out += "[system]\n";
    out += fmt::format("family = {}\n", c.family);
    for (const auto& [key, value] : c.params) {
        out += fmt::format("{} = {}\n", key, format_number(value));
    }
    if (!c.samples_path.empty()) {
        out += fmt::format("samples = {}\n", c.samples_path);
    }
    const auto& p = c.propagation;
    out += "\n[propagation]\n";
    out += fmt::format("steps = {}\n", p.steps_per_period);
    out += fmt::format("method = {}\n", to_string(p.method));
    out += fmt::format("newton_tolerance = {}\n", format_number(p.newton_tolerance));
    out += fmt::format("max_newton_iterations = {}\n", p.max_newton_iterations);
    out += fmt::format("residual_alarm = {}\n", format_number(p.residual_alarm));
    const auto& t = c.tolerances;
    out += "\n[tolerances]\n";
    out += fmt::format("circle = {}\n", format_number(t.circle));
    out += fmt::format("form_relative = {}\n", format_number(t.form_relative));
    out += fmt::format("cluster_radius = {}\n", format_number(t.cluster_radius));
    out += fmt::format("rank_threshold = {}\n", format_number(t.rank_threshold));
    out += fmt::format("gap_floor = {}\n", format_number(t.gap_floor));
    out += fmt::format("psd_relative = {}\n", format_number(t.psd_relative));
    out += fmt::format("projector = {}\n", format_number(t.projector));
    out += fmt::format("imaginary = {}\n", format_number(t.imaginary));
    out += fmt::format("s0_form = {}\n", to_string(t.s0_form));
    out += "\n[perturbation]\n";
    if (!c.u.empty()) {
        out += fmt::format("u = {}\n", join_numbers(c.u));
    }
    out += fmt::format("scales = {}\n", join_numbers(c.scales));
    out += "\n[scan]\n";
    out += fmt::format("x = {}\n", emit_axis(c.scan_x));
    out += fmt::format("y = {}\n", emit_axis(c.scan_y));
    out += fmt::format("jobs = {}\n", c.jobs);
    out += "\n[output]\n";
    if (!c.out_json.empty()) {
        out += fmt::format("json = {}\n", c.out_json);
    }
    if (!c.out_csv.empty()) {
        out += fmt::format("csv = {}\n", c.out_csv);
    }
    out += fmt::format("seed = {}\n", c.seed);
    return out;
}

std::vector<Matrix> read_samples_csv(const std::filesystem::path& path, double period) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open samples file '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError("samples file '" + path.string() + "' is empty");
    }
    std::vector<std::vector<double>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        rows.push_back(parse_list(line, fmt::format("{}:{}", path.string(), line_no)));
    }
    if (rows.empty()) {
        throw ConfigError("samples file '" + path.string() + "' has no data rows");
    }
    const std::size_t width = rows.front().size();
    const auto dim = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(width - 1))));
    if (width < 2 || static_cast<std::size_t>(dim * dim) + 1 != width || dim % 2 != 0) {
        throw ConfigError("samples file: each row must hold t followed by (2N)^2 entries");
    }
    std::vector<Matrix> samples;
    const auto m = static_cast<double>(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& r = rows[k];
        if (r.size() != width) {
            throw ConfigError(fmt::format("samples file: row {} has {} columns, expected {}", k + 1, r.size(), width));
        }
        const double expected = period * static_cast<double>(k) / m;
        if (std::abs(r[0] - expected) > 1e-9 * period) {
            throw ConfigError(fmt::format("samples file: row {} has t = {}, expected uniform grid value {}", k + 1,
                                          format_number(r[0]), format_number(expected)));
        }
        Matrix h(dim, dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
            for (Eigen::Index jx = 0; jx < dim; ++jx) {
                h(i, jx) = r[1 + i * dim + jx];
            }
        }
        samples.push_back(std::move(h));
    }
    return samples;
}

std::set<std::string> family_parameters(const std::string& family) {
    if (family == "mathieu") return {"a", "b"};
    if (family == "coupled-triple") return {"p1", "p2", "p3", "q1", "q2", "q3", "a", "b", "c", "g", "gamma"};
    if (family == "sampled") return {"period"};
    throw ConfigError(
        fmt::format("unknown system family '{}' (expected mathieu, coupled-triple or sampled)", family));
}

PeriodicCoefficient build_system(const RunConfig& config) {
    try {
        if (config.family == "mathieu") {
            reject_unknown_params(config, family_parameters(config.family));
            return mathieu_hamiltonian({require_param(config, "a"), require_param(config, "b")});
        }
        if (config.family == "coupled-triple") {
            reject_unknown_params(config, family_parameters(config.family));
            CoupledTripleParams p;
            p.p = {require_param(config, "p1"), require_param(config, "p2"), require_param(config, "p3")};
            p.q = {param_or(config, "q1", 1.0), param_or(config, "q2", 1.0), param_or(config, "q3", 1.0)};
            p.a = param_or(config, "a", 0.0);
            p.b = param_or(config, "b", 0.0);
            p.c = param_or(config, "c", 0.0);
            p.g = param_or(config, "g", 0.0);
            p.gamma = param_or(config, "gamma", 1.0);
            return coupled_triple_hamiltonian(p);
        }
        if (config.family == "sampled") {
            reject_unknown_params(config, family_parameters(config.family));
            const double period = require_param(config, "period");
            if (!(period > 0.0)) {
                throw ConfigError("sampled system needs period > 0");
            }
            if (config.samples_path.empty()) {
                throw ConfigError("sampled system needs a samples file");
            }
            return sampled_hamiltonian(period, read_samples_csv(config.samples_path, period), "sampled");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError(fmt::format("unknown system family '{}' (expected mathieu, coupled-triple or sampled)",
                                  config.family));
}

std::string describe_system(const RunConfig& config) {
    std::string out = config.family + " (";
    bool first = true;
    for (const auto& [key, value] : config.params) {
        out += fmt::format("{}{}={}", first ? "" : ", ", key, fmt::format("{:.17g}", value));
        first = false;
    }
    if (!config.samples_path.empty()) {
        out += fmt::format("{}samples={}", first ? "" : ", ", config.samples_path);
    }
    return out + ")";
}

}  // namespace symper::cli
