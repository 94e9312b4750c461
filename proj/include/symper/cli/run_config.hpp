#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "symper/errors.hpp"
#include "symper/integrator.hpp"
#include "symper/spectral.hpp"
#include "symper/system_model.hpp"

namespace symper::cli {

/// Malformed configuration text or flag values (exit status 2).
class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

struct GridAxis {
    std::string param;
    double min = 0.0;
    double max = 0.0;
    int count = 1;

    [[nodiscard]] double value(int index) const;
    bool operator==(const GridAxis&) const = default;
};

/// Everything a run needs. Config file sections:
///
///   [system]        family = mathieu | coupled-triple | sampled, plus family parameters
///                   (sampled: period = P, samples = path to CSV)
///   [propagation]   steps, method, newton_tolerance, max_newton_iterations, residual_alarm
///   [tolerances]    circle, form_relative, cluster_radius, rank_threshold, gap_floor,
///                   psd_relative, projector, imaginary, s0_form
///   [perturbation]  u = v1, v2, ...   scales = s1, s2, ...
///   [scan]          x = name:min:max:count   y = name:min:max:count   jobs = n
///   [output]        json = path   csv = path   seed = n
struct RunConfig {
    std::string family = "mathieu";
    std::map<std::string, double> params;
    std::string samples_path;
    PropagationConfig propagation;
    StabilityTolerances tolerances;
    std::vector<double> u;
    std::vector<double> scales{1.0, 1e-1, 1e-2, 1e-3};
    GridAxis scan_x{"a", 0.0, 0.0, 1};
    GridAxis scan_y{"b", 0.0, 0.0, 1};
    int jobs = 0;  // 0: hardware concurrency
    std::string out_json;
    std::string out_csv;
    std::uint64_t seed = 20170101;

    bool operator==(const RunConfig&) const = default;
};

[[nodiscard]] RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
[[nodiscard]] RunConfig parse_config_file(const std::filesystem::path& path);
/// Round-trips through parse_config; numbers carry 17 significant digits.
[[nodiscard]] std::string emit_config(const RunConfig& config);

[[nodiscard]] double parse_double(const std::string& text, const std::string& what);
[[nodiscard]] std::vector<double> parse_list(const std::string& text, const std::string& what);
[[nodiscard]] GridAxis parse_axis(const std::string& text, const std::string& what);
/// "k=v" applied to the [system] section.
void apply_param(RunConfig& config, const std::string& assignment);

// Parameter names accepted by a family; throws ConfigError for unknown families.
[[nodiscard]] std::set<std::string> family_parameters(const std::string& family);
[[nodiscard]] PeriodicCoefficient build_system(const RunConfig& config);
/// Human-readable parameter summary, e.g. "a=7, b=4".
[[nodiscard]] std::string describe_system(const RunConfig& config);

/// Samples CSV: header row, then rows t, h_0_0, h_0_1, ... (row-major) at t_k = k P / M.
[[nodiscard]] std::vector<Matrix> read_samples_csv(const std::filesystem::path& path, double period);

}  // namespace symper::cli
