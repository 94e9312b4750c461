#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "symper/perturbation_lab.hpp"
#include "symper/spectral.hpp"

namespace symper {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVerdictSchema = "symper.verdict/1";
inline constexpr const char* kAnalysisSchema = "symper.analysis/1";
inline constexpr const char* kNeighborhoodSchema = "symper.neighborhood/1";

/// 17 significant digits.
[[nodiscard]] std::string format_number(double value);

/// Numbers as JSON numbers; +/-inf as the strings "inf"/"-inf"; nullopt or NaN as null.
[[nodiscard]] Json number_to_json(std::optional<double> value);
[[nodiscard]] std::optional<double> number_from_json(const Json& j);

[[nodiscard]] Json to_json(const StabilityTolerances& tol);
[[nodiscard]] StabilityTolerances tolerances_from_json(const Json& j);

[[nodiscard]] Json to_json(const StabilityVerdict& verdict);
/// Inverse of to_json(StabilityVerdict); throws InvalidArgument on schema mismatch.
[[nodiscard]] StabilityVerdict verdict_from_json(const Json& j);

[[nodiscard]] Json to_json(const std::vector<MultiplierRecord>& records);
[[nodiscard]] Json to_json(const NeighborhoodReport& report);

/// Header: t,psi
void write_psi_csv(std::ostream& out, const PsiSeries& series);

}  // namespace symper
