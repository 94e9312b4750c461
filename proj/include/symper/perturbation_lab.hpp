#pragma once

#include <optional>
#include <string>
#include <vector>

#include "symper/integrator.hpp"
#include "symper/spectral.hpp"
#include "symper/system_model.hpp"

namespace symper {

struct PerturbationExperiment {
    PeriodicCoefficient base;
    Vector u;
    std::vector<double> scales{1.0, 1e-1, 1e-2, 1e-3};
    PropagationConfig config;
    StabilityTolerances tolerances;

    void validate() const;
};

/// psi(t) = ||X~_1(t) - X~_2(t)|| between the closed-form perturbed solution
/// (I + u u^T J) X(t) and the integrated solution of the perturbed system.
struct PsiSeries {
    double scale = 1.0;
    std::vector<double> times;
    std::vector<double> psi;
    double psi_max = 0.0;
};

struct NeighborhoodRow {
    double scale = 0.0;
    std::optional<double> e_norm_max;     // max_t ||E(t)||
    std::optional<double> rank_one_norm;  // ||u u^T J W||, W the unperturbed monodromy
    std::optional<double> psi_max;
    std::optional<double> max_residual;  // worst symplecticity residual of the integrated perturbed solution
    std::optional<StabilityVerdict> verdict;  // of the canonical perturbed monodromy
    std::string error;                        // nonempty when the row failed

    [[nodiscard]] bool ok() const noexcept { return error.empty(); }
};

struct NeighborhoodReport {
    std::vector<NeighborhoodRow> rows;  // descending scale
    StabilityVerdict base_verdict;
    /// Largest tested scale for which every row at that scale or below is stable.
    std::optional<double> largest_stable_scale;
};

/// (I + u u^T J) X(t) at every node; residuals recomputed.
[[nodiscard]] Trajectory closed_form_perturbed(const Trajectory& trajectory, const RankOneUpdate& update,
                                               const StructureMatrix& j);

/// Perturbed system integrated from X~(0) = I + u u^T J over one period.
[[nodiscard]] Trajectory integrate_perturbed(const PeriodicCoefficient& base, const RankOneUpdate& update,
                                             const PropagationConfig& config);

/// Perturbed system integrated from W~(0) = I over one period.
[[nodiscard]] Trajectory canonical_perturbed(const PeriodicCoefficient& base, const RankOneUpdate& update,
                                             const PropagationConfig& config);

[[nodiscard]] PsiSeries psi_series(const Trajectory& closed_form, const Trajectory& integrated, double scale = 1.0);
[[nodiscard]] PsiSeries psi_series(const PeriodicCoefficient& base, const RankOneUpdate& update,
                                   const PropagationConfig& config);
/// One series per scale of the experiment, in the experiment's order.
[[nodiscard]] std::vector<PsiSeries> psi_series(const PerturbationExperiment& experiment);

/// phi(y) = ((J u u^T J W + (J u u^T J W)^T) / 2 y, y).
[[nodiscard]] double phi_form(const Matrix& w, const RankOneUpdate& update, const Vector& y, const StructureMatrix& j);

/// |(S0 y, y) - (S~0 y, y) + phi(y)| with S~0 built from (I + u u^T J) W.
[[nodiscard]] double lemma1_residual(const Matrix& w, const RankOneUpdate& update, const Vector& y,
                                     const StructureMatrix& j);

/// Color of the unit-circle eigenvector y from the perturbed form:
/// red iff (S~0 y, y) > phi(y) + tol, green iff < phi(y) - tol.
/// Tolerance is form_relative * ||W||, matching gram_color in multipliers().
[[nodiscard]] Color corollary1_classify(const Matrix& w, const RankOneUpdate& update, const CVector& y,
                                        const StructureMatrix& j, const StabilityTolerances& tol = {});

[[nodiscard]] NeighborhoodReport neighborhood_scan(const PerturbationExperiment& experiment);

}  // namespace symper
