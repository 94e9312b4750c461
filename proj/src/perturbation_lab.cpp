#include "symper/perturbation_lab.hpp"

#include "symper/errors.hpp"

#include <algorithm>
#include <cmath>

namespace symper {

namespace {

Matrix phi_matrix(const Matrix& w, const RankOneUpdate& update, const StructureMatrix& j) {
    const Vector u = update.vector();
    const Matrix m = j.matrix() * u * (u.transpose() * j.matrix() * w);
    return 0.5 * (m + m.transpose());
}

void require_matrix(const Matrix& w, const StructureMatrix& j, const char* what) {
    if (w.rows() != j.dimension() || w.cols() != j.dimension()) {
        throw InvalidArgument(std::string(what) + ": matrix shape does not match structure matrix");
    }
}

}  // namespace

void PerturbationExperiment::validate() const {
    if (u.size() != base.dimension()) {
        throw InvalidArgument("perturbation vector length does not match system dimension");
    }
    if (scales.empty()) {
        throw InvalidArgument("perturbation experiment needs at least one scale");
    }
    for (double s : scales) {
        if (!std::isfinite(s) || s < 0.0) {
            throw InvalidParameter("perturbation scales must be finite and nonnegative");
        }
    }
    config.validate();
}

Trajectory closed_form_perturbed(const Trajectory& trajectory, const RankOneUpdate& update, const StructureMatrix& j) {
    if (trajectory.degraded) {
        throw InvalidArgument("closed_form_perturbed: input trajectory is degraded");
    }
    if (update.dimension() != j.dimension()) {
        throw InvalidArgument("closed_form_perturbed: update length does not match system dimension");
    }
    Trajectory out = trajectory;
    for (std::size_t k = 0; k < out.size(); ++k) {
        out.matrices[k] = apply_rank_one(update, trajectory.matrices[k], j);
        out.residuals[k] = symplecticity_residual(out.matrices[k], j);
    }
    out.degraded = out.max_residual() > out.config.residual_alarm;
    return out;
}

Trajectory integrate_perturbed(const PeriodicCoefficient& base, const RankOneUpdate& update,
                               const PropagationConfig& config) {
    const PerturbedCoefficient perturbed = perturbed_hamiltonian(update, base);
    return propagate(perturbed.coefficient(), config, base.period(), update.forward(base.structure()));
}

Trajectory canonical_perturbed(const PeriodicCoefficient& base, const RankOneUpdate& update,
                               const PropagationConfig& config) {
    const PerturbedCoefficient perturbed = perturbed_hamiltonian(update, base);
    return propagate(perturbed.coefficient(), config, base.period(),
                     Matrix::Identity(base.dimension(), base.dimension()));
}

PsiSeries psi_series(const Trajectory& closed_form, const Trajectory& integrated, double scale) {
    if (closed_form.times != integrated.times) {
        throw InternalConsistency("psi_series: trajectories are on different grids");
    }
    PsiSeries out;
    out.scale = scale;
    out.times = closed_form.times;
    out.psi.reserve(out.times.size());
    for (std::size_t k = 0; k < out.times.size(); ++k) {
        const double value = spectral_norm(Matrix(closed_form.matrices[k] - integrated.matrices[k]));
        out.psi.push_back(value);
        out.psi_max = std::max(out.psi_max, value);
    }
    return out;
}

PsiSeries psi_series(const PeriodicCoefficient& base, const RankOneUpdate& update, const PropagationConfig& config) {
    const int dim = base.dimension();
    const Trajectory x = propagate(base, config, base.period(), Matrix::Identity(dim, dim));
    const Trajectory closed = closed_form_perturbed(x, update, base.structure());
    const Trajectory integrated = integrate_perturbed(base, update, config);
    return psi_series(closed, integrated, update.scale());
}

std::vector<PsiSeries> psi_series(const PerturbationExperiment& experiment) {
    experiment.validate();
    const int dim = experiment.base.dimension();
    const Trajectory x =
        propagate(experiment.base, experiment.config, experiment.base.period(), Matrix::Identity(dim, dim));
    std::vector<PsiSeries> out;
    out.reserve(experiment.scales.size());
    for (double s : experiment.scales) {
        const RankOneUpdate update(experiment.u, s);
        const Trajectory closed = closed_form_perturbed(x, update, experiment.base.structure());
        const Trajectory integrated = integrate_perturbed(experiment.base, update, experiment.config);
        out.push_back(psi_series(closed, integrated, s));
    }
    return out;
}

double phi_form(const Matrix& w, const RankOneUpdate& update, const Vector& y, const StructureMatrix& j) {
    require_matrix(w, j, "phi_form");
    return y.dot(phi_matrix(w, update, j) * y);
}

double lemma1_residual(const Matrix& w, const RankOneUpdate& update, const Vector& y, const StructureMatrix& j) {
    require_matrix(w, j, "lemma1_residual");
    if (y.size() != j.dimension()) {
        throw InvalidArgument("lemma1_residual: y has the wrong length");
    }
    if (y.isZero(0.0)) {
        throw InvalidArgument("lemma1_residual: y must be nonzero");
    }
    const Matrix s0 = s0_matrix(w, j);
    const Matrix s0_tilde = s0_matrix(apply_rank_one(update, w, j), j);
    const double lhs = y.dot(s0 * y);
    const double rhs = y.dot(s0_tilde * y) - phi_form(w, update, y, j);
    return std::abs(lhs - rhs);
}

Color corollary1_classify(const Matrix& w, const RankOneUpdate& update, const CVector& y, const StructureMatrix& j,
                          const StabilityTolerances& tol) {
    require_matrix(w, j, "corollary1_classify");
    if (y.size() != j.dimension() || y.isZero(0.0)) {
        throw InvalidArgument("corollary1_classify: y must be a nonzero vector of matching length");
    }
    const CVector x = y / y.norm();
    const CMatrix wc = w.cast<Complex>();
    const Complex lambda = x.dot(wc * x);
    if ((wc * x - lambda * x).norm() > 1e-6) {
        throw InvalidArgument("corollary1_classify: y is not an eigenvector of W");
    }
    if (std::abs(std::abs(lambda) - 1.0) > tol.circle) {
        return Color::off_circle;
    }
    const Matrix s0_tilde = s0_matrix(apply_rank_one(update, w, j), j);
    const double perturbed = hermitian_form(x, s0_tilde.cast<Complex>()).real();
    const double phi = hermitian_form(x, phi_matrix(w, update, j).cast<Complex>()).real();
    const double band = tol.form_relative * spectral_norm(w);
    if (perturbed > phi + band) {
        return Color::red;
    }
    if (perturbed < phi - band) {
        return Color::green;
    }
    return Color::mixed;
}

NeighborhoodReport neighborhood_scan(const PerturbationExperiment& experiment) {
    experiment.validate();
    const PeriodicCoefficient& base = experiment.base;
    const StructureMatrix& j = base.structure();
    const int dim = base.dimension();

    const Trajectory x = propagate(base, experiment.config, base.period(), Matrix::Identity(dim, dim));
    const Monodromy w = monodromy_of(x, j, base.label());

    NeighborhoodReport report;
    report.base_verdict = strong_stability_verdict(w, j, experiment.tolerances);

    std::vector<double> scales = experiment.scales;
    std::stable_sort(scales.begin(), scales.end(), std::greater<>());
    for (double s : scales) {
        NeighborhoodRow row;
        row.scale = s;
        try {
            const RankOneUpdate update(experiment.u, s);
            row.e_norm_max = perturbation_magnitude(update, base);
            row.rank_one_norm = spectral_norm(Matrix(update.outer_j(j) * w.matrix));
            const Trajectory closed = closed_form_perturbed(x, update, j);
            const Trajectory integrated = integrate_perturbed(base, update, experiment.config);
            row.psi_max = psi_series(closed, integrated, s).psi_max;
            row.max_residual = integrated.max_residual();
            const Trajectory canonical = canonical_perturbed(base, update, experiment.config);
            row.verdict = strong_stability_verdict(monodromy_of(canonical, j, base.label()), j, experiment.tolerances);
        } catch (const Error& e) {
            row.error = e.what();
        }
        report.rows.push_back(std::move(row));
    }

    for (auto it = report.rows.rbegin(); it != report.rows.rend(); ++it) {
        if (!it->ok() || !it->verdict || !it->verdict->stable) {
            break;
        }
        report.largest_stable_scale = it->scale;
    }
    return report;
}

}  // namespace symper
