#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "symper/symplectic_core.hpp"

namespace symper {

/// A symmetric, P-periodic coefficient H(t) of J dX/dt = H(t) X.
///
/// Evaluators are pure; copies share the same immutable evaluator state.
class PeriodicCoefficient {
public:
    using Evaluator = std::function<Matrix(double)>;

    PeriodicCoefficient(std::string label, double period, StructureMatrix j, Evaluator evaluator);

    [[nodiscard]] Matrix operator()(double t) const { return evaluator_(t); }
    [[nodiscard]] Matrix evaluate(double t) const { return evaluator_(t); }

    [[nodiscard]] int dimension() const noexcept { return j_.dimension(); }
    [[nodiscard]] double period() const noexcept { return period_; }
    [[nodiscard]] const StructureMatrix& structure() const noexcept { return j_; }
    [[nodiscard]] const std::string& label() const noexcept { return label_; }

private:
    std::string label_;
    double period_;
    StructureMatrix j_;
    Evaluator evaluator_;
};

struct MathieuParams {
    double a = 0.0;
    double b = 0.0;
};

/// Three coupled oscillators with 2*gamma and 5*gamma parametric forcing.
struct CoupledTripleParams {
    std::array<double, 3> p{0.0, 0.0, 0.0};
    std::array<double, 3> q{1.0, 1.0, 1.0};
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double g = 0.0;
    double gamma = 1.0;
};

/// y'' + (a + b sin 2t) y = 0 in first-order form: H(t) = diag(a + b sin 2t, 1), P = pi.
[[nodiscard]] PeriodicCoefficient mathieu_hamiltonian(const MathieuParams& params);

/// H(t) = blockdiag(P(t), I_3) with period 2 pi / |gamma|.
[[nodiscard]] PeriodicCoefficient coupled_triple_hamiltonian(const CoupledTripleParams& params);

/// Trigonometric interpolant through samples H(k P / M), k = 0..M-1.
/// Samples must be symmetric; with even M the Nyquist term is split evenly
/// between cosines so the interpolant stays real.
[[nodiscard]] PeriodicCoefficient sampled_hamiltonian(double period, const std::vector<Matrix>& samples,
                                                      std::string label = "sampled");

/// E(t) = (J u u^T H)^T + J u u^T H + (u u^T J)^T H (u u^T J), evaluated as written.
[[nodiscard]] Matrix perturbation_term(const RankOneUpdate& update, const PeriodicCoefficient& base, double t);

/// H~(t) = (I - u u^T J)^T H(t) (I - u u^T J) = H(t) + E(t).
class PerturbedCoefficient {
public:
    PerturbedCoefficient(PeriodicCoefficient base, RankOneUpdate update);

    [[nodiscard]] const PeriodicCoefficient& base() const noexcept { return base_; }
    [[nodiscard]] const RankOneUpdate& update() const noexcept { return update_; }

    [[nodiscard]] Matrix term(double t) const { return perturbation_term(update_, base_, t); }
    [[nodiscard]] Matrix hamiltonian(double t) const;

    /// The perturbed system as a coefficient of its own (same period and J).
    [[nodiscard]] const PeriodicCoefficient& coefficient() const noexcept { return perturbed_; }

private:
    PeriodicCoefficient base_;
    RankOneUpdate update_;
    std::shared_ptr<const Matrix> inverse_;
    PeriodicCoefficient perturbed_;
};

[[nodiscard]] PerturbedCoefficient perturbed_hamiltonian(const RankOneUpdate& update, const PeriodicCoefficient& base);

inline constexpr int kDefaultMagnitudeSamples = 512;

/// max_k ||E(t_k)|| over t_k = k P / samples.
[[nodiscard]] double perturbation_magnitude(const RankOneUpdate& update, const PeriodicCoefficient& base,
                                            int samples_per_period = kDefaultMagnitudeSamples);

}  // namespace symper
