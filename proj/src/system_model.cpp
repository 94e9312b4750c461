#include "symper/system_model.hpp"

#include "symper/errors.hpp"

#include <cmath>
#include <numbers>

namespace symper {

PeriodicCoefficient::PeriodicCoefficient(std::string label, double period, StructureMatrix j, Evaluator evaluator)
    : label_(std::move(label)), period_(period), j_(std::move(j)), evaluator_(std::move(evaluator)) {
    if (!(period_ > 0.0) || !std::isfinite(period_)) {
        throw InvalidParameter("period must be positive and finite");
    }
    if (!evaluator_) {
        throw InvalidArgument("periodic coefficient needs an evaluator");
    }
}

PeriodicCoefficient mathieu_hamiltonian(const MathieuParams& params) {
    const double a = params.a;
    const double b = params.b;
    return PeriodicCoefficient("mathieu", std::numbers::pi, StructureMatrix::standard(1), [a, b](double t) {
        Matrix h = Matrix::Zero(2, 2);
        h(0, 0) = a + b * std::sin(2.0 * t);
        h(1, 1) = 1.0;
        return h;
    });
}

PeriodicCoefficient coupled_triple_hamiltonian(const CoupledTripleParams& params) {
    for (double q : params.q) {
        if (!(q > 0.0)) {
            throw InvalidParameter("coupled-triple masses q1, q2, q3 must be positive");
        }
    }
    if (params.gamma == 0.0 || !std::isfinite(params.gamma)) {
        throw InvalidParameter("coupled-triple frequency gamma must be nonzero");
    }
    const CoupledTripleParams p = params;
    const double period = 2.0 * std::numbers::pi / std::abs(p.gamma);
    return PeriodicCoefficient("coupled-triple", period, StructureMatrix::standard(3), [p](double t) {
        const double c2 = std::cos(2.0 * p.gamma * t);
        const double s2 = std::sin(2.0 * p.gamma * t);
        const double s5 = std::sin(5.0 * p.gamma * t);
        const double k13 = (p.b * c2 + p.c * s2) / std::sqrt(p.q[0] * p.q[2]);
        const double k23 = p.g * s5 / std::sqrt(p.q[1] * p.q[2]);
        Matrix h = Matrix::Identity(6, 6);
        h(0, 0) = (p.p[0] + p.a * c2) / p.q[0];
        h(1, 1) = p.p[1] / p.q[1];
        h(2, 2) = p.p[2] / p.q[2];
        h(0, 1) = h(1, 0) = 0.0;
        h(0, 2) = h(2, 0) = k13;
        h(1, 2) = h(2, 1) = k23;
        return h;
    });
}

PeriodicCoefficient sampled_hamiltonian(double period, const std::vector<Matrix>& samples, std::string label) {
    if (samples.empty()) {
        throw InvalidArgument("sampled system needs at least one sample");
    }
    const Eigen::Index dim = samples.front().rows();
    if (dim == 0 || dim % 2 != 0) {
        throw InvalidDimension("sampled system dimension must be even and positive");
    }
    std::vector<Matrix> sym;
    sym.reserve(samples.size());
    for (const Matrix& s : samples) {
        if (s.rows() != dim || s.cols() != dim) {
            throw InvalidDimension("sampled system: all samples must share one square shape");
        }
        const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
        if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
            throw InvalidArgument("sampled system: sample matrix is not symmetric");
        }
        sym.emplace_back(0.5 * (s + s.transpose()));
    }

    const int m = static_cast<int>(sym.size());
    const int half = m / 2;
    const bool has_nyquist = m % 2 == 0;
    const double two_pi = 2.0 * std::numbers::pi;

    // H(t) = A_0 + sum_k (A_k cos(k w t) + B_k sin(k w t)), w = 2 pi / P.
    auto cos_terms = std::make_shared<std::vector<Matrix>>();
    auto sin_terms = std::make_shared<std::vector<Matrix>>();
    const int top = has_nyquist ? half : (m - 1) / 2;
    for (int k = 0; k <= top; ++k) {
        Matrix a = Matrix::Zero(dim, dim);
        Matrix b = Matrix::Zero(dim, dim);
        for (int n = 0; n < m; ++n) {
            const double angle = two_pi * static_cast<double>(k) * n / m;
            a += std::cos(angle) * sym[n];
            b += std::sin(angle) * sym[n];
        }
        const double weight = (k == 0 || (has_nyquist && k == half)) ? 1.0 / m : 2.0 / m;
        a *= weight;
        b *= weight;
        if (k == 0 || (has_nyquist && k == half)) {
            b.setZero();
        }
        cos_terms->push_back(std::move(a));
        sin_terms->push_back(std::move(b));
    }

    const double omega = two_pi / period;
    return PeriodicCoefficient(std::move(label), period, StructureMatrix::standard(static_cast<int>(dim / 2)),
                               [cos_terms, sin_terms, omega](double t) {
                                   Matrix h = (*cos_terms)[0];
                                   for (std::size_t k = 1; k < cos_terms->size(); ++k) {
                                       const double phase = omega * static_cast<double>(k) * t;
                                       h += std::cos(phase) * (*cos_terms)[k] + std::sin(phase) * (*sin_terms)[k];
                                   }
                                   return h;
                               });
}

Matrix perturbation_term(const RankOneUpdate& update, const PeriodicCoefficient& base, double t) {
    const StructureMatrix& j = base.structure();
    if (update.dimension() != j.dimension()) {
        throw InvalidArgument("perturbation_term: update length does not match system dimension");
    }
    const Matrix h = base(t);
    const Vector u = update.vector();
    const Matrix uu = u * u.transpose();
    const Matrix juuh = j.matrix() * uu * h;
    const Matrix uuj = uu * j.matrix();
    return juuh.transpose() + juuh + uuj.transpose() * h * uuj;
}

PerturbedCoefficient::PerturbedCoefficient(PeriodicCoefficient base, RankOneUpdate update)
    : base_(std::move(base)),
      update_(std::move(update)),
      inverse_(std::make_shared<const Matrix>(inverse_rank_one(update_, base_.structure()))),
      perturbed_(base_.label() + "+rank1", base_.period(), base_.structure(),
                 [b = base_, inv = inverse_](double t) -> Matrix {
                     return inv->transpose() * b(t) * (*inv);
                 }) {
    if (update_.dimension() != base_.dimension()) {
        throw InvalidArgument("perturbed_hamiltonian: update length does not match system dimension");
    }
}

Matrix PerturbedCoefficient::hamiltonian(double t) const {
    return perturbed_(t);
}

PerturbedCoefficient perturbed_hamiltonian(const RankOneUpdate& update, const PeriodicCoefficient& base) {
    return PerturbedCoefficient(base, update);
}

double perturbation_magnitude(const RankOneUpdate& update, const PeriodicCoefficient& base, int samples_per_period) {
    if (samples_per_period < 1) {
        throw InvalidParameter("perturbation_magnitude needs at least one sample");
    }
    if (update.is_zero()) {
        return 0.0;
    }
    double worst = 0.0;
    for (int k = 0; k < samples_per_period; ++k) {
        const double t = base.period() * static_cast<double>(k) / samples_per_period;
        worst = std::max(worst, spectral_norm(perturbation_term(update, base, t)));
    }
    return worst;
}

}  // namespace symper
