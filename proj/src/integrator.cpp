#include "symper/integrator.hpp"

#include "symper/errors.hpp"

#include <array>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

namespace symper {

namespace {

struct Tableau {
    int stages = 0;
    std::array<double, 3> c{};
    std::array<std::array<double, 3>, 3> a{};
    std::array<double, 3> b{};
};

Tableau gauss_tableau(Method method) {
    Tableau t;
    if (method == Method::gauss4) {
        const double r3 = std::sqrt(3.0);
        t.stages = 2;
        t.c = {0.5 - r3 / 6.0, 0.5 + r3 / 6.0, 0.0};
        t.a[0] = {0.25, 0.25 - r3 / 6.0, 0.0};
        t.a[1] = {0.25 + r3 / 6.0, 0.25, 0.0};
        t.b = {0.5, 0.5, 0.0};
    } else {
        const double r15 = std::sqrt(15.0);
        t.stages = 3;
        t.c = {0.5 - r15 / 10.0, 0.5, 0.5 + r15 / 10.0};
        t.a[0] = {5.0 / 36.0, 2.0 / 9.0 - r15 / 15.0, 5.0 / 36.0 - r15 / 30.0};
        t.a[1] = {5.0 / 36.0 + r15 / 24.0, 2.0 / 9.0, 5.0 / 36.0 - r15 / 24.0};
        t.a[2] = {5.0 / 36.0 + r15 / 30.0, 2.0 / 9.0 + r15 / 15.0, 5.0 / 36.0};
        t.b = {5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0};
    }
    return t;
}

/// One collocation step. The stage equations K_i = A_i (X + h sum_j a_ij K_j)
/// are linear in K, so Newton's Jacobian is the constant block matrix
/// M = I - h [a_ij A_i]; iteration continues until the stage residual meets
/// the tolerance (normally after the first solve, plus refinement if needed).
Matrix gauss_step(const PeriodicCoefficient& system, const Tableau& tab, double t, double h, const Matrix& x,
                  const PropagationConfig& config, std::size_t step_index) {
    const StructureMatrix& j = system.structure();
    const Eigen::Index d = x.rows();
    const int s = tab.stages;

    std::array<Matrix, 3> a_stage;
    for (int i = 0; i < s; ++i) {
        a_stage[i] = j.apply_inverse(system(t + tab.c[i] * h));
    }

    Matrix jac = Matrix::Identity(s * d, s * d);
    Matrix rhs(s * d, x.cols());
    for (int i = 0; i < s; ++i) {
        for (int k = 0; k < s; ++k) {
            jac.block(i * d, k * d, d, d) -= (h * tab.a[i][k]) * a_stage[i];
        }
        rhs.middleRows(i * d, d) = a_stage[i] * x;
    }
    const Eigen::PartialPivLU<Matrix> lu(jac);

    Matrix stages = rhs;  // explicit guess K_i = A_i X
    bool converged = false;
    for (int it = 0; it < config.max_newton_iterations; ++it) {
        const Matrix residual = jac * stages - rhs;
        const double scale = std::max(1.0, stages.cwiseAbs().maxCoeff());
        if (it > 0 && residual.cwiseAbs().maxCoeff() <= config.newton_tolerance * scale) {
            converged = true;
            break;
        }
        stages -= lu.solve(residual);
        if (!stages.allFinite()) {
            throw PropagationFailure("non-finite stage values", step_index);
        }
    }
    if (!converged) {
        const Matrix residual = jac * stages - rhs;
        const double scale = std::max(1.0, stages.cwiseAbs().maxCoeff());
        if (residual.cwiseAbs().maxCoeff() > config.newton_tolerance * scale) {
            throw PropagationFailure(
                fmt::format("implicit stages did not converge after {} iterations", config.max_newton_iterations),
                step_index);
        }
    }

    Matrix next = x;
    for (int i = 0; i < s; ++i) {
        next += (h * tab.b[i]) * stages.middleRows(i * d, d);
    }
    return next;
}

Matrix rk4_step(const PeriodicCoefficient& system, double t, double h, const Matrix& x) {
    const StructureMatrix& j = system.structure();
    const Matrix a0 = j.apply_inverse(system(t));
    const Matrix a1 = j.apply_inverse(system(t + 0.5 * h));
    const Matrix a2 = j.apply_inverse(system(t + h));
    const Matrix k1 = a0 * x;
    const Matrix k2 = a1 * (x + 0.5 * h * k1);
    const Matrix k3 = a1 * (x + 0.5 * h * k2);
    const Matrix k4 = a2 * (x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

std::string_view to_string(Method method) {
    switch (method) {
        case Method::gauss4: return "gauss4";
        case Method::gauss6: return "gauss6";
        case Method::rk4: return "rk4";
    }
    return "gauss6";
}

Method parse_method(std::string_view text) {
    if (text == "gauss4") {
        return Method::gauss4;
    }
    if (text == "gauss6") {
        return Method::gauss6;
    }
    if (text == "rk4") {
        return Method::rk4;
    }
    throw InvalidParameter(fmt::format("unknown method '{}' (expected gauss4, gauss6 or rk4)", text));
}

int method_order(Method method) {
    return method == Method::gauss6 ? 6 : 4;
}

bool is_symplectic(Method method) {
    return method != Method::rk4;
}

void PropagationConfig::validate() const {
    if (steps_per_period < 16) {
        throw InvalidParameter(fmt::format("steps_per_period must be >= 16, got {}", steps_per_period));
    }
    if (!(newton_tolerance > 0.0) || !(residual_alarm > 0.0)) {
        throw InvalidParameter("tolerances must be positive");
    }
    if (max_newton_iterations < 1) {
        throw InvalidParameter("max_newton_iterations must be positive");
    }
}

double Trajectory::max_residual() const {
    double worst = 0.0;
    for (double r : residuals) {
        worst = std::max(worst, r);
    }
    return worst;
}

Trajectory propagate(const PeriodicCoefficient& system, const PropagationConfig& config, double t_end,
                     const Matrix& x0) {
    config.validate();
    const StructureMatrix& j = system.structure();
    const int dim = j.dimension();
    if (!(t_end > 0.0) || !std::isfinite(t_end)) {
        throw InvalidArgument("propagate: t_end must be positive and finite");
    }
    if (x0.rows() != dim || x0.cols() != dim) {
        throw InvalidArgument("propagate: initial condition has the wrong shape");
    }
    if (x0.fullPivLu().rank() < dim) {
        throw InvalidArgument("propagate: initial condition is singular");
    }

    const double nominal = system.period() / config.steps_per_period;
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(t_end / nominal - 1e-9)));
    const double h = t_end / static_cast<double>(steps);

    Trajectory out;
    out.config = config;
    out.period = system.period();
    out.times.reserve(steps + 1);
    out.matrices.reserve(steps + 1);
    out.residuals.reserve(steps + 1);

    out.times.push_back(0.0);
    out.matrices.push_back(x0);
    out.residuals.push_back(symplecticity_residual(x0, j));

    const bool implicit = config.method != Method::rk4;
    const Tableau tab = implicit ? gauss_tableau(config.method) : Tableau{};
    Matrix x = x0;
    for (std::size_t n = 0; n < steps; ++n) {
        const double t = static_cast<double>(n) * h;
        x = implicit ? gauss_step(system, tab, t, h, x, config, n) : rk4_step(system, t, h, x);
        if (!x.allFinite()) {
            throw PropagationFailure("solution became non-finite", n);
        }
        out.times.push_back(n + 1 == steps ? t_end : static_cast<double>(n + 1) * h);
        out.matrices.push_back(x);
        out.residuals.push_back(symplecticity_residual(x, j));
    }
    out.degraded = out.max_residual() > config.residual_alarm;
    return out;
}

Monodromy monodromy_of(const Trajectory& one_period, const StructureMatrix& j, std::string label) {
    if (one_period.times.empty() || one_period.times.front() != 0.0 ||
        std::abs(one_period.times.back() - one_period.period) > 1e-12 * one_period.period) {
        throw InvalidArgument("monodromy needs a trajectory covering exactly one period");
    }
    Monodromy w;
    w.matrix = one_period.matrices.back();
    w.period = one_period.period;
    w.residual = symplecticity_residual(w.matrix, j);
    w.degraded = w.residual > one_period.config.residual_alarm;
    w.label = std::move(label);
    w.config = one_period.config;
    return w;
}

Monodromy monodromy(const PeriodicCoefficient& system, const PropagationConfig& config) {
    const Trajectory traj = propagate(system, config, system.period(), Matrix::Identity(system.dimension(), system.dimension()));
    return monodromy_of(traj, system.structure(), system.label());
}

Trajectory extend_by_periodicity(const Trajectory& one_period, const Monodromy& w, int n, const StructureMatrix& j) {
    if (n < 0) {
        throw InvalidArgument("extend_by_periodicity: n must be nonnegative");
    }
    if (one_period.times.empty() || one_period.times.front() != 0.0 ||
        std::abs(one_period.times.back() - one_period.period) > 1e-12 * one_period.period ||
        std::abs(w.period - one_period.period) > 1e-12 * one_period.period) {
        throw InvalidArgument("extend_by_periodicity: trajectory must cover exactly [0, P]");
    }
    Trajectory out = one_period;
    const double period = one_period.period;
    const std::size_t m = one_period.size();
    Matrix power = Matrix::Identity(w.matrix.rows(), w.matrix.cols());
    for (int k = 1; k <= n; ++k) {
        power = power * w.matrix;
        for (std::size_t i = 1; i < m; ++i) {
            const Matrix x = one_period.matrices[i] * power;
            out.times.push_back(one_period.times[i] + k * period);
            out.residuals.push_back(symplecticity_residual(x, j));
            out.matrices.push_back(x);
        }
    }
    out.degraded = out.max_residual() > out.config.residual_alarm;
    return out;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
    const Eigen::Index dim = trajectory.matrices.empty() ? 0 : trajectory.matrices.front().rows();
    out << "t";
    for (Eigen::Index r = 0; r < dim; ++r) {
        for (Eigen::Index c = 0; c < dim; ++c) {
            out << fmt::format(",x_{}_{}", r, c);
        }
    }
    out << ",residual\n";
    for (std::size_t k = 0; k < trajectory.size(); ++k) {
        out << fmt::format("{:.17g}", trajectory.times[k]);
        const Matrix& x = trajectory.matrices[k];
        for (Eigen::Index r = 0; r < dim; ++r) {
            for (Eigen::Index c = 0; c < dim; ++c) {
                out << fmt::format(",{:.17g}", x(r, c));
            }
        }
        out << fmt::format(",{:.17g}\n", trajectory.residuals[k]);
    }
}

}  // namespace symper
