#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "symper/system_model.hpp"

namespace symper {

enum class Method { gauss4, gauss6, rk4 };

[[nodiscard]] std::string_view to_string(Method method);
[[nodiscard]] Method parse_method(std::string_view text);
[[nodiscard]] int method_order(Method method);
/// Gauss collocation preserves X^T J X; rk4 does not.
[[nodiscard]] bool is_symplectic(Method method);

struct PropagationConfig {
    int steps_per_period = 2048;
    Method method = Method::gauss6;
    double newton_tolerance = 1e-13;
    int max_newton_iterations = 25;
    double residual_alarm = 1e-9;

    void validate() const;
    bool operator==(const PropagationConfig&) const = default;
};

/// X(t) on a uniform grid together with ||X^T J X - J|| at each node.
struct Trajectory {
    std::vector<double> times;
    std::vector<Matrix> matrices;
    std::vector<double> residuals;
    PropagationConfig config;
    double period = 0.0;
    bool degraded = false;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    [[nodiscard]] double max_residual() const;
};

struct Monodromy {
    Matrix matrix;
    double period = 0.0;
    double residual = 0.0;
    bool degraded = false;
    std::string label;
    PropagationConfig config;
};

/// Fixed-step solution of dX/dt = J^-1 H(t) X from X(0) = x0 over [0, t_end].
///
/// The step is h = P / steps_per_period, shrunk so an integer number of steps
/// lands exactly on t_end. Throws PropagationFailure when an implicit stage
/// does not converge; an exceeded residual alarm only marks the result degraded.
[[nodiscard]] Trajectory propagate(const PeriodicCoefficient& system, const PropagationConfig& config, double t_end,
                                   const Matrix& x0);

[[nodiscard]] Monodromy monodromy(const PeriodicCoefficient& system, const PropagationConfig& config);
/// Monodromy read off the last node of a one-period trajectory from X(0) = I.
[[nodiscard]] Monodromy monodromy_of(const Trajectory& one_period, const StructureMatrix& j, std::string label = {});

/// X(t + kP) = X(t) W^k for k = 1..n, appended to a one-period trajectory.
[[nodiscard]] Trajectory extend_by_periodicity(const Trajectory& one_period, const Monodromy& w, int n,
                                               const StructureMatrix& j);

/// Header: t,x_0_0,x_0_1,...,residual (row-major entries of X(t)).
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace symper
