#pragma once

#include <complex>
#include <string_view>

#include <Eigen/Dense>

namespace symper {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Largest singular value. All matrix norms in this library are 2-norms.
[[nodiscard]] double spectral_norm(const Matrix& m);
[[nodiscard]] double spectral_norm(const CMatrix& m);

/// The skew-symmetric structure matrix J = [[0, -I_N], [I_N, 0]].
///
/// Only the standard block form is constructible, so J^T = -J and J^-1 = -J
/// hold by construction and the inverse is never formed numerically.
class StructureMatrix {
public:
    [[nodiscard]] static StructureMatrix standard(int half_dimension);

    [[nodiscard]] int dimension() const noexcept { return static_cast<int>(j_.rows()); }
    [[nodiscard]] int half_dimension() const noexcept { return dimension() / 2; }
    [[nodiscard]] const Matrix& matrix() const noexcept { return j_; }

    /// J^-1 * m, using J^-1 = -J.
    [[nodiscard]] Matrix apply_inverse(const Matrix& m) const;

    bool operator==(const StructureMatrix& other) const { return j_ == other.j_; }

private:
    explicit StructureMatrix(Matrix j) : j_(std::move(j)) {}
    Matrix j_;
};

[[nodiscard]] StructureMatrix standard_structure_matrix(int half_dimension);

/// The vector defining the symplectic update I + u u^T J. The effective
/// vector is scale * direction.
class RankOneUpdate {
public:
    explicit RankOneUpdate(Vector direction, double scale = 1.0);

    [[nodiscard]] const Vector& direction() const noexcept { return direction_; }
    [[nodiscard]] double scale() const noexcept { return scale_; }
    [[nodiscard]] Vector vector() const { return scale_ * direction_; }
    [[nodiscard]] int dimension() const noexcept { return static_cast<int>(direction_.size()); }
    [[nodiscard]] bool is_zero() const;

    [[nodiscard]] RankOneUpdate scaled(double factor) const { return RankOneUpdate(direction_, scale_ * factor); }

    /// u u^T J
    [[nodiscard]] Matrix outer_j(const StructureMatrix& j) const;
    /// I + u u^T J
    [[nodiscard]] Matrix forward(const StructureMatrix& j) const;

private:
    Vector direction_;
    double scale_;
};

[[nodiscard]] Matrix apply_rank_one(const RankOneUpdate& update, const Matrix& w, const StructureMatrix& j);
/// I - u u^T J, the exact inverse of I + u u^T J.
[[nodiscard]] Matrix inverse_rank_one(const RankOneUpdate& update, const StructureMatrix& j);

/// ||W^T J W - J||
[[nodiscard]] double symplecticity_residual(const Matrix& w, const StructureMatrix& j);

enum class S0Form {
    jw,  // (J W + (J W)^T) / 2, the form used for coloring
    wj,  // (W J + (W J)^T) / 2, alternative kept for experiments
};

[[nodiscard]] std::string_view to_string(S0Form form);
[[nodiscard]] S0Form parse_s0_form(std::string_view text);

/// Symmetric part of J W (or W J). The result is symmetric bit for bit.
[[nodiscard]] Matrix s0_matrix(const Matrix& w, const StructureMatrix& j, S0Form form = S0Form::jw);

enum class Sign { positive, negative, mixed };

[[nodiscard]] std::string_view to_string(Sign sign);

struct GramValue {
    double value = 0.0;
    double tolerance = 0.0;
    Sign label = Sign::mixed;
};

/// positive iff value > tol, negative iff value < -tol, mixed otherwise.
[[nodiscard]] GramValue make_gram_value(double value, double tolerance);

/// x^* M x without dropping the imaginary part.
[[nodiscard]] Complex hermitian_form(const CVector& x, const CMatrix& m);

/// x^* (iJ) x. positive = first kind, negative = second kind.
[[nodiscard]] GramValue gram_kind(const CVector& x, const StructureMatrix& j, double tolerance);
/// x^* S0 x. positive = red, negative = green.
[[nodiscard]] GramValue gram_color(const CVector& x, const Matrix& s0, double tolerance);

}  // namespace symper
