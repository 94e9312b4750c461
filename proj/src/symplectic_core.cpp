#include "symper/symplectic_core.hpp"

#include "symper/errors.hpp"

#include <cmath>
#include <string>

namespace symper {

namespace {

void require_square(const Matrix& m, int dim, const char* what) {
    if (m.rows() != dim || m.cols() != dim) {
        throw InvalidArgument(std::string(what) + ": expected " + std::to_string(dim) + "x" +
                              std::to_string(dim) + " matrix, got " + std::to_string(m.rows()) +
                              "x" + std::to_string(m.cols()));
    }
}

void require_length(const CVector& x, int dim, const char* what) {
    if (x.size() != dim) {
        throw InvalidArgument(std::string(what) + ": vector length " + std::to_string(x.size()) +
                              " does not match dimension " + std::to_string(dim));
    }
    if (x.isZero(0.0)) {
        throw InvalidArgument(std::string(what) + ": zero vector");
    }
}

}  // namespace

double spectral_norm(const Matrix& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

double spectral_norm(const CMatrix& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues()(0);
}

StructureMatrix StructureMatrix::standard(int half_dimension) {
    if (half_dimension < 1) {
        throw InvalidDimension("structure matrix needs N >= 1, got " + std::to_string(half_dimension));
    }
    const int n = half_dimension;
    Matrix j = Matrix::Zero(2 * n, 2 * n);
    j.topRightCorner(n, n) = -Matrix::Identity(n, n);
    j.bottomLeftCorner(n, n) = Matrix::Identity(n, n);
    return StructureMatrix(std::move(j));
}

Matrix StructureMatrix::apply_inverse(const Matrix& m) const {
    require_square(m, dimension(), "apply_inverse");
    const int n = half_dimension();
    // -J [A; B] = [B; -A] row-blockwise.
    Matrix out(m.rows(), m.cols());
    out.topRows(n) = m.bottomRows(n);
    out.bottomRows(n) = -m.topRows(n);
    return out;
}

StructureMatrix standard_structure_matrix(int half_dimension) {
    return StructureMatrix::standard(half_dimension);
}

RankOneUpdate::RankOneUpdate(Vector direction, double scale) : direction_(std::move(direction)), scale_(scale) {
    if (direction_.size() == 0 || direction_.size() % 2 != 0) {
        throw InvalidDimension("rank-one update needs an even, nonzero length, got " +
                               std::to_string(direction_.size()));
    }
    if (!(scale_ >= 0.0) || !std::isfinite(scale_)) {
        throw InvalidParameter("rank-one update scale must be finite and nonnegative");
    }
    if (!direction_.allFinite()) {
        throw InvalidParameter("rank-one update vector has non-finite entries");
    }
}

bool RankOneUpdate::is_zero() const {
    return scale_ == 0.0 || direction_.isZero(0.0);
}

Matrix RankOneUpdate::outer_j(const StructureMatrix& j) const {
    if (j.dimension() != dimension()) {
        throw InvalidArgument("rank-one update length does not match structure matrix");
    }
    const Vector u = vector();
    return u * (u.transpose() * j.matrix());
}

Matrix RankOneUpdate::forward(const StructureMatrix& j) const {
    return Matrix::Identity(dimension(), dimension()) + outer_j(j);
}

Matrix apply_rank_one(const RankOneUpdate& update, const Matrix& w, const StructureMatrix& j) {
    require_square(w, j.dimension(), "apply_rank_one");
    if (update.dimension() != j.dimension()) {
        throw InvalidArgument("apply_rank_one: update length does not match structure matrix");
    }
    const Vector u = update.vector();
    // (I + u u^T J) W = W + u (u^T J W)
    return w + u * ((u.transpose() * j.matrix()) * w);
}

Matrix inverse_rank_one(const RankOneUpdate& update, const StructureMatrix& j) {
    return Matrix::Identity(update.dimension(), update.dimension()) - update.outer_j(j);
}

double symplecticity_residual(const Matrix& w, const StructureMatrix& j) {
    require_square(w, j.dimension(), "symplecticity_residual");
    return spectral_norm(Matrix(w.transpose() * j.matrix() * w - j.matrix()));
}

std::string_view to_string(S0Form form) {
    return form == S0Form::jw ? "jw" : "wj";
}

S0Form parse_s0_form(std::string_view text) {
    if (text == "jw") {
        return S0Form::jw;
    }
    if (text == "wj") {
        return S0Form::wj;
    }
    throw InvalidParameter("unknown S0 form '" + std::string(text) + "' (expected jw or wj)");
}

Matrix s0_matrix(const Matrix& w, const StructureMatrix& j, S0Form form) {
    require_square(w, j.dimension(), "s0_matrix");
    const Matrix prod = form == S0Form::jw ? Matrix(j.matrix() * w) : Matrix(w * j.matrix());
    const Eigen::Index n = prod.rows();
    Matrix s(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = r; c < n; ++c) {
            const double v = 0.5 * (prod(r, c) + prod(c, r));
            s(r, c) = v;
            s(c, r) = v;
        }
    }
    return s;
}

std::string_view to_string(Sign sign) {
    switch (sign) {
        case Sign::positive: return "positive";
        case Sign::negative: return "negative";
        case Sign::mixed: return "mixed";
    }
    return "mixed";
}

GramValue make_gram_value(double value, double tolerance) {
    Sign label = Sign::mixed;
    if (value > tolerance) {
        label = Sign::positive;
    } else if (value < -tolerance) {
        label = Sign::negative;
    }
    return GramValue{value, tolerance, label};
}

Complex hermitian_form(const CVector& x, const CMatrix& m) {
    return x.dot(m * x);  // Eigen's dot conjugates the first argument
}

GramValue gram_kind(const CVector& x, const StructureMatrix& j, double tolerance) {
    require_length(x, j.dimension(), "gram_kind");
    const CMatrix ij = Complex(0.0, 1.0) * j.matrix().cast<Complex>();
    return make_gram_value(hermitian_form(x, ij).real(), tolerance);
}

GramValue gram_color(const CVector& x, const Matrix& s0, double tolerance) {
    require_length(x, static_cast<int>(s0.rows()), "gram_color");
    if (s0.rows() != s0.cols()) {
        throw InvalidArgument("gram_color: S0 must be square");
    }
    return make_gram_value(hermitian_form(x, s0.cast<Complex>()).real(), tolerance);
}

}  // namespace symper
