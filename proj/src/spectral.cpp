#include "symper/spectral.hpp"

#include "symper/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace symper {

std::string_view to_string(Kind kind) {
    switch (kind) {
        case Kind::first: return "first";
        case Kind::second: return "second";
        case Kind::mixed: return "mixed";
        case Kind::off_circle: return "off-circle";
    }
    return "off-circle";
}

std::string_view to_string(Color color) {
    switch (color) {
        case Color::red: return "red";
        case Color::green: return "green";
        case Color::mixed: return "mixed";
        case Color::off_circle: return "off-circle";
    }
    return "off-circle";
}

Kind parse_kind(std::string_view text) {
    for (Kind k : {Kind::first, Kind::second, Kind::mixed, Kind::off_circle}) {
        if (to_string(k) == text) {
            return k;
        }
    }
    throw InvalidArgument("unknown kind label '" + std::string(text) + "'");
}

Color parse_color(std::string_view text) {
    for (Color c : {Color::red, Color::green, Color::mixed, Color::off_circle}) {
        if (to_string(c) == text) {
            return c;
        }
    }
    throw InvalidArgument("unknown color label '" + std::string(text) + "'");
}

namespace {

/// Sign of a Hermitian form restricted to span(basis).
Sign restricted_sign(const CMatrix& basis, const CMatrix& form, double tolerance) {
    CMatrix g = basis.adjoint() * form * basis;
    g = 0.5 * (g + g.adjoint()).eval();
    const Eigen::SelfAdjointEigenSolver<CMatrix> es(g, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    if (ev.minCoeff() > tolerance) {
        return Sign::positive;
    }
    if (ev.maxCoeff() < -tolerance) {
        return Sign::negative;
    }
    return Sign::mixed;
}

Kind kind_of(Sign s) {
    return s == Sign::positive ? Kind::first : s == Sign::negative ? Kind::second : Kind::mixed;
}

Color color_of(Sign s) {
    return s == Sign::positive ? Color::red : s == Sign::negative ? Color::green : Color::mixed;
}

bool on_circle(const MultiplierRecord& r) {
    return r.kind != Kind::off_circle;
}

template <typename Label>
double class_gap(const std::vector<MultiplierRecord>& records, Label label, auto positive, auto negative, auto mixed,
                 auto off) {
    for (const auto& r : records) {
        if (label(r) == off) {
            throw NotApplicable("gap is undefined when a multiplier lies off the unit circle");
        }
    }
    for (const auto& r : records) {
        if (label(r) == mixed) {
            return 0.0;
        }
    }
    double gap = kInfiniteGap;
    for (const auto& x : records) {
        if (label(x) != positive) {
            continue;
        }
        for (const auto& y : records) {
            if (label(y) == negative) {
                gap = std::min(gap, std::abs(x.value - y.value));
            }
        }
    }
    return gap;
}

double min_eigenvalue(const Matrix& s) {
    const Matrix sym = 0.5 * (s + s.transpose());
    return Eigen::SelfAdjointEigenSolver<Matrix>(sym, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

double max_eigenvalue(const Matrix& s) {
    const Matrix sym = 0.5 * (s + s.transpose());
    return Eigen::SelfAdjointEigenSolver<Matrix>(sym, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

}  // namespace

std::vector<MultiplierRecord> multipliers(const Matrix& w, const StructureMatrix& j, const StabilityTolerances& tol) {
    const int dim = j.dimension();
    if (w.rows() != dim || w.cols() != dim) {
        throw InvalidArgument("multipliers: monodromy shape does not match structure matrix");
    }
    if (!w.allFinite()) {
        throw SpectralFailure("multipliers: monodromy has non-finite entries");
    }
    const Eigen::EigenSolver<Matrix> es(w, true);
    if (es.info() != Eigen::Success) {
        throw SpectralFailure("eigensolver failed on the monodromy matrix");
    }
    const CVector values = es.eigenvalues();
    const CMatrix vectors = es.eigenvectors();

    std::vector<int> order(dim);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int l, int r) {
        const double al = std::arg(values(l));
        const double ar = std::arg(values(r));
        if (al != ar) {
            return al < ar;
        }
        return std::abs(values(l)) < std::abs(values(r));
    });

    std::vector<MultiplierRecord> records(dim);
    for (int k = 0; k < dim; ++k) {
        auto& r = records[k];
        r.value = values(order[k]);
        r.modulus = std::abs(r.value);
        r.eigenvector = vectors.col(order[k]);
        const double n = r.eigenvector.norm();
        if (!(n > 0.0)) {
            throw SpectralFailure("eigensolver returned a zero eigenvector");
        }
        r.eigenvector /= n;
    }

    // Single-linkage clustering of near-equal eigenvalues.
    std::vector<int> parent(dim);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) {
            x = parent[x] = parent[parent[x]];
        }
        return x;
    };
    for (int a = 0; a < dim; ++a) {
        for (int b = a + 1; b < dim; ++b) {
            if (std::abs(records[a].value - records[b].value) <= tol.cluster_radius) {
                parent[find(a)] = find(b);
            }
        }
    }
    std::vector<int> cluster_id(dim, -1);
    int clusters = 0;
    for (int a = 0; a < dim; ++a) {
        const int root = find(a);
        if (cluster_id[root] < 0) {
            cluster_id[root] = clusters++;
        }
        records[a].cluster = cluster_id[root];
    }

    const Matrix s0 = s0_matrix(w, j, tol.s0_form);
    const double w_norm = spectral_norm(w);
    const double kind_tol = tol.form_relative * spectral_norm(j.matrix());
    const double color_tol = tol.form_relative * w_norm;
    const CMatrix ij = Complex(0.0, 1.0) * j.matrix().cast<Complex>();
    const CMatrix s0c = s0.cast<Complex>();

    for (int c = 0; c < clusters; ++c) {
        std::vector<int> members;
        for (int a = 0; a < dim; ++a) {
            if (records[a].cluster == c) {
                members.push_back(a);
            }
        }
        const auto size = static_cast<int>(members.size());
        Complex mean(0.0, 0.0);
        for (int a : members) {
            mean += records[a].value;
        }
        mean /= static_cast<double>(size);

        bool semi_simple = true;
        CMatrix basis(dim, size);
        if (size == 1) {
            basis.col(0) = records[members[0]].eigenvector;
        } else {
            const CMatrix shifted = w.cast<Complex>() - mean * CMatrix::Identity(dim, dim);
            const Eigen::JacobiSVD<CMatrix> svd(shifted, Eigen::ComputeFullV);
            const auto& sv = svd.singularValues();
            const double cut = tol.rank_threshold * std::max(1.0, w_norm);
            int nullity = 0;
            for (Eigen::Index k = 0; k < sv.size(); ++k) {
                if (sv(k) <= cut) {
                    ++nullity;
                }
            }
            semi_simple = nullity >= size;
            if (semi_simple) {
                basis = svd.matrixV().rightCols(size);
                for (int k = 0; k < size; ++k) {
                    records[members[k]].eigenvector = basis.col(k);
                }
            } else {
                for (int k = 0; k < size; ++k) {
                    basis.col(k) = records[members[k]].eigenvector;
                }
            }
        }

        Kind kind = Kind::mixed;
        Color color = Color::mixed;
        if (semi_simple) {
            kind = kind_of(restricted_sign(basis, ij, kind_tol));
            color = color_of(restricted_sign(basis, s0c, color_tol));
        }
        for (int a : members) {
            auto& r = records[a];
            r.cluster_size = size;
            r.semi_simple = semi_simple;
            r.kind_form = hermitian_form(r.eigenvector, ij).real();
            r.color_form = hermitian_form(r.eigenvector, s0c).real();
            if (std::abs(r.modulus - 1.0) > tol.circle) {
                r.kind = Kind::off_circle;
                r.color = Color::off_circle;
            } else {
                r.kind = kind;
                r.color = color;
            }
        }
    }
    return records;
}

std::vector<MultiplierRecord> multipliers(const Monodromy& w, const StructureMatrix& j, const StabilityTolerances& tol) {
    return multipliers(w.matrix, j, tol);
}

double gap_kind(const std::vector<MultiplierRecord>& records) {
    return class_gap(
        records, [](const MultiplierRecord& r) { return r.kind; }, Kind::first, Kind::second, Kind::mixed,
        Kind::off_circle);
}

double gap_color(const std::vector<MultiplierRecord>& records) {
    return class_gap(
        records, [](const MultiplierRecord& r) { return r.color; }, Color::red, Color::green, Color::mixed,
        Color::off_circle);
}

SpectralSplit spectral_split(const Matrix& w, const StructureMatrix& j, const std::vector<MultiplierRecord>& records,
                             const StabilityTolerances& tol) {
    const int dim = j.dimension();
    if (static_cast<int>(records.size()) != dim) {
        throw InvalidArgument("spectral_split: expected one record per eigenvalue");
    }
    for (const auto& r : records) {
        if (r.color != Color::red && r.color != Color::green) {
            throw NotApplicable("spectral_split needs every multiplier colored red or green");
        }
    }
    CMatrix v(dim, dim);
    CMatrix d_red = CMatrix::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) {
        v.col(k) = records[k].eigenvector;
        if (records[k].color == Color::red) {
            d_red(k, k) = 1.0;
        }
    }
    const Eigen::FullPivLU<CMatrix> lu(v);
    if (!lu.isInvertible()) {
        throw InternalConsistency("spectral_split: eigenvector matrix is singular");
    }
    const CMatrix v_inv = lu.inverse();
    const CMatrix p_red = v * d_red * v_inv;
    const CMatrix d_green = CMatrix::Identity(dim, dim) - d_red;
    const CMatrix p_green_direct = v * d_green * v_inv;
    const double imag = std::max(p_red.imag().cwiseAbs().maxCoeff(), p_green_direct.imag().cwiseAbs().maxCoeff());
    if (imag > tol.imaginary) {
        throw InternalConsistency("spectral_split: color classes are not closed under conjugation");
    }

    SpectralSplit split;
    split.p_red = p_red.real();
    split.p_green = p_green_direct.real();
    const Matrix s0 = s0_matrix(w, j, tol.s0_form);
    const Matrix sr = split.p_red.transpose() * s0 * split.p_red;
    const Matrix sg = split.p_green.transpose() * s0 * split.p_green;
    split.s_red = 0.5 * (sr + sr.transpose());
    split.s_green = 0.5 * (sg + sg.transpose());
    split.completeness_residual =
        spectral_norm(Matrix(split.p_red + split.p_green - Matrix::Identity(dim, dim)));
    split.cross_residual = spectral_norm(Matrix(split.p_red.transpose() * s0 * split.p_green));
    return split;
}

StabilityVerdict strong_stability_verdict(const Matrix& w, const StructureMatrix& j, const StabilityTolerances& tol) {
    StabilityVerdict v;
    v.tolerances = tol;
    const auto records = multipliers(w, j, tol);

    double off = 0.0;
    int defective = 0;
    int mixed_color = 0;
    int mixed_kind = 0;
    std::vector<int> seen_defective;
    for (const auto& r : records) {
        v.max_modulus = std::max(v.max_modulus, r.modulus);
        off = std::max(off, std::abs(r.modulus - 1.0));
        if (on_circle(r)) {
            if (!r.semi_simple &&
                std::find(seen_defective.begin(), seen_defective.end(), r.cluster) == seen_defective.end()) {
                seen_defective.push_back(r.cluster);
                ++defective;
            }
            mixed_color += r.color == Color::mixed ? 1 : 0;
            mixed_kind += r.kind == Kind::mixed ? 1 : 0;
        }
    }
    const bool all_on_circle = std::all_of(records.begin(), records.end(), on_circle);

    v.unit_circle = Criterion{off <= tol.circle, off, tol.circle};
    v.semi_simple = Criterion{defective == 0, static_cast<double>(defective), 0.0};
    v.stable = v.unit_circle.pass && v.semi_simple.pass;

    v.no_mixed_color = Criterion{false, std::nullopt, 0.0};
    v.color_gap = Criterion{false, std::nullopt, tol.gap_floor};
    v.kgl = Criterion{false, std::nullopt, tol.gap_floor};
    v.definiteness = Criterion{false, std::nullopt, 0.0};
    v.projector = Criterion{false, std::nullopt, tol.projector};

    if (all_on_circle) {
        v.delta_kgl = gap_kind(records);
        v.delta_color = gap_color(records);
        v.no_mixed_color = Criterion{mixed_color == 0, static_cast<double>(mixed_color), 0.0};
        v.color_gap = Criterion{*v.delta_color > tol.gap_floor, v.delta_color, tol.gap_floor};
        v.kgl = Criterion{mixed_kind == 0 && *v.delta_kgl > tol.gap_floor, v.delta_kgl, tol.gap_floor};
    }

    if (v.stable && v.no_mixed_color.pass) {
        const Matrix s0 = s0_matrix(w, j, tol.s0_form);
        const double psd_tol = tol.psd_relative * spectral_norm(s0);
        v.definiteness.bound = psd_tol;
        try {
            const SpectralSplit split = spectral_split(w, j, records, tol);
            v.min_eig_s_red = min_eigenvalue(split.s_red);
            v.max_eig_s_green = max_eigenvalue(split.s_green);
            const double diff = min_eigenvalue(split.s_red - split.s_green);
            v.definiteness.value = diff;
            v.definiteness.pass = *v.min_eig_s_red >= -psd_tol && *v.max_eig_s_green <= psd_tol && diff > psd_tol;
            v.completeness_residual = split.completeness_residual;
            v.cross_residual = split.cross_residual;
            const double worst = std::max(split.completeness_residual, split.cross_residual);
            v.projector = Criterion{worst <= tol.projector, worst, tol.projector};
        } catch (const InternalConsistency&) {
            v.definiteness.pass = false;
            v.projector.pass = false;
        }
    }

    v.strongly_stable = v.stable && v.no_mixed_color.pass && v.color_gap.pass && v.definiteness.pass &&
                        v.projector.pass;
    return v;
}

StabilityVerdict strong_stability_verdict(const Monodromy& w, const StructureMatrix& j, const StabilityTolerances& tol) {
    return strong_stability_verdict(w.matrix, j, tol);
}

}  // namespace symper
