#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "symper/errors.hpp"
#include "symper/perturbation_lab.hpp"
#include "test_support.hpp"

using namespace symper;
using symper::test::kPi;

namespace {

constexpr double kEdgeA = 16.1916618724166685;

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

Matrix identity(int d) { return Matrix::Identity(d, d); }

CoupledTripleParams preset_triple() {
    CoupledTripleParams p;
    p.p = {2.0, 5.0, 15.5};
    p.a = p.b = p.c = p.g = 1.0;
    return p;
}

/// Worst distance under the best pairing of two small spectra.
double spectrum_distance(const CVector& a, const CVector& b) {
    std::vector<int> perm(static_cast<std::size_t>(b.size()));
    for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = static_cast<int>(k);
    double best = std::numeric_limits<double>::infinity();
    do {
        double worst = 0.0;
        for (Eigen::Index k = 0; k < a.size(); ++k)
            worst = std::max(worst, std::abs(a(k) - b(perm[static_cast<std::size_t>(k)])));
        best = std::min(best, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace

TEST_CASE("closed-form perturbed solution") {
    const PeriodicCoefficient sys = mathieu_hamiltonian({7.0, 4.0});
    const StructureMatrix& j = sys.structure();
    const Trajectory x = propagate(sys, {}, kPi, identity(2));

    const Trajectory same = closed_form_perturbed(x, RankOneUpdate(Vector::Zero(2)), j);
    CHECK(same.matrices == x.matrices);

    test::Rng rng(40);
    for (int trial = 0; trial < 10; ++trial) {
        const RankOneUpdate u(rng.vector(2));
        const Trajectory c = closed_form_perturbed(x, u, j);
        CHECK((c.matrices.front() - test::transvection(u.vector(), j.matrix())).norm() < 1e-15);
        CHECK(c.max_residual() <= 10.0 * x.max_residual());
        for (std::size_t k = 0; k < c.size(); k += 97) {
            CHECK((c.matrices[k] - test::transvection(u.vector(), j.matrix()) * x.matrices[k]).norm() < 1e-13);
            CHECK(c.residuals[k] == symplecticity_residual(c.matrices[k], j));
        }
    }

    Trajectory degraded = x;
    degraded.degraded = true;
    CHECK_THROWS_AS((void)closed_form_perturbed(degraded, RankOneUpdate(vec2(1, 0)), j), InvalidArgument);
    CHECK_THROWS_AS((void)closed_form_perturbed(x, RankOneUpdate(Vector::Ones(4)), j), InvalidArgument);
}

TEST_CASE("integrated perturbed solution") {
    const PeriodicCoefficient rot = mathieu_hamiltonian({1.0, 0.0});
    const StructureMatrix& j = rot.structure();
    const Trajectory base = propagate(rot, {}, kPi, identity(2));
    const Trajectory zero = integrate_perturbed(rot, RankOneUpdate(Vector::Zero(2)), {});
    REQUIRE(zero.size() == base.size());
    for (std::size_t k = 0; k < base.size(); ++k) CHECK((zero.matrices[k] - base.matrices[k]).norm() < 1e-15);

    test::Rng rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        const RankOneUpdate u(0.1 * rng.vector(2));
        const Trajectory t = integrate_perturbed(rot, u, {});
        CHECK(test::norm2(t.matrices.back() + test::transvection(u.vector(), j.matrix())) <= 1e-9);
        CHECK(t.matrices.front() == u.forward(j));
    }

    const Trajectory traj = integrate_perturbed(mathieu_hamiltonian({7.0, 4.0}), RankOneUpdate(vec2(0.8913, 0.7621)), {});
    CHECK_FALSE(traj.degraded);
}

TEST_CASE("psi series") {
    const PeriodicCoefficient stable = mathieu_hamiltonian({7.0, 4.0});
    const PsiSeries zero = psi_series(stable, RankOneUpdate(Vector::Zero(2)), {});
    for (double v : zero.psi) CHECK(v == 0.0);
    CHECK(zero.psi_max == 0.0);

    PerturbationExperiment ex{stable, vec2(0.8913, 0.7621)};
    const auto series = psi_series(ex);
    REQUIRE(series.size() == 4);
    for (const auto& s : series) {
        CHECK(s.psi_max <= 1e-10);
        CHECK(s.times.size() == 2049);
        double worst = 0.0;
        for (double v : s.psi) {
            CHECK(v >= 0.0);
            worst = std::max(worst, v);
        }
        CHECK(worst == s.psi_max);
    }
    CHECK(series[0].scale == 1.0);
    CHECK(series[3].scale == 1e-3);

    const PsiSeries edge = psi_series(mathieu_hamiltonian({kEdgeA, 5.0}), RankOneUpdate(vec2(0.4565, 0.0185)), {});
    CHECK(edge.psi_max <= 1e-9);

    const Trajectory a = propagate(stable, {}, kPi, identity(2));
    PropagationConfig other;
    other.steps_per_period = 1024;
    const Trajectory b = propagate(stable, other, kPi, identity(2));
    CHECK_THROWS_AS((void)psi_series(a, b), InternalConsistency);
}

TEST_CASE("property: reconstruction holds pointwise on every built-in system") {
    test::Rng rng(42);
    const std::vector<PeriodicCoefficient> systems{mathieu_hamiltonian({7.0, 4.0}), mathieu_hamiltonian({kEdgeA, 5.0}),
                                                   mathieu_hamiltonian({1.0, 0.0}),
                                                   coupled_triple_hamiltonian(preset_triple())};
    for (const auto& sys : systems) {
        const int d = sys.dimension();
        const StructureMatrix& j = sys.structure();
        const Trajectory x = propagate(sys, {}, sys.period(), identity(d));
        const Monodromy w = monodromy_of(x, j);
        const bool stable = strong_stability_verdict(w, j).stable;
        for (int trial = 0; trial < 3; ++trial) {
            const RankOneUpdate u(rng.vector(d));
            const Trajectory closed = closed_form_perturbed(x, u, j);
            const Trajectory integrated = integrate_perturbed(sys, u, {});
            const double bound = stable ? 1e-10 : 1e-9;
            for (std::size_t k = 0; k < closed.size(); ++k) {
                CHECK(test::norm2(closed.matrices[k] - integrated.matrices[k]) <= bound);
            }
        }
    }
}

TEST_CASE("canonical perturbed system") {
    const PeriodicCoefficient sys = mathieu_hamiltonian({7.0, 4.0});
    const StructureMatrix& j = sys.structure();
    const Trajectory x = propagate(sys, {}, kPi, identity(2));
    const Trajectory zero = canonical_perturbed(sys, RankOneUpdate(Vector::Zero(2)), {});
    for (std::size_t k = 0; k < x.size(); ++k) CHECK((zero.matrices[k] - x.matrices[k]).norm() < 1e-15);

    const RankOneUpdate u(vec2(0.8913, 0.7621));
    const Trajectory canon = canonical_perturbed(sys, u, {});
    const Trajectory shifted = integrate_perturbed(sys, u, {});
    CHECK(canon.matrices.front() == identity(2));
    for (std::size_t k = 0; k < canon.size(); ++k) {
        CHECK(test::norm2(canon.matrices[k] * u.forward(j) - shifted.matrices[k]) <= 1e-10);
    }
    const Matrix predicted = u.forward(j) * x.matrices.back() * inverse_rank_one(u, j);
    CHECK(test::norm2(canon.matrices.back() - predicted) <= 1e-10);
}

TEST_CASE("property: canonical monodromy is similar to the unperturbed one") {
    test::Rng rng(43);
    const std::vector<PeriodicCoefficient> systems{mathieu_hamiltonian({7.0, 4.0}), mathieu_hamiltonian({kEdgeA, 5.0}),
                                                   coupled_triple_hamiltonian(preset_triple())};
    for (const auto& sys : systems) {
        const int d = sys.dimension();
        const Monodromy w = monodromy(sys, {});
        const CVector reference = Eigen::EigenSolver<Matrix>(w.matrix, false).eigenvalues();
        for (int trial = 0; trial < 20; ++trial) {
            const RankOneUpdate u(rng.vector(d));
            const Matrix wt = canonical_perturbed(sys, u, {}).matrices.back();
            const CVector perturbed = Eigen::EigenSolver<Matrix>(wt, false).eigenvalues();
            CHECK(spectrum_distance(perturbed, reference) <= 1e-8);
        }
    }
}

TEST_CASE("lemma 1 identity") {
    const StructureMatrix j = standard_structure_matrix(1);
    const RankOneUpdate u(vec2(1.0, 0.0));
    const Vector y = vec2(0.0, 1.0);
    CHECK(y.dot(s0_matrix(identity(2), j) * y) == 0.0);
    CHECK(y.dot(s0_matrix(apply_rank_one(u, identity(2), j), j) * y) == doctest::Approx(-1.0));
    CHECK(phi_form(identity(2), u, y, j) == doctest::Approx(-1.0));
    CHECK(lemma1_residual(identity(2), u, y, j) == 0.0);

    test::Rng rng(44);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = rng.integer(1, 3);
        const StructureMatrix jn = standard_structure_matrix(n);
        const Matrix w = rng.symplectic(jn.matrix());
        const Vector yy = rng.vector(2 * n);
        CHECK(lemma1_residual(w, RankOneUpdate(Vector::Zero(2 * n)), yy, jn) == 0.0);
        const RankOneUpdate ur(rng.vector(2 * n));
        const double bound = 1e-13 * (1.0 + test::norm2(w) * ur.vector().squaredNorm());
        CHECK(lemma1_residual(w, ur, yy, jn) <= bound);
    }
    CHECK_THROWS_AS((void)lemma1_residual(identity(2), u, Vector::Zero(2), j), InvalidArgument);
    CHECK_THROWS_AS((void)lemma1_residual(identity(2), u, Vector::Ones(4), j), InvalidArgument);
}

TEST_CASE("corollary 1 classification") {
    const StructureMatrix j = standard_structure_matrix(1);
    const Matrix rot = test::rotation(kPi / 2);
    const auto records = multipliers(rot, j);
    test::Rng rng(45);
    for (const auto& r : records) {
        CHECK(corollary1_classify(rot, RankOneUpdate(Vector::Zero(2)), r.eigenvector, j) == r.color);
        for (int trial = 0; trial < 20; ++trial) {
            const RankOneUpdate u(0.1 * rng.vector(2));
            CHECK(corollary1_classify(rot, u, r.eigenvector, j) == r.color);
        }
    }
    for (const auto& r : multipliers(-identity(2), j)) {
        CHECK(corollary1_classify(-identity(2), RankOneUpdate(rng.vector(2)), r.eigenvector, j) == Color::mixed);
    }

    CVector bad(2);
    bad << 1.0, 0.0;
    CHECK_THROWS_AS((void)corollary1_classify(rot, RankOneUpdate(vec2(1, 0)), bad, j), InvalidArgument);
    Matrix hyper(2, 2);
    hyper << 2.0, 0.0, 0.0, 0.5;
    CVector e1(2);
    e1 << 1.0, 0.0;
    CHECK(corollary1_classify(hyper, RankOneUpdate(vec2(1, 0)), e1, j) == Color::off_circle);
}

TEST_CASE("property: corollary 1 agrees with the Definition 2 color") {
    test::Rng rng(46);
    const std::vector<PeriodicCoefficient> systems{mathieu_hamiltonian({7.0, 4.0}), mathieu_hamiltonian({kEdgeA, 5.0}),
                                                   coupled_triple_hamiltonian(preset_triple())};
    for (const auto& sys : systems) {
        const Monodromy w = monodromy(sys, {});
        const StructureMatrix& j = sys.structure();
        const auto records = multipliers(w, j);
        for (int trial = 0; trial < 20; ++trial) {
            const RankOneUpdate u(rng.vector(sys.dimension()), rng.uniform(0.0, 1.0));
            for (const auto& r : records) {
                if (r.color == Color::off_circle) continue;
                CHECK(corollary1_classify(w.matrix, u, r.eigenvector, j) == r.color);
            }
        }
    }
}

TEST_CASE("neighborhood scan") {
    PerturbationExperiment stable{mathieu_hamiltonian({7.0, 4.0}), vec2(0.8913, 0.7621)};
    const NeighborhoodReport report = neighborhood_scan(stable);
    REQUIRE(report.rows.size() == 4);
    CHECK(report.base_verdict.strongly_stable);
    for (std::size_t k = 0; k < report.rows.size(); ++k) {
        const auto& row = report.rows[k];
        CHECK(row.ok());
        CHECK(row.verdict->stable);
        CHECK(row.psi_max.value() <= 1e-10);
        if (k > 0) CHECK(report.rows[k - 1].scale > row.scale);
    }
    CHECK(report.rows[0].e_norm_max.value() == doctest::Approx(9.7118420658827791).epsilon(1e-12));
    CHECK(report.largest_stable_scale.value() == 1.0);

    // The reference trace of this monodromy is below 2: stable, and every
    // tested scale stays stable.
    PerturbationExperiment edge{mathieu_hamiltonian({kEdgeA, 5.0}), vec2(0.4565, 0.0185)};
    const NeighborhoodReport edge_report = neighborhood_scan(edge);
    for (const auto& row : edge_report.rows) {
        CHECK(row.ok());
        CHECK(row.verdict->stable);
        CHECK(row.psi_max.value() <= 1e-9);
    }

    PerturbationExperiment zero = stable;
    zero.scales = {0.0};
    const NeighborhoodReport z = neighborhood_scan(zero);
    REQUIRE(z.rows.size() == 1);
    CHECK(z.rows[0].e_norm_max.value() == 0.0);
    CHECK(z.rows[0].psi_max.value() == 0.0);
    CHECK(*z.rows[0].verdict == z.base_verdict);

    PerturbationExperiment unordered = stable;
    unordered.scales = {0.01, 1.0, 0.1};
    const NeighborhoodReport u = neighborhood_scan(unordered);
    CHECK(u.rows[0].scale == 1.0);
    CHECK(u.rows[2].scale == 0.01);
}

TEST_CASE("neighborhood scan on an unstable system") {
    CoupledTripleParams p = preset_triple();
    p.p = {2.0, 5.0, 15.0};
    p.a = p.b = p.c = p.g = 2.0;
    Vector u(6);
    u << 0.0272, 0.3127, 0.0129, 0.3840, 0.6831, 0.0928;
    const NeighborhoodReport report = neighborhood_scan({coupled_triple_hamiltonian(p), u});
    CHECK_FALSE(report.base_verdict.stable);
    for (const auto& row : report.rows) {
        REQUIRE(row.ok());
        CHECK_FALSE(row.verdict->stable);
        CHECK(row.psi_max.value() <= 1e-9);
    }
    CHECK_FALSE(report.largest_stable_scale.has_value());
}

TEST_CASE("failed rows are recorded and the scan continues") {
    PerturbationExperiment ex{mathieu_hamiltonian({7.0, 4.0}), vec2(1.0, 1.0)};
    ex.scales = {1e80, 1.0};
    const NeighborhoodReport report = neighborhood_scan(ex);
    REQUIRE(report.rows.size() == 2);
    CHECK_FALSE(report.rows[0].ok());
    CHECK(report.rows[1].ok());
    CHECK(report.largest_stable_scale.value() == 1.0);
}

TEST_CASE("experiment validation") {
    PerturbationExperiment ex{mathieu_hamiltonian({7.0, 4.0}), Vector::Ones(4)};
    CHECK_THROWS_AS(ex.validate(), InvalidArgument);
    ex.u = Vector::Ones(2);
    ex.scales = {};
    CHECK_THROWS_AS(ex.validate(), InvalidArgument);
    ex.scales = {1.0, -0.1};
    CHECK_THROWS_AS(ex.validate(), InvalidParameter);
    ex.scales = {std::numeric_limits<double>::infinity()};
    CHECK_THROWS_AS(ex.validate(), InvalidParameter);
}
