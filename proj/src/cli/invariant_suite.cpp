#include "symper/cli/invariant_suite.hpp"

#include "symper/errors.hpp"
#include "symper/perturbation_lab.hpp"
#include "symper/serialization.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <random>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace symper::cli {

namespace {

class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

    Vector vector(Eigen::Index n, double radius = 1.0) {
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            v(i) = uniform(-radius, radius);
        }
        return v;
    }

    Matrix symmetric(Eigen::Index n) {
        Matrix a(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index k = 0; k < n; ++k) {
                a(i, k) = uniform(-1.0, 1.0);
            }
        }
        return 0.5 * (a + a.transpose());
    }

    /// Product of three random symplectic transvections.
    Matrix symplectic(const StructureMatrix& j) {
        Matrix w = Matrix::Identity(j.dimension(), j.dimension());
        for (int k = 0; k < 3; ++k) {
            w = apply_rank_one(RankOneUpdate(vector(j.dimension())), w, j);
        }
        return w;
    }

    int half_dimension() { return std::uniform_int_distribution<int>(1, 3)(rng_); }

private:
    std::mt19937_64 rng_;
};

struct Tracker {
    InvariantResult result;

    Tracker(std::string name, double bound) {
        result.name = std::move(name);
        result.bound = bound;
        result.pass = true;
    }

    /// Records value <= bound * scale as the normalized ratio value / scale.
    void observe(double value, double scale = 1.0) {
        const double normalized = value / scale;
        if (!(normalized <= result.bound)) {
            result.pass = false;
        }
        if (!std::isnan(result.value) && (std::isnan(normalized) || normalized > result.value)) {
            result.value = normalized;
        }
    }
};

InvariantResult skipped(std::string name, double bound, std::string note) {
    InvariantResult r;
    r.name = std::move(name);
    r.bound = bound;
    r.pass = true;
    r.skipped = true;
    r.note = std::move(note);
    return r;
}

double relative_scale(double norm) { return std::max(1.0, norm); }

CVector eigenvalues_of(const Matrix& w) { return Eigen::EigenSolver<Matrix>(w, false).eigenvalues(); }

}  // namespace

bool InvariantReport::all_pass() const {
    return std::all_of(results.begin(), results.end(), [](const InvariantResult& r) { return r.pass; });
}

std::vector<std::string> InvariantReport::failures() const {
    std::vector<std::string> out;
    for (const auto& r : results) {
        if (!r.pass) {
            out.push_back(r.name);
        }
    }
    return out;
}

double match_spectra(const CVector& a, const CVector& b) {
    if (a.size() != b.size()) {
        throw InvalidArgument("match_spectra: spectra have different sizes");
    }
    std::vector<int> perm(static_cast<std::size_t>(b.size()));
    std::iota(perm.begin(), perm.end(), 0);
    double best_total = std::numeric_limits<double>::infinity();
    double best_worst = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        double worst = 0.0;
        for (Eigen::Index k = 0; k < a.size(); ++k) {
            const double d = std::abs(a(k) - b(perm[static_cast<std::size_t>(k)]));
            total += d;
            worst = std::max(worst, d);
        }
        if (total < best_total) {
            best_total = total;
            best_worst = worst;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best_worst;
}

InvariantReport run_invariant_suite(const PeriodicCoefficient& system, const InvariantSuiteOptions& options) {
    options.propagation.validate();
    const StructureMatrix& j = system.structure();
    const int dim = system.dimension();
    const double period = system.period();
    Sampler sampler(options.seed);
    InvariantReport report;

    Vector u = options.u;
    if (u.size() == 0) {
        u = sampler.vector(dim);
    }
    if (u.size() != dim) {
        throw InvalidArgument(fmt::format("perturbation vector has length {}, system needs {}", u.size(), dim));
    }
    const RankOneUpdate update(u);

    {
        Tracker sym("coefficient.symmetry", 1e-14);
        Tracker per("coefficient.periodicity", 1e-12);
        for (int k = 0; k < 64; ++k) {
            const double t = period * k / 64.0 + 0.1234 * period / 64.0;
            const Matrix h = system(t);
            const double scale = relative_scale(spectral_norm(h));
            sym.observe(spectral_norm(Matrix(h - h.transpose())), scale);
            per.observe(spectral_norm(Matrix(system(t + period) - h)), scale);
        }
        report.results.push_back(sym.result);
        report.results.push_back(per.result);
    }

    const Trajectory x = propagate(system, options.propagation, period, Matrix::Identity(dim, dim));
    const Monodromy w = monodromy_of(x, j, system.label());
    const double w_norm = spectral_norm(w.matrix);

    if (is_symplectic(options.propagation.method)) {
        Tracker t("trajectory.symplecticity", 1e-10);
        t.observe(x.max_residual());
        report.results.push_back(t.result);
    } else {
        report.results.push_back(skipped("trajectory.symplecticity", 1e-10,
                                         fmt::format("{} is not structure preserving", to_string(x.config.method))));
    }
    {
        Tracker t("monodromy.determinant", 1e-8);
        t.observe(std::abs(w.matrix.determinant() - 1.0));
        report.results.push_back(t.result);
    }
    {
        PropagationConfig fine = options.propagation;
        fine.steps_per_period *= 2;
        const Monodromy w_fine = monodromy(system, fine);
        Tracker t("monodromy.step_convergence", 1e-8);
        t.observe(spectral_norm(Matrix(w.matrix - w_fine.matrix)), relative_scale(w_norm));
        t.result.note = fmt::format("against {} steps", fine.steps_per_period);
        report.results.push_back(t.result);
    }

    Tracker rank_sym("rank_one.symplecticity", 1e-12);
    Tracker inverse("rank_one.inverse", 1e-13);
    Tracker congruence("perturbation.congruence", 1e-13);
    Tracker e_sym("perturbation.symmetry", 1e-14);
    Tracker lemma("lemma1.identity", 1e-13);
    for (int trial = 0; trial < options.trials; ++trial) {
        const StructureMatrix jr = standard_structure_matrix(sampler.half_dimension());
        const Matrix wr = sampler.symplectic(jr);
        const RankOneUpdate ur(sampler.vector(jr.dimension()));
        rank_sym.observe(symplecticity_residual(apply_rank_one(ur, wr, jr), jr));
        const Matrix eye = Matrix::Identity(jr.dimension(), jr.dimension());
        inverse.observe(spectral_norm(Matrix(ur.forward(jr) * inverse_rank_one(ur, jr) - eye)));

        const Matrix h = sampler.symmetric(jr.dimension());
        const Matrix tinv = inverse_rank_one(ur, jr);
        const Matrix congruent = tinv.transpose() * h * tinv;
        const PeriodicCoefficient constant("constant", 1.0, jr, [h](double) { return h; });
        const Matrix e = perturbation_term(ur, constant, 0.0);
        congruence.observe(spectral_norm(Matrix(congruent - (h + e))), relative_scale(spectral_norm(congruent)));
        e_sym.observe(spectral_norm(Matrix(e - e.transpose())), relative_scale(spectral_norm(e)));

        const Vector y = sampler.vector(jr.dimension());
        lemma.observe(lemma1_residual(wr, ur, y, jr), 1.0 + spectral_norm(wr) * ur.vector().squaredNorm());
    }
    rank_sym.observe(symplecticity_residual(apply_rank_one(update, w.matrix, j), j));
    inverse.observe(spectral_norm(Matrix(update.forward(j) * inverse_rank_one(update, j) - Matrix::Identity(dim, dim))));
    for (int k = 0; k < 16; ++k) {
        const double t = period * k / 16.0;
        const Matrix h = system(t);
        const Matrix tinv = inverse_rank_one(update, j);
        const Matrix congruent = tinv.transpose() * h * tinv;
        const Matrix e = perturbation_term(update, system, t);
        congruence.observe(spectral_norm(Matrix(congruent - (h + e))), relative_scale(spectral_norm(congruent)));
        e_sym.observe(spectral_norm(Matrix(e - e.transpose())), relative_scale(spectral_norm(e)));
    }
    for (int k = 0; k < dim; ++k) {
        lemma.observe(lemma1_residual(w.matrix, update, Vector::Unit(dim, k), j),
                      1.0 + w_norm * update.vector().squaredNorm());
    }
    for (auto* t : {&rank_sym, &inverse, &congruence, &e_sym, &lemma}) {
        report.results.push_back(t->result);
    }

    const std::vector<MultiplierRecord> records = multipliers(w, j, options.tolerances);
    const StabilityVerdict verdict = strong_stability_verdict(w, j, options.tolerances);
    {
        const Trajectory closed = closed_form_perturbed(x, update, j);
        const Trajectory integrated = integrate_perturbed(system, update, options.propagation);
        const PsiSeries psi = psi_series(closed, integrated);
        Tracker t("psi.equivalence", verdict.stable ? 1e-10 : 1e-9);
        t.observe(psi.psi_max);
        t.result.note = verdict.stable ? "stable system" : "unstable system";
        report.results.push_back(t.result);

        const double input = x.max_residual();
        const double floor = std::numeric_limits<double>::epsilon();
        Tracker c("closed_form.symplecticity", 10.0);
        c.observe(closed.max_residual(), std::max(input, floor));
        c.result.note = "ratio to input residual";
        report.results.push_back(c.result);
    }
    {
        Tracker t("canonical.similarity", 1e-8);
        const CVector reference = eigenvalues_of(w.matrix);
        for (int trial = 0; trial < options.similarity_trials; ++trial) {
            const RankOneUpdate ur(sampler.vector(dim));
            const Monodromy wt = monodromy_of(canonical_perturbed(system, ur, options.propagation), j);
            t.observe(match_spectra(eigenvalues_of(wt.matrix), reference));
        }
        t.result.note = fmt::format("{} random u", options.similarity_trials);
        report.results.push_back(t.result);
    }
    {
        Tracker t("spectrum.reciprocity", 1e-8);
        const CVector lambda = eigenvalues_of(w.matrix);
        for (Eigen::Index k = 0; k < lambda.size(); ++k) {
            const Complex target = 1.0 / std::conj(lambda(k));
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index m = 0; m < lambda.size(); ++m) {
                best = std::min(best, std::abs(lambda(m) - target));
            }
            t.observe(best, relative_scale(std::abs(target)));
        }
        report.results.push_back(t.result);
    }
    {
        Tracker t("kind.conjugate_pairs", 1e-10);
        int checked = 0;
        for (const auto& r : records) {
            if (r.kind == Kind::off_circle || r.cluster_size != 1) {
                continue;
            }
            const CVector conjugate = r.eigenvector.conjugate();
            const double f = gram_kind(conjugate, j, 0.0).value;
            t.observe(std::abs(f + r.kind_form));
            ++checked;
        }
        if (checked == 0) {
            report.results.push_back(skipped(t.result.name, t.result.bound, "no simple unit-circle multipliers"));
        } else {
            report.results.push_back(t.result);
        }
    }
    {
        const bool applicable = std::all_of(records.begin(), records.end(), [](const MultiplierRecord& r) {
            return r.color == Color::red || r.color == Color::green;
        });
        if (applicable) {
            const SpectralSplit split = spectral_split(w.matrix, j, records, options.tolerances);
            Tracker t("projector.commutation", 1e-8);
            t.observe(spectral_norm(Matrix(split.p_red * w.matrix - w.matrix * split.p_red)), relative_scale(w_norm));
            t.observe(spectral_norm(Matrix(split.p_red * split.p_red - split.p_red)), relative_scale(w_norm));
            report.results.push_back(t.result);
        } else {
            report.results.push_back(
                skipped("projector.commutation", 1e-8, "spectrum is not split into red and green multipliers"));
        }
    }
    {
        InvariantResult r;
        r.name = "corollary1.agreement";
        r.bound = 0.0;
        int disagreements = 0;
        int checked = 0;
        std::vector<RankOneUpdate> updates{update};
        for (int trial = 0; trial < 20; ++trial) {
            updates.emplace_back(sampler.vector(dim), 1e-2);
        }
        for (const auto& ur : updates) {
            for (const auto& rec : records) {
                if (rec.color == Color::off_circle || rec.cluster_size != 1) {
                    continue;
                }
                ++checked;
                if (corollary1_classify(w.matrix, ur, rec.eigenvector, j, options.tolerances) != rec.color) {
                    ++disagreements;
                }
            }
        }
        r.value = disagreements;
        r.pass = disagreements == 0;
        if (checked == 0) {
            r.skipped = true;
            r.note = "no simple unit-circle multipliers";
        } else {
            r.note = fmt::format("{} labels compared", checked);
        }
        report.results.push_back(r);
    }
    return report;
}

void print_invariant_table(std::ostream& out, const InvariantReport& report) {
    out << fmt::format("{:<28} {:>24} {:>12}  {}\n", "invariant", "value", "bound", "status");
    for (const auto& r : report.results) {
        const std::string status = r.skipped ? "skip" : (r.pass ? "pass" : "FAIL");
        out << fmt::format("{:<28} {:>24} {:>12}  {}{}\n", r.name, r.skipped ? std::string("-") : format_number(r.value),
                           fmt::format("{:g}", r.bound), status, r.note.empty() ? "" : "  (" + r.note + ")");
    }
}

}  // namespace symper::cli
