// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when any
// criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "../unit/test_support.hpp"
#include "symper/cli/commands.hpp"
#include "symper/cli/run_config.hpp"
#include "symper/integrator.hpp"
#include "symper/perturbation_lab.hpp"
#include "symper/serialization.hpp"
#include "symper/spectral.hpp"
#include "symper/system_model.hpp"

using namespace symper;
namespace fs = std::filesystem;

namespace {

using test::kPi;
const fs::path kPresets = SYMPER_PRESET_DIR;
constexpr double kA16 = 16.1916618724166685;

struct Outcome {
    bool pass = false;
    std::string detail;
};

fs::path scratch() {
    static const fs::path dir = [] {
        std::random_device rd;
        fs::path d = fs::temp_directory_path() / ("symper_acceptance_" + std::to_string(rd()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

Json cli_json(std::vector<std::string> args, const std::string& name, int* code) {
    const fs::path out = scratch() / name;
    args.push_back("--out-json");
    args.push_back(out.string());
    std::ostringstream sink;
    *code = cli::run_cli(args, sink, sink);
    std::ifstream in(out);
    if (!in) return Json();
    return Json::parse(in);
}

std::string preset(const char* name) { return (kPresets / name).string(); }

Matrix identity(Eigen::Index n) { return Matrix::Identity(n, n); }

double relative(const Matrix& a, const Matrix& b) { return test::norm2(a - b) / std::max(1.0, test::norm2(b)); }

// Smallest max pairwise distance over all pairings.
double spectrum_distance(const CVector& a, const CVector& b) {
    std::vector<int> perm(static_cast<std::size_t>(b.size()));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double worst = 0.0;
        for (Eigen::Index i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a(i) - b(perm[i])));
        best = std::min(best, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

PeriodicCoefficient random_system(test::Rng& rng, int n) {
    std::vector<Matrix> samples;
    for (int k = 0; k < 5; ++k) samples.push_back(rng.symmetric(2 * n));
    return sampled_hamiltonian(2.0, samples, "random");
}

Outcome c1() {
    int code = 0;
    const Json doc = cli_json({"analyze", "--system", "mathieu", "--param", "a=7", "--param", "b=4"}, "c1.json", &code);
    if (doc.is_null()) return {false, fmt::format("analyze exit {}", code)};
    double worst = 0.0;
    int mixed = 0;
    for (const auto& m : doc["multipliers"]) {
        worst = std::max(worst, std::abs(m["modulus"].get<double>() - 1.0));
        if (m["color"] == "mixed") ++mixed;
    }
    const bool strong = doc["verdict"]["strongly_stable"].get<bool>();
    return {worst <= 1e-6 && mixed == 0 && strong && code == 0,
            fmt::format("max||lambda|-1|={:.3g} mixed={} strongly_stable={}", worst, mixed, strong)};
}

Outcome c2() {
    int code = 0;
    const Json doc = cli_json({"analyze", "--system", "mathieu", "--param", fmt::format("a={:.17g}", kA16), "--param",
                               "b=5"},
                              "c2.json", &code);
    if (doc.is_null()) return {false, fmt::format("analyze exit {}", code)};
    const double max_modulus = doc["verdict"]["max_modulus"].get<double>();
    const bool stable = doc["verdict"]["stable"].get<bool>();
    const Matrix& w = monodromy(mathieu_hamiltonian({kA16, 5.0}), {}).matrix;
    return {max_modulus > 1.0 + 1e-6 && !stable,
            fmt::format("max_modulus={:.17g} stable={} trace={:.15g}", max_modulus, stable, w.trace())};
}

Outcome c3() {
    int code = 0;
    const Json doc = cli_json({"perturb", "--config", preset("mathieu_a7_b4.cfg")}, "c3.json", &code);
    if (doc.is_null() || doc["rows"].size() != 4) return {false, fmt::format("perturb exit {}", code)};
    double worst = 0.0;
    for (const auto& row : doc["rows"]) {
        if (row["psi_max"].is_null()) return {false, "row failed"};
        worst = std::max(worst, row["psi_max"].get<double>());
    }
    return {worst <= 1e-10 && code == 0, fmt::format("max psi_max over 4 scales={:.3g}", worst)};
}

Outcome c4() {
    auto scan = [](double a, double b, const Vector& u) {
        PerturbationExperiment e{mathieu_hamiltonian({a, b}), u};
        return neighborhood_scan(e);
    };
    Vector u7(2);
    u7 << 0.8913, 0.7621;
    Vector u16(2);
    u16 << 0.4565, 0.0185;
    const NeighborhoodReport stable = scan(7.0, 4.0, u7);
    const NeighborhoodReport unstable = scan(kA16, 5.0, u16);
    int stable_ok = 0;
    int unstable_ok = 0;
    for (const auto& row : stable.rows) stable_ok += row.verdict && row.verdict->stable;
    for (const auto& row : unstable.rows) unstable_ok += row.verdict && !row.verdict->stable;
    return {stable_ok == 4 && unstable_ok == 4,
            fmt::format("stable case {}/4 stable; unstable case {}/4 unstable", stable_ok, unstable_ok)};
}

Outcome c5() {
    const PeriodicCoefficient sys = mathieu_hamiltonian({1.0, 0.0});
    const Monodromy w = monodromy(sys, {});
    const double end = test::norm2(w.matrix + identity(2));
    const Trajectory traj = propagate(sys, {}, kPi, identity(2));
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        worst = std::max(worst, test::norm2(traj.matrices[k] - test::rotation(traj.times[k])));
    }
    return {end <= 1e-10 && worst <= 1e-10, fmt::format("||W+I||={:.3g} max trajectory error={:.3g}", end, worst)};
}

Outcome c6() {
    test::Rng rng(20170101);
    double lemma = 0.0;
    double inverse = 0.0;
    double congruence = 0.0;
    double symplectic = 0.0;
    for (int n = 1; n <= 3; ++n) {
        const Matrix j = test::standard_j(n);
        const StructureMatrix sj = standard_structure_matrix(n);
        const PeriodicCoefficient sys = random_system(rng, n);
        for (int trial = 0; trial < 100; ++trial) {
            const Vector u = rng.vector(2 * n);
            const RankOneUpdate update(u);
            const Matrix w = rng.symplectic(j);
            const Vector y = rng.vector(2 * n);
            lemma = std::max(lemma, lemma1_residual(w, update, y, sj) /
                                        (1.0 + test::norm2(w) * u.squaredNorm() * y.squaredNorm()));

            const Matrix t = test::transvection(u, j);
            const Matrix tinv = identity(2 * n) - u * u.transpose() * j;
            inverse = std::max(inverse, test::norm2(update.forward(sj) * inverse_rank_one(update, sj) - identity(2 * n)));
            inverse = std::max(inverse, test::norm2(t * tinv - identity(2 * n)));

            const double time = rng.uniform(0.0, 2.0);
            const Matrix h = sys(time);
            const Matrix oracle = tinv.transpose() * h * tinv;
            congruence = std::max(congruence, relative(h + perturbation_term(update, sys, time), oracle));

            const Matrix tw = apply_rank_one(update, w, sj);
            symplectic = std::max(symplectic, test::norm2(tw.transpose() * j * tw - j) /
                                                  std::max(1.0, test::norm2(tw) * test::norm2(tw)));
        }
    }
    return {lemma <= 1e-13 && inverse <= 1e-13 && congruence <= 1e-13 && symplectic <= 1e-12,
            fmt::format("lemma1={:.3g} inverse={:.3g} H~=H+E={:.3g} rank-one symplecticity={:.3g}", lemma, inverse,
                        congruence, symplectic)};
}

Outcome c7() {
    test::Rng rng(7);
    const cli::RunConfig triple = cli::parse_config_file(kPresets / "coupled_triple_eps15.5_delta1.cfg");
    const std::vector<PeriodicCoefficient> systems{mathieu_hamiltonian({7.0, 4.0}), cli::build_system(triple)};
    double worst = 0.0;
    for (const auto& sys : systems) {
        const CVector base = Eigen::EigenSolver<Matrix>(monodromy(sys, {}).matrix).eigenvalues();
        for (int trial = 0; trial < 20; ++trial) {
            const RankOneUpdate update(rng.vector(sys.dimension()));
            const Trajectory canon = canonical_perturbed(sys, update, {});
            const CVector tilde = Eigen::EigenSolver<Matrix>(canon.matrices.back()).eigenvalues();
            worst = std::max(worst, spectrum_distance(tilde, base));
        }
    }
    return {worst <= 1e-8, fmt::format("max multiplier mismatch over 40 trials={:.3g}", worst)};
}

Outcome c8() {
    int code = 0;
    const Json doc = cli_json({"perturb", "--config", preset("coupled_triple_eps15.5_delta1.cfg")}, "c8.json", &code);
    if (doc.is_null() || doc["rows"].empty()) return {false, fmt::format("perturb exit {}", code)};
    double psi = 0.0;
    double residual = 0.0;
    for (const auto& row : doc["rows"]) {
        if (row["psi_max"].is_null()) return {false, "row failed"};
        psi = std::max(psi, row["psi_max"].get<double>());
        residual = std::max(residual, row["max_residual"].get<double>());
    }
    return {code == 0 && doc["system"]["dimension"] == 6 && psi <= 1e-9 && residual <= 1e-9,
            fmt::format("dimension 6, psi_max={:.3g} residual={:.3g}", psi, residual)};
}

Outcome c9() {
    const PeriodicCoefficient sys = mathieu_hamiltonian({1.0, 0.0});
    auto error = [&](int steps) {
        PropagationConfig cfg;
        cfg.steps_per_period = steps;
        return test::norm2(monodromy(sys, cfg).matrix + identity(2));
    };
    const double e16 = error(16);
    const double e32 = error(32);
    const double ratio = e16 / e32;
    return {ratio >= std::pow(2.0, 5.5), fmt::format("gauss6 error 16 steps={:.3g} 32 steps={:.3g} ratio={:.1f}", e16,
                                                     e32, ratio)};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> check;
    };
    const std::vector<Criterion> criteria{
        {1, "Mathieu a=7 b=4 strongly stable", 1.0, c1},
        {2, "Mathieu a=16.1916618724166685 b=5 unstable", 1.0, c2},
        {3, "psi bound per scale", 5.0, c3},
        {4, "stability persists under perturbation", 10.0, c4},
        {5, "closed-form rotation", 0.0, c5},
        {6, "algebraic identities, N=1..3", 0.0, c6},
        {7, "similarity invariance of multipliers", 0.0, c7},
        {8, "coupled-triple psi experiment", 30.0, c8},
        {9, "gauss6 order check", 0.0, c9},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_s > 0.0 && seconds >= c.budget_s) {
            o.pass = false;
            o.detail += fmt::format(" (over {:.0f} s budget)", c.budget_s);
        }
        failures += o.pass ? 0 : 1;
        std::cout << fmt::format("{} C{} {}: {} [{:.2f} s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail, seconds);
    }
    std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
    std::error_code ec;
    fs::remove_all(scratch(), ec);
    return failures == 0 ? 0 : 1;
}
