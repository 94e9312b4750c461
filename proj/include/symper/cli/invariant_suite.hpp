#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "symper/integrator.hpp"
#include "symper/spectral.hpp"
#include "symper/system_model.hpp"

namespace symper::cli {

struct InvariantResult {
    std::string name;
    double value = 0.0;  // worst measured value
    double bound = 0.0;
    bool pass = false;
    bool skipped = false;  // does not apply to this system; counts as a pass
    std::string note;
};

struct InvariantReport {
    std::vector<InvariantResult> results;

    [[nodiscard]] bool all_pass() const;
    [[nodiscard]] std::vector<std::string> failures() const;
};

struct InvariantSuiteOptions {
    PropagationConfig propagation;
    StabilityTolerances tolerances;
    Vector u;  // empty: draw one from the seed
    std::uint64_t seed = 20170101;
    int trials = 100;
    int similarity_trials = 20;
};

/// Runs the structural and perturbation identities on one system.
/// Numerical failures propagate as exceptions.
[[nodiscard]] InvariantReport run_invariant_suite(const PeriodicCoefficient& system,
                                                  const InvariantSuiteOptions& options);

/// Columns: invariant, value, bound, status.
void print_invariant_table(std::ostream& out, const InvariantReport& report);

/// Smallest total |a_k - b_pi(k)| over permutations pi, returned as the worst single distance.
[[nodiscard]] double match_spectra(const CVector& a, const CVector& b);

}  // namespace symper::cli
