#pragma once

#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "symper/integrator.hpp"
#include "symper/symplectic_core.hpp"

namespace symper {

enum class Kind { first, second, mixed, off_circle };
enum class Color { red, green, mixed, off_circle };

[[nodiscard]] std::string_view to_string(Kind kind);
[[nodiscard]] std::string_view to_string(Color color);
[[nodiscard]] Kind parse_kind(std::string_view text);
[[nodiscard]] Color parse_color(std::string_view text);

inline constexpr double kInfiniteGap = std::numeric_limits<double>::infinity();

struct StabilityTolerances {
    double circle = 1e-6;          // | |lambda| - 1 | allowed on the unit circle
    double form_relative = 1e-8;   // Gram tolerance = form_relative * ||J|| (kind) or ||W|| (color)
    double cluster_radius = 1e-7;  // eigenvalues closer than this form one cluster
    double rank_threshold = 1e-8;  // relative singular-value cut for geometric multiplicity
    double gap_floor = 1e-6;
    double psd_relative = 1e-9;    // definiteness tolerance = psd_relative * ||S0||
    double projector = 1e-8;       // completeness / cross residual bound
    double imaginary = 1e-9;       // allowed imaginary residue of real projectors
    S0Form s0_form = S0Form::jw;

    bool operator==(const StabilityTolerances&) const = default;
};

struct MultiplierRecord {
    Complex value;
    double modulus = 0.0;
    CVector eigenvector;  // unit 2-norm
    Kind kind = Kind::off_circle;
    Color color = Color::off_circle;
    double kind_form = 0.0;   // x^* iJ x
    double color_form = 0.0;  // x^* S0 x
    int cluster = 0;          // index of the eigenvalue cluster this record belongs to
    int cluster_size = 1;
    bool semi_simple = true;  // geometric == algebraic multiplicity of the cluster
};

/// All 2N eigenpairs of W, ordered by argument then modulus.
///
/// Eigenvalues within cluster_radius are grouped; a cluster's eigenspace is the
/// numerical null space of W - mean(lambda) I, and unit-circle clusters are
/// labeled by the definiteness of iJ and S0 restricted to that space. For a
/// simple eigenvalue this is the sign of the scalar form.
[[nodiscard]] std::vector<MultiplierRecord> multipliers(const Matrix& w, const StructureMatrix& j,
                                                        const StabilityTolerances& tol = {});
[[nodiscard]] std::vector<MultiplierRecord> multipliers(const Monodromy& w, const StructureMatrix& j,
                                                        const StabilityTolerances& tol = {});

/// min |l_k - l_l| over pairs of different kinds; +inf if a class is empty, 0 if any is mixed.
[[nodiscard]] double gap_kind(const std::vector<MultiplierRecord>& records);
/// As gap_kind, over red/green classes.
[[nodiscard]] double gap_color(const std::vector<MultiplierRecord>& records);

struct SpectralSplit {
    Matrix p_red;
    Matrix p_green;
    Matrix s_red;
    Matrix s_green;
    double completeness_residual = 0.0;  // ||P_r + P_g - I||
    double cross_residual = 0.0;         // ||P_r^T S0 P_g||
};

/// Spectral projectors onto the red and green invariant subspaces, P = V D V^-1.
[[nodiscard]] SpectralSplit spectral_split(const Matrix& w, const StructureMatrix& j,
                                           const std::vector<MultiplierRecord>& records,
                                           const StabilityTolerances& tol = {});

struct Criterion {
    bool pass = false;
    std::optional<double> value;  // nullopt when the facet does not apply
    double bound = 0.0;

    bool operator==(const Criterion&) const = default;
};

struct StabilityVerdict {
    bool stable = false;
    bool strongly_stable = false;
    std::optional<double> delta_kgl;    // nullopt: not applicable (off-circle spectrum)
    std::optional<double> delta_color;  // +inf: one class empty
    double max_modulus = 0.0;

    Criterion unit_circle;     // max | |lambda| - 1 |
    Criterion semi_simple;     // number of defective unit-circle clusters
    Criterion no_mixed_color;  // number of mixed-color multipliers
    Criterion color_gap;       // delta_S against gap_floor
    Criterion definiteness;    // lambda_min(S_r - S_g), with the two below
    std::optional<double> min_eig_s_red;
    std::optional<double> max_eig_s_green;
    Criterion projector;       // max(completeness, cross) residual
    std::optional<double> completeness_residual;
    std::optional<double> cross_residual;
    Criterion kgl;             // no mixed kind and delta_KGL above gap_floor (diagnostic)

    StabilityTolerances tolerances;

    bool operator==(const StabilityVerdict&) const = default;
};

[[nodiscard]] StabilityVerdict strong_stability_verdict(const Matrix& w, const StructureMatrix& j,
                                                        const StabilityTolerances& tol = {});
[[nodiscard]] StabilityVerdict strong_stability_verdict(const Monodromy& w, const StructureMatrix& j,
                                                        const StabilityTolerances& tol = {});

}  // namespace symper
