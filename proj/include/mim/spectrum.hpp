#pragma once

// Cavity angular frequencies: the exact transcendental frequency equation,
// its first-order thin-slab form, root bracketing with a Sturm (Pruefer)
// count as completeness guard, and the explicit families that solve the
// equation in closed form.

#include <stdexcept>
#include <vector>

#include "mim/cavity.hpp"

namespace mim {

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultRootTol = 1e-12;

/// Left side of the exact frequency equation at (beta, omega). Equals
/// 4 alpha times the unnormalized mode evaluated at the right mirror.
double residual(const CavityConfig& cfg, double beta, double omega);

/// Largest coefficient of the frequency equation, (alpha + 1)^2.
double residual_scale(const CavityConfig& cfg);

/// First-order-in-delta0 form of the frequency equation.
double thin_residual(const CavityConfig& cfg, double beta, double omega);

/// Number of eigenfrequencies strictly below omega, from the Pruefer phase
/// of the solution with G(0) = 0 accumulated across the three regions.
int count_below(const CavityConfig& cfg, const MembranePosition& pos, double omega);

/// Pruefer phase at the right mirror; equals n*pi exactly at omega_n.
double pruefer_phase(const CavityConfig& cfg, const MembranePosition& pos, double omega);

struct Spectrum {
    CavityConfig config;
    MembranePosition pos;
    std::vector<double> omegas;     ///< strictly increasing, omegas[i] = omega_{i+1}
    std::vector<double> residuals;  ///< |residual| at each root
};

/// The `count` smallest positive roots. Roots are bracketed by a uniform
/// scan of step pi / (8 L_opt max(alpha, 1)) with L_opt = xi_L + delta0 (alpha - 1),
/// bisected to width <= tol and polished by one secant step. The Pruefer
/// count between neighbouring roots must match their indices; any interval
/// that fails is rescanned at finer density. Throws NumericalError when a
/// root does not converge or the count cannot be reconciled.
Spectrum solve_spectrum(const CavityConfig& cfg, const MembranePosition& pos, int count,
                        double tol = kDefaultRootTol, double scan_density = 1.0);

/// omega_n refined from a nearby guess (root continuation). The bracket is
/// grown around the guess until it isolates exactly the n-th eigenvalue.
double solve_frequency(const CavityConfig& cfg, const MembranePosition& pos, int n, double guess,
                       double tol = kDefaultRootTol);

/// Warm-started spectrum: previous.omegas are used as guesses, so indices
/// stay aligned with the ordering while sweeping the position.
Spectrum track_spectrum(const CavityConfig& cfg, const MembranePosition& pos, const Spectrum& previous,
                        double tol = kDefaultRootTol);

/// d omega_n / d q0 by implicit differentiation of the frequency equation.
double frequency_slope(const CavityConfig& cfg, const MembranePosition& pos, double omega);

// --- position-independent ("structural") frequencies -----------------------

struct StructuralFrequency {
    int n = 0;
    int k = 0;
    double omega = 0.0;           ///< (n alpha + k) pi / (xi_L alpha)
    double delta_required = 0.0;  ///< xi_L k / (n alpha + k)
};

StructuralFrequency structural_frequency(double xi_L, double alpha, int n, int k);

/// All (n, k) with n <= n_max, k <= k_max, sorted by omega (ties by n).
std::vector<StructuralFrequency> structural_set(const CavityConfig& cfg, int n_max, int k_max);

/// Members of structural_set whose mandated width equals cfg.delta0.
std::vector<StructuralFrequency> structural_for_width(const CavityConfig& cfg, int n_max, int k_max,
                                                      double rel_tol = 1e-12);

struct StructuralReport {
    StructuralFrequency sf;
    double max_residual = 0.0;     ///< max over the grid of |residual(beta, omega)|
    double worst_beta = 0.0;
    bool in_every_spectrum = true; ///< omega found among the solved roots at each beta
    bool pass = false;
};

/// Uniform grid of `points` values strictly inside (0, 1 - delta0/xi_L).
std::vector<double> interior_beta_grid(const CavityConfig& cfg, int points);

/// Checks that sf.omega solves the frequency equation at every beta of the
/// grid. cfg.delta0 must equal sf.delta_required (std::invalid_argument).
StructuralReport verify_structural(const CavityConfig& cfg, const StructuralFrequency& sf,
                                   const std::vector<double>& beta_grid, double tol = 1e-10);

// --- centred slab: explicit solutions ---------------------------------------

struct MidpointSolution {
    int n = 0;
    double gamma = 0.0;
    double delta_n = 0.0;
    double omega_n = 0.0;
};

/// n = 0..n_max. Only alpha and xi_L of cfg are used.
std::vector<MidpointSolution> midpoint_family(double xi_L, double alpha, int n_max);

// --- spectral bounds ---------------------------------------------------------

struct BoundsReport {
    double fundamental_margin = 0.0;  ///< pi/xi_L - omega_1
    double structural_margin = 0.0;   ///< min over set of omega_nk - omega_1 - pi/(xi_L alpha)
    std::vector<StructuralFrequency> violations;
    bool fundamental_ok = false;
    bool pass = false;
};

BoundsReport spectral_bounds_check(const CavityConfig& cfg, const Spectrum& spectrum,
                                   const std::vector<StructuralFrequency>& structural,
                                   double tol = 1e-12);

// --- thin membrane ------------------------------------------------------------

struct ApproxFrequency {
    double omega_na = 0.0;
    double d_n = 0.0;
};

ApproxFrequency approx_frequency(const CavityConfig& cfg, double beta, int n);

/// Upper bound 2 alpha (alpha^2 - 1) (omega delta0)^2 on the error of the
/// thin-slab frequency equation.
double error_bound(const CavityConfig& cfg, double omega);

struct ThinExplicitSolution {
    double omega = 0.0;
    double beta = 0.0;
};

/// omega = n pi / xi_L at beta = 1 - k/n; requires delta0/xi_L < k/n < 1.
ThinExplicitSolution explicit_thin_solutions(const CavityConfig& cfg, int n, int k);

struct ComparisonRow {
    int n = 0;
    double omega = 0.0;
    double omega_a = 0.0;
    double delta_bound = 0.0;
    double percent = 0.0;  ///< 100 (omega - omega_a) / omega
};

std::vector<ComparisonRow> comparison_table(const CavityConfig& cfg, double beta, int count,
                                            double tol = kDefaultRootTol);

}  // namespace mim
