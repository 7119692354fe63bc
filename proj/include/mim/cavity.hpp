#pragma once

// Static geometry of a 1-D cavity with perfect mirrors at xi = 0 and
// xi = xi_L and a dielectric slab of constant susceptibility. Everything
// is nondimensional: lengths in units of lambda0, times in units of 1/nu0.

#include <numbers>

namespace mim {

inline constexpr double kFourPi = 4.0 * std::numbers::pi;

struct CavityConfig {
    double xi_L = 0.0;    ///< cavity length
    double delta0 = 0.0;  ///< slab width
    double chi0 = 0.0;    ///< slab susceptibility
    double alpha = 1.0;   ///< sqrt(1 + 4 pi chi0), cached alongside chi0
};

/// Slab midpoint q0 together with beta = (q0 - delta0/2) / xi_L.
struct MembranePosition {
    double q0 = 0.0;
    double beta = 0.0;

    /// Left slab edge, q0 - delta0/2 (= beta * xi_L).
    [[nodiscard]] double left_edge(const CavityConfig& cfg) const { return q0 - 0.5 * cfg.delta0; }
    [[nodiscard]] double right_edge(const CavityConfig& cfg) const { return q0 + 0.5 * cfg.delta0; }
};

/// Validates the parameter domain and fills in alpha.
/// Throws std::invalid_argument on xi_L <= 0, delta0 outside (0, xi_L),
/// chi0 < 0 or any non-finite input.
CavityConfig make_config(double xi_L, double delta0, double chi0);

/// Same, parametrized by the refractive factor alpha >= 1.
CavityConfig make_config_alpha(double xi_L, double delta0, double alpha);

double chi0_from_alpha(double alpha);

double beta_of(const CavityConfig& cfg, double q0);
double q0_of(const CavityConfig& cfg, double beta);

/// Position from a midpoint; throws std::invalid_argument outside
/// [delta0/2, xi_L - delta0/2].
MembranePosition position_from_q0(const CavityConfig& cfg, double q0);
MembranePosition position_from_beta(const CavityConfig& cfg, double beta);

/// chi0 strictly inside the slab, 0 elsewhere (edges included).
double susceptibility(const CavityConfig& cfg, const MembranePosition& pos, double xi);

/// 1 + 4 pi chi(xi); either 1 or alpha^2.
double dielectric(const CavityConfig& cfg, const MembranePosition& pos, double xi);

}  // namespace mim
