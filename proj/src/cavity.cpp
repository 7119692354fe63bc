#include "mim/cavity.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mim {

namespace {

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be finite");
}

void check_geometry(double xi_L, double delta0) {
    require_finite(xi_L, "xi_L");
    require_finite(delta0, "delta0");
    if (!(xi_L > 0.0)) throw std::invalid_argument("xi_L must be positive");
    if (!(delta0 > 0.0 && delta0 < xi_L))
        throw std::invalid_argument("delta0 must lie in (0, xi_L)");
}

}  // namespace

CavityConfig make_config(double xi_L, double delta0, double chi0) {
    check_geometry(xi_L, delta0);
    require_finite(chi0, "chi0");
    if (chi0 < 0.0) throw std::invalid_argument("chi0 must be nonnegative");
    return CavityConfig{xi_L, delta0, chi0, std::sqrt(1.0 + kFourPi * chi0)};
}

CavityConfig make_config_alpha(double xi_L, double delta0, double alpha) {
    check_geometry(xi_L, delta0);
    require_finite(alpha, "alpha");
    if (alpha < 1.0) throw std::invalid_argument("alpha must be >= 1");
    // Keep the exact alpha the caller asked for; chi0 is derived from it.
    return CavityConfig{xi_L, delta0, chi0_from_alpha(alpha), alpha};
}

double chi0_from_alpha(double alpha) { return (alpha * alpha - 1.0) / kFourPi; }

double beta_of(const CavityConfig& cfg, double q0) {
    const double half = 0.5 * cfg.delta0;
    if (!(q0 >= half && q0 <= cfg.xi_L - half))
        throw std::invalid_argument("q0 outside [delta0/2, xi_L - delta0/2]");
    return (q0 - half) / cfg.xi_L;
}

double q0_of(const CavityConfig& cfg, double beta) {
    if (!(beta >= 0.0 && beta <= 1.0 - cfg.delta0 / cfg.xi_L))
        throw std::invalid_argument("beta outside [0, 1 - delta0/xi_L]");
    return beta * cfg.xi_L + 0.5 * cfg.delta0;
}

MembranePosition position_from_q0(const CavityConfig& cfg, double q0) {
    return MembranePosition{q0, beta_of(cfg, q0)};
}

MembranePosition position_from_beta(const CavityConfig& cfg, double beta) {
    return MembranePosition{q0_of(cfg, beta), beta};
}

double susceptibility(const CavityConfig& cfg, const MembranePosition& pos, double xi) {
    return std::abs(xi - pos.q0) < 0.5 * cfg.delta0 ? cfg.chi0 : 0.0;
}

double dielectric(const CavityConfig& cfg, const MembranePosition& pos, double xi) {
    return std::abs(xi - pos.q0) < 0.5 * cfg.delta0 ? cfg.alpha * cfg.alpha : 1.0;
}

}  // namespace mim
