#pragma once

// Exact piecewise cavity modes (and their first-order thin-slab form),
// normalized in the epsilon-weighted product
//   (f, g)_eps = int_0^xi_L eps(xi - q0) f(xi) g(xi) d xi.

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mim/cavity.hpp"
#include "mim/quadrature.hpp"

namespace mim {

/// amp * sin(omega * (slope * xi + offset + edge * x_left) + shift), with
/// x_left = q0 - delta0/2. Every branch of the mode is a short sum of these.
struct SineTerm {
    double amp = 0.0;
    double slope = 0.0;
    double offset = 0.0;
    double edge = 0.0;
    double shift = 0.0;
};

/// Unnormalized mode G^ for a given omega, split into left / slab / right
/// branches. For an arbitrary omega this is the solution with G(0) = 0 and
/// G'(0) = omega; it vanishes at xi_L only when omega is an eigenfrequency.
class ModeShape {
public:
    ModeShape() = default;

    /// Exact three-branch form.
    static ModeShape exact(const CavityConfig& cfg, const MembranePosition& pos, double omega);

    /// Right branch replaced by its first-order expansion in delta0.
    static ModeShape thin(const CavityConfig& cfg, const MembranePosition& pos, double omega);

    /// 0 left of the slab (xi <= x_left), 1 inside, 2 right of it.
    [[nodiscard]] int region(double xi) const;

    [[nodiscard]] double value(double xi) const;
    [[nodiscard]] double d_xi(double xi) const;
    [[nodiscard]] double d2_xi(double xi) const;
    /// Partial derivatives at fixed xi. Only meaningful for exact shapes,
    /// whose amplitudes do not depend on omega.
    [[nodiscard]] double d_omega(double xi) const;
    [[nodiscard]] double d_edge(double xi) const;

    /// Value from one branch's formula regardless of where xi lies.
    [[nodiscard]] double branch_value(int region, double xi) const;
    [[nodiscard]] double branch_d_xi(int region, double xi) const;

    [[nodiscard]] std::span<const SineTerm> terms(int region) const { return branches_[region]; }
    [[nodiscard]] double omega() const { return omega_; }
    [[nodiscard]] double left_edge() const { return x_left_; }
    [[nodiscard]] double right_edge() const { return x_right_; }

private:
    double omega_ = 0.0;
    double x_left_ = 0.0;
    double x_right_ = 0.0;
    std::array<std::vector<SineTerm>, 3> branches_;
};

/// The three smooth pieces of [0, xi_L] with their local wavenumbers.
std::array<Region, 3> cavity_regions(const CavityConfig& cfg, const MembranePosition& pos, double omega);

/// int eps |G^|^2 by piecewise quadrature split at the slab edges.
double norming_coefficient(const CavityConfig& cfg, const MembranePosition& pos, const ModeShape& shape,
                           const QuadratureSpec& spec = {});
double norming_coefficient(const CavityConfig& cfg, const MembranePosition& pos, double omega,
                           const QuadratureSpec& spec = {});

/// Value of the unnormalized mode at xi for a solved root omega.
double unnormalized_mode_value(const CavityConfig& cfg, const MembranePosition& pos, double omega, double xi);

struct ModeSolution {
    int n = 0;
    double omega = 0.0;
    CavityConfig cfg;
    MembranePosition pos;
    ModeShape shape;
    double norming = 1.0;

    [[nodiscard]] double value(double xi) const;
    [[nodiscard]] double d_xi(double xi) const;
    [[nodiscard]] double d2_xi(double xi) const;
    double operator()(double xi) const { return value(xi); }
};

ModeSolution mode_from_frequency(const CavityConfig& cfg, const MembranePosition& pos, int n, double omega,
                                 const QuadratureSpec& spec = {});

/// n-th normalized mode (solves the spectrum up to n).
ModeSolution mode(const CavityConfig& cfg, const MembranePosition& pos, int n, const QuadratureSpec& spec = {});

/// Modes 1..count sharing one spectrum solve.
std::vector<ModeSolution> modes(const CavityConfig& cfg, const MembranePosition& pos, int count,
                                const QuadratureSpec& spec = {});

/// Same, continuing frequencies from `guesses` (index-aligned).
std::vector<ModeSolution> modes_near(const CavityConfig& cfg, const MembranePosition& pos,
                                     std::span<const double> guesses, const QuadratureSpec& spec = {});

/// (f, g)_eps. `wavenumber` sizes the initial rule (vacuum wavenumber of
/// the fastest oscillation in f g).
double inner_product(const CavityConfig& cfg, const MembranePosition& pos, const std::function<double(double)>& f,
                     const std::function<double(double)>& g, double wavenumber = 0.0,
                     const QuadratureSpec& spec = {});

// --- derivative with respect to the slab position ----------------------------

enum class QDerivativeMethod {
    FiniteDifference,  ///< central differences, re-solving omega_n at shifted positions
    Analytic,          ///< branch-wise chain rule with implicit d omega / d q0
};

/// d G_n / d q0 as a function of xi.
///
/// FiniteDifference: [G_n(xi, q0 + h) - G_n(xi, q0 - h)] / 2h with the
/// frequency re-solved (warm-started) at each shift; when `richardson` is
/// set the h/2 quotient is combined as (4 D_{h/2} - D_h) / 3.
/// Throws std::invalid_argument when q0 +- h leaves the admissible range.
std::function<double(double)> mode_derivative_q(const CavityConfig& cfg, const MembranePosition& pos, int n,
                                                double h, bool richardson = true,
                                                const QuadratureSpec& spec = {});

/// Analytic d G_n / d q0 for an already solved mode:
///   dG/dq = (dG^/domega * omega' + dG^/dx_left) / sqrt(N) - G^ N' / (2 N^{3/2}),
/// with N' including the boundary terms of the moving slab edges.
class ModeQDerivative {
public:
    ModeQDerivative(const ModeSolution& mode, const QuadratureSpec& spec = {});

    [[nodiscard]] double operator()(double xi) const;
    [[nodiscard]] double domega_dq() const { return domega_dq_; }
    [[nodiscard]] double dnorming_dq() const { return dnorm_dq_; }

private:
    ModeSolution mode_;
    double domega_dq_ = 0.0;
    double dnorm_dq_ = 0.0;
};

inline double default_q_step(const CavityConfig& cfg) { return 1e-5 * cfg.xi_L; }

// --- thin slab -----------------------------------------------------------------

struct ThinModeSolution {
    int n = 0;
    double omega = 0.0;  ///< exact omega_n
    CavityConfig cfg;
    MembranePosition pos;
    ModeShape shape;
    double norming = 1.0;             ///< closed-form first-order norming
    double norming_quadrature = 1.0;  ///< quadrature of the thin shape
    double taylor_bound = 0.0;        ///< 1/2 alpha (alpha^2 - 1) (omega delta0)^2
    double frequency_bound = 0.0;     ///< Delta_n
    std::vector<std::string> warnings;

    [[nodiscard]] double value(double xi) const;
    double operator()(double xi) const { return value(xi); }
};

/// Closed-form first-order norming coefficient N_{n,l} (the square of the
/// published square-root expression).
double thin_norming_closed_form(const CavityConfig& cfg, const MembranePosition& pos, double omega);

ThinModeSolution thin_mode(const CavityConfig& cfg, const MembranePosition& pos, int n,
                           const QuadratureSpec& spec = {});

}  // namespace mim
