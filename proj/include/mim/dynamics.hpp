#pragma once

// Field dynamics under a prescribed slab trajectory q(tau): coupling
// matrices between instantaneous modes, the truncated Galerkin system
//   c_m'' + omega_m(q)^2 c_m = -sum_n Gamma_mn(q) (2 q' c_n' + q'' c_n),
// the multiple-scales closed form and the norms that compare the two.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mim/cavity.hpp"
#include "mim/modes.hpp"
#include "mim/parallel.hpp"
#include "mim/quadrature.hpp"

namespace mim {

/// Row-major dense square matrix.
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {}

    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }
    [[nodiscard]] int size() const { return n_; }

private:
    int n_ = 0;
    std::vector<double> a_;
};

struct CouplingMatrices {
    int M = 0;
    std::vector<double> omega;  ///< omega_1..omega_M
    SquareMatrix Omega;         ///< (G_m, dG_n/dq)_eps
    SquareMatrix theta;         ///< int 4 pi chi G_m dG_n/dxi
    SquareMatrix Gamma;         ///< Omega + theta

    /// max |Gamma + Gamma^T|.
    [[nodiscard]] double antisymmetry_defect() const;
};

CouplingMatrices coupling_matrices(const CavityConfig& cfg, const MembranePosition& pos, int M,
                                   QDerivativeMethod method = QDerivativeMethod::FiniteDifference,
                                   const QuadratureSpec& spec = {});

/// Same, from modes already solved at pos (modes[i].n == i + 1).
CouplingMatrices coupling_matrices(const std::vector<ModeSolution>& modes,
                                   QDerivativeMethod method = QDerivativeMethod::FiniteDifference,
                                   const QuadratureSpec& spec = {});

// --- trajectories ----------------------------------------------------------------

struct MembraneTrajectory {
    std::function<double(double)> q;
    std::function<double(double)> dq;
    std::function<double(double)> ddq;
    double q_min = 0.0;
    double q_max = 0.0;
    double eps_pert = 0.0;  ///< slow/fast time-scale ratio; descriptive only
    std::string label;
};

/// q(tau) = center - amplitude cos(frequency tau): starts at rest.
MembraneTrajectory oscillating_trajectory(double center, double amplitude, double frequency);

MembraneTrajectory static_trajectory(double q0);

/// q(tau) = 1.2179272 - 0.1 cos(0.01 tau).
MembraneTrajectory default_trajectory();

struct TrajectoryCheck {
    bool in_range = true;
    bool starts_at_rest = true;
    double max_speed = 0.0;
    double max_acceleration = 0.0;
    std::vector<std::string> warnings;
};

/// Samples [0, tau_end]. Warns when sup|q'| or sup|q''| exceed 0.01 or the
/// slab does not start at rest; flags positions outside the cavity.
TrajectoryCheck check_trajectory(const CavityConfig& cfg, const MembraneTrajectory& traj, double tau_end,
                                 int samples = 4001);

// --- coefficient tables -----------------------------------------------------------

/// Source of the tabulated omega_n(q). Gamma always comes from exact modes.
enum class FrequencyModel {
    Exact,       ///< roots of the exact frequency equation
    FirstOrder,  ///< explicit thin-slab approximation omega_{n,a}
};

struct TableOptions {
    int grid_points = 201;
    FrequencyModel frequencies = FrequencyModel::Exact;
    int modes = 10;  ///< omega_n and Gamma_mn for n, m <= modes
    QDerivativeMethod method = QDerivativeMethod::FiniteDifference;
    bool validate = true;           ///< compare against a doubled grid
    double validation_tol = 1e-8;
    int threads = 0;                ///< 0: MIM_THREADS or hardware concurrency
    QuadratureSpec quadrature{};
};

/// omega_n(q), omega_n'(q) and Gamma_mn(q) tabulated on a uniform grid over
/// the trajectory's range and interpolated by cubic B-splines.
class CoefficientTables {
public:
    CoefficientTables(const CavityConfig& cfg, MembraneTrajectory traj, const TableOptions& options = {});
    ~CoefficientTables();
    CoefficientTables(CoefficientTables&&) noexcept;
    CoefficientTables& operator=(CoefficientTables&&) noexcept;

    [[nodiscard]] double omega(int n, double q) const;
    [[nodiscard]] double domega(int n, double q) const;
    [[nodiscard]] double gamma(int m, int n, double q) const;
    /// int_{q_from}^{q_to} Gamma_nn(y) dy.
    [[nodiscard]] double gamma_diagonal_integral(int n, double q_from, double q_to) const;

    [[nodiscard]] const CavityConfig& config() const { return cfg_; }
    [[nodiscard]] const MembraneTrajectory& trajectory() const { return traj_; }
    [[nodiscard]] int modes() const { return options_.modes; }
    [[nodiscard]] double q_lo() const { return q_lo_; }
    [[nodiscard]] double q_hi() const { return q_hi_; }
    /// Largest change of an interpolated value under grid doubling (0 when
    /// validation is off).
    [[nodiscard]] double validation_error() const { return validation_error_; }

    /// Exact modes at q, frequencies continued from the tabulated values.
    [[nodiscard]] std::vector<ModeSolution> modes_at(double q, int count) const;

private:
    struct Splines;
    CavityConfig cfg_;
    MembraneTrajectory traj_;
    TableOptions options_;
    double q_lo_ = 0.0;
    double q_hi_ = 0.0;
    double validation_error_ = 0.0;
    std::unique_ptr<Splines> splines_;

    [[nodiscard]] double clamp(double q) const;
};

// --- Galerkin integration ---------------------------------------------------------

/// Only mode N is excited at tau = 0: c_m(0) = g0 delta_mN, c_m'(0) = g1 delta_mN.
struct InitialCondition {
    int N = 1;
    double g0 = 1.0;
    double g1 = 0.0;
};

struct IntegratorOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double initial_step = 1e-2;
};

struct FieldState {
    double tau = 0.0;
    double q = 0.0;
    std::vector<double> c;     ///< c_1..c_{M_track}
    std::vector<double> cdot;  ///< their tau-derivatives

    [[nodiscard]] double coefficient_norm() const;
};

struct FieldSeries {
    int m_track = 0;
    int m_series = 0;
    std::vector<FieldState> states;  ///< one per requested sample time
    std::size_t steps = 0;

    /// State at exactly this sample time (std::out_of_range if absent).
    [[nodiscard]] const FieldState& at(double tau) const;
};

/// Integrates the first m_series coefficient equations with an adaptive
/// Dormand-Prince 5(4) pair and reports c_1..c_{m_track} at each of the
/// (sorted, nonnegative) sample times via dense output.
/// Throws std::invalid_argument on bad sizes or a trajectory leaving the
/// cavity, NumericalError on step-size underflow.
FieldSeries integrate_modes(const CoefficientTables& tables, const InitialCondition& init, int m_track,
                            int m_series, const std::vector<double>& sample_times,
                            const IntegratorOptions& options = {});

/// sum_n c_n G_n[xi, q(tau)] over the tracked coefficients.
double reconstruct_potential(const CoefficientTables& tables, const FieldState& state, double xi);
std::vector<double> reconstruct_profile(const CoefficientTables& tables, const FieldState& state,
                                        const std::vector<double>& xi);

// --- multiple scales ---------------------------------------------------------------

struct MultipleScalesParams {
    int N = 1;
    double bN0 = 0.0;
    double ThetaN0 = 0.0;
};

/// Closed-form adiabatic solution seeded by an initial condition.
class MultipleScales {
public:
    MultipleScales(const CoefficientTables& tables, const InitialCondition& init, double quad_tol = 1e-12);

    [[nodiscard]] const MultipleScalesParams& params() const { return params_; }

    /// t_1N(tau) = int_0^tau omega_N[q(rho)] d rho.
    [[nodiscard]] double phase(double tau) const;
    /// alpha_N(tau): sqrt(omega_N[q(0)] / omega_N[q(tau)]) exp(-int Gamma_NN dy).
    [[nodiscard]] double amplitude(double tau) const;
    /// d omega_N/dq correction factor q' omega_N' / (4 omega_N^2).
    [[nodiscard]] double velocity_correction(double tau) const;

    /// Coefficients of the solution on G_1..G_M at tau. With
    /// include_cross = false only the mode-N term is kept.
    [[nodiscard]] std::vector<double> coefficients(double tau, int M, bool include_cross) const;

    [[nodiscard]] double potential(double xi, double tau, int M, bool include_cross) const;

private:
    const CoefficientTables* tables_;
    MultipleScalesParams params_;
    double quad_tol_;
};

double ms_phase(const CoefficientTables& tables, int N, double tau, double quad_tol = 1e-12);
double ms_amplitude(const CoefficientTables& tables, int N, double tau);
/// Leading term for ground-state data (N = 1, g0 = 1, g1 = 0).
double ms_potential_leading(const CoefficientTables& tables, double xi, double tau);
double ms_potential_full(const CoefficientTables& tables, int N, double g0N, double g1N, double xi, double tau,
                         int M);

// --- diagnostics -------------------------------------------------------------------

struct Diagnostics {
    double tau = 0.0;
    double a = 0.0;  ///< eps-norm of the Galerkin potential
    double b = 0.0;  ///< eps-norm of the multiple-scales potential
    double d = 0.0;  ///< 100 * eps-norm of the difference / a
};

/// Norms in the instantaneous mode basis (orthonormal at q(tau)).
Diagnostics diagnostics(const FieldState& state, const MultipleScales& ms, bool include_cross = false);

/// Same quantities by direct quadrature of the reconstructed functions.
Diagnostics diagnostics_quadrature(const CoefficientTables& tables, const FieldState& state,
                                   const MultipleScales& ms, bool include_cross = false);

}  // namespace mim
