#include "mim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <complex>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <thread>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include "mim/parallel.hpp"
#include "mim/spectrum.hpp"

namespace mim {

namespace {

using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;

std::vector<double> uniform_grid(double lo, double hi, int points) {
    std::vector<double> g(static_cast<std::size_t>(points));
    const double h = (hi - lo) / (points - 1);
    for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = lo + i * h;
    g.back() = hi;
    return g;
}

// Snapshot of the tabulated quantities at one grid point.
struct GridSample {
    std::vector<double> omega;
    std::vector<double> slope;
    std::vector<double> gamma;  // row-major M x M
};

GridSample sample_at(const CavityConfig& cfg, double q, int M, QDerivativeMethod method, FrequencyModel model,
                     const QuadratureSpec& spec) {
    const MembranePosition pos = position_from_q0(cfg, q);
    const auto ms = modes(cfg, pos, M, spec);
    const CouplingMatrices cm = coupling_matrices(ms, method, spec);
    GridSample s;
    s.omega = cm.omega;
    for (double w : s.omega) s.slope.push_back(frequency_slope(cfg, pos, w));
    if (model == FrequencyModel::FirstOrder)
        for (int n = 1; n <= M; ++n) s.omega[static_cast<std::size_t>(n - 1)] = approx_frequency(cfg, pos.beta, n).omega_na;
    s.gamma.resize(static_cast<std::size_t>(M) * M);
    for (int m = 0; m < M; ++m)
        for (int n = 0; n < M; ++n) s.gamma[static_cast<std::size_t>(m) * M + n] = cm.Gamma(m, n);
    return s;
}

std::vector<GridSample> sample_grid(const CavityConfig& cfg, const std::vector<double>& grid, int M,
                                    const TableOptions& o, int threads) {
    std::vector<GridSample> out(grid.size());
    parallel_for(static_cast<int>(grid.size()), threads, [&](int i) {
        out[static_cast<std::size_t>(i)] =
            sample_at(cfg, grid[static_cast<std::size_t>(i)], M, o.method, o.frequencies, o.quadrature);
    });
    return out;
}

// Sixth-order one-sided slope at the first sample (step h, sign for direction).
double endpoint_slope(const std::vector<double>& f, bool left, double h) {
    static constexpr double c[6] = {-137.0, 300.0, -300.0, 200.0, -75.0, 12.0};
    const std::size_t n = f.size();
    double s = 0.0;
    for (std::size_t i = 0; i < 6; ++i) s += c[i] * (left ? f[i] : f[n - 1 - i]);
    return (left ? s : -s) / (60.0 * h);
}

}  // namespace

int default_thread_count() {
    if (const char* env = std::getenv("MIM_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// --- coupling matrices ------------------------------------------------------------

double CouplingMatrices::antisymmetry_defect() const {
    double worst = 0.0;
    for (int m = 0; m < M; ++m)
        for (int n = 0; n < M; ++n) worst = std::max(worst, std::abs(Gamma(m, n) + Gamma(n, m)));
    return worst;
}

CouplingMatrices coupling_matrices(const CavityConfig& cfg, const MembranePosition& pos, int M,
                                   QDerivativeMethod method, const QuadratureSpec& spec) {
    if (M < 1) throw std::invalid_argument("coupling_matrices: M must be >= 1");
    return coupling_matrices(modes(cfg, pos, M, spec), method, spec);
}

CouplingMatrices coupling_matrices(const std::vector<ModeSolution>& ms, QDerivativeMethod method,
                                   const QuadratureSpec& spec) {
    const int M = static_cast<int>(ms.size());
    if (M < 1) throw std::invalid_argument("coupling_matrices: no modes");
    const CavityConfig& cfg = ms.front().cfg;
    const MembranePosition& pos = ms.front().pos;

    CouplingMatrices cm;
    cm.M = M;
    cm.Omega = SquareMatrix(M);
    cm.theta = SquareMatrix(M);
    cm.Gamma = SquareMatrix(M);
    for (const auto& m : ms) cm.omega.push_back(m.omega);
    if (cfg.alpha == 1.0) return cm;  // vacuum: modes do not depend on q

    std::vector<std::function<double(double)>> dq;
    dq.reserve(ms.size());
    for (const auto& m : ms) {
        if (method == QDerivativeMethod::Analytic)
            dq.emplace_back(ModeQDerivative(m, spec));
        else
            dq.push_back(mode_derivative_q(cfg, pos, m.n, default_q_step(cfg), true, spec));
    }

    // Difference quotients carry ~1e-11 cancellation noise; a tighter
    // refinement criterion would never be met.
    QuadratureSpec qspec = spec;
    if (method == QDerivativeMethod::FiniteDifference) qspec.rel_tol = std::max(spec.rel_tol, 1e-8);

    const double a2 = cfg.alpha * cfg.alpha;
    const auto regions = cavity_regions(cfg, pos, 2.0 * cm.omega.back());
    const std::size_t MM = static_cast<std::size_t>(M) * M;
    std::vector<double> g(M), gq(M), gx(M);
    const auto vals = integrate_regions(
        regions, 2 * MM,
        [&](double xi, std::span<double> out) {
            const bool inside = ms.front().shape.region(xi) == 1;
            for (int n = 0; n < M; ++n) {
                g[n] = ms[n].value(xi);
                gq[n] = dq[n](xi);
                gx[n] = inside ? ms[n].d_xi(xi) : 0.0;
            }
            const double eps = inside ? a2 : 1.0;
            for (int m = 0; m < M; ++m)
                for (int n = 0; n < M; ++n) {
                    const std::size_t k = static_cast<std::size_t>(m) * M + n;
                    out[k] = eps * g[m] * gq[n];
                    out[MM + k] = (a2 - 1.0) * g[m] * gx[n];
                }
        },
        qspec);
    for (int m = 0; m < M; ++m)
        for (int n = 0; n < M; ++n) {
            const std::size_t k = static_cast<std::size_t>(m) * M + n;
            cm.Omega(m, n) = vals[k];
            cm.theta(m, n) = vals[MM + k];
            cm.Gamma(m, n) = vals[k] + vals[MM + k];
        }
    return cm;
}

// --- trajectories -----------------------------------------------------------------

MembraneTrajectory oscillating_trajectory(double center, double amplitude, double frequency) {
    MembraneTrajectory t;
    t.q = [=](double tau) { return center - amplitude * std::cos(frequency * tau); };
    t.dq = [=](double tau) { return amplitude * frequency * std::sin(frequency * tau); };
    t.ddq = [=](double tau) { return amplitude * frequency * frequency * std::cos(frequency * tau); };
    t.q_min = center - std::abs(amplitude);
    t.q_max = center + std::abs(amplitude);
    t.eps_pert = std::abs(frequency);
    t.label = "oscillating";
    return t;
}

MembraneTrajectory static_trajectory(double q0) {
    MembraneTrajectory t;
    t.q = [=](double) { return q0; };
    t.dq = [](double) { return 0.0; };
    t.ddq = [](double) { return 0.0; };
    t.q_min = t.q_max = q0;
    t.label = "static";
    return t;
}

MembraneTrajectory default_trajectory() { return oscillating_trajectory(1.2179272, 0.1, 0.01); }

TrajectoryCheck check_trajectory(const CavityConfig& cfg, const MembraneTrajectory& traj, double tau_end,
                                 int samples) {
    TrajectoryCheck r;
    const double lo = 0.5 * cfg.delta0;
    const double hi = cfg.xi_L - 0.5 * cfg.delta0;
    samples = std::max(samples, 2);
    for (int i = 0; i < samples; ++i) {
        const double tau = tau_end * i / (samples - 1);
        const double q = traj.q(tau);
        if (!(q >= lo && q <= hi)) r.in_range = false;
        r.max_speed = std::max(r.max_speed, std::abs(traj.dq(tau)));
        r.max_acceleration = std::max(r.max_acceleration, std::abs(traj.ddq(tau)));
    }
    if (traj.q_min < lo || traj.q_max > hi) r.in_range = false;
    r.starts_at_rest = traj.dq(0.0) == 0.0;
    if (!r.in_range) r.warnings.emplace_back("slab leaves the cavity");
    if (!r.starts_at_rest) r.warnings.emplace_back("slab does not start at rest");
    if (r.max_speed > 0.01) r.warnings.emplace_back("sup|q'| exceeds 0.01");
    if (r.max_acceleration > 0.01) r.warnings.emplace_back("sup|q''| exceeds 0.01");
    return r;
}

// --- tables -----------------------------------------------------------------------

struct CoefficientTables::Splines {
    std::vector<Spline> omega;
    std::vector<Spline> gamma;  // row-major
    std::vector<double> grid;
};

CoefficientTables::~CoefficientTables() = default;
CoefficientTables::CoefficientTables(CoefficientTables&&) noexcept = default;
CoefficientTables& CoefficientTables::operator=(CoefficientTables&&) noexcept = default;

CoefficientTables::CoefficientTables(const CavityConfig& cfg, MembraneTrajectory traj, const TableOptions& options)
    : cfg_(cfg), traj_(std::move(traj)), options_(options) {
    const int M = options_.modes;
    if (M < 1) throw std::invalid_argument("tables need at least one mode");
    if (options_.grid_points < 6) throw std::invalid_argument("tables need at least 6 grid points");
    const double lo = 0.5 * cfg.delta0;
    const double hi = cfg.xi_L - 0.5 * cfg.delta0;
    if (traj_.q_min < lo || traj_.q_max > hi)
        throw std::invalid_argument("trajectory leaves the admissible range");
    q_lo_ = traj_.q_min;
    q_hi_ = traj_.q_max;
    if (q_hi_ - q_lo_ < 1e-9 * cfg.xi_L) {
        // Static slab: a small window keeps the spline well posed.
        const double pad = 1e-3 * cfg.xi_L;
        q_lo_ = std::max(lo, q_lo_ - pad);
        q_hi_ = std::min(hi, q_hi_ + pad);
    }
    const int threads = options_.threads > 0 ? options_.threads : default_thread_count();
    const auto grid = uniform_grid(q_lo_, q_hi_, options_.grid_points);
    const auto samples = sample_grid(cfg, grid, M, options_, threads);
    const double h = grid[1] - grid[0];

    splines_ = std::make_unique<Splines>();
    splines_->grid = grid;
    std::vector<double> buf(grid.size());
    for (int n = 0; n < M; ++n) {
        for (std::size_t i = 0; i < grid.size(); ++i) buf[i] = samples[i].omega[static_cast<std::size_t>(n)];
        const bool exact = options_.frequencies == FrequencyModel::Exact;
        const double left = exact ? samples.front().slope[static_cast<std::size_t>(n)] : endpoint_slope(buf, true, h);
        const double right = exact ? samples.back().slope[static_cast<std::size_t>(n)] : endpoint_slope(buf, false, h);
        splines_->omega.emplace_back(buf.data(), buf.size(), q_lo_, h, left, right);
    }
    for (std::size_t k = 0; k < static_cast<std::size_t>(M) * M; ++k) {
        for (std::size_t i = 0; i < grid.size(); ++i) buf[i] = samples[i].gamma[k];
        splines_->gamma.emplace_back(buf.data(), buf.size(), q_lo_, h, endpoint_slope(buf, true, h),
                                     endpoint_slope(buf, false, h));
    }

    if (options_.validate) {
        // Exact values at the midpoints of the grid against the interpolants.
        std::vector<double> mid(grid.size() - 1);
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) mid[i] = 0.5 * (grid[i] + grid[i + 1]);
        const auto check = sample_grid(cfg, mid, M, options_, threads);
        double worst = 0.0;
        for (std::size_t i = 0; i < mid.size(); ++i) {
            for (int n = 0; n < M; ++n) {
                const double exact = check[i].omega[static_cast<std::size_t>(n)];
                worst = std::max(worst, std::abs(splines_->omega[static_cast<std::size_t>(n)](mid[i]) - exact) /
                                            std::max(1.0, std::abs(exact)));
            }
            for (std::size_t k = 0; k < check[i].gamma.size(); ++k) {
                const double exact = check[i].gamma[k];
                worst = std::max(worst, std::abs(splines_->gamma[k](mid[i]) - exact) / std::max(1.0, std::abs(exact)));
            }
        }
        validation_error_ = worst;
        if (worst > options_.validation_tol)
            {
            char msg[96];
            std::snprintf(msg, sizeof msg, "coefficient tables fail grid-doubling validation: %.3g", worst);
            throw NumericalError(msg);
        }
    }
}

double CoefficientTables::clamp(double q) const { return std::clamp(q, q_lo_, q_hi_); }

double CoefficientTables::omega(int n, double q) const {
    return splines_->omega.at(static_cast<std::size_t>(n - 1))(clamp(q));
}

double CoefficientTables::domega(int n, double q) const {
    return splines_->omega.at(static_cast<std::size_t>(n - 1)).prime(clamp(q));
}

double CoefficientTables::gamma(int m, int n, double q) const {
    if (m < 1 || n < 1 || m > options_.modes || n > options_.modes) throw std::out_of_range("gamma index");
    return splines_->gamma[static_cast<std::size_t>(m - 1) * options_.modes + (n - 1)](clamp(q));
}

double CoefficientTables::gamma_diagonal_integral(int n, double q_from, double q_to) const {
    if (n < 1 || n > options_.modes) throw std::out_of_range("gamma index");
    const double a = clamp(std::min(q_from, q_to));
    const double b = clamp(std::max(q_from, q_to));
    if (!(b > a)) return 0.0;
    // The interpolant is a cubic on each cell: 3-point Gauss is exact there.
    const Spline& s = splines_->gamma[static_cast<std::size_t>(n - 1) * options_.modes + (n - 1)];
    const GaussRule& rule = gauss_legendre(3);
    const auto& grid = splines_->grid;
    double v = 0.0;
    double lo = a;
    while (lo < b) {
        auto it = std::upper_bound(grid.begin(), grid.end(), lo);
        const double hi = it == grid.end() ? b : std::min(b, *it);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            v += 0.5 * (hi - lo) * rule.weights[i] * s(0.5 * (lo + hi) + 0.5 * (hi - lo) * rule.nodes[i]);
        if (hi <= lo) break;
        lo = hi;
    }
    return q_to > q_from ? v : -v;
}

std::vector<ModeSolution> CoefficientTables::modes_at(double q, int count) const {
    const MembranePosition pos = position_from_q0(cfg_, q);
    if (count > options_.modes) return mim::modes(cfg_, pos, count, options_.quadrature);
    std::vector<double> guesses;
    for (int n = 1; n <= count; ++n) guesses.push_back(omega(n, q));
    return modes_near(cfg_, pos, guesses, options_.quadrature);
}

// --- integration ------------------------------------------------------------------

double FieldState::coefficient_norm() const {
    double s = 0.0;
    for (double v : c) s += v * v;
    return std::sqrt(s);
}

const FieldState& FieldSeries::at(double tau) const {
    for (const auto& s : states)
        if (s.tau == tau) return s;
    throw std::out_of_range("no sample at requested tau");
}

FieldSeries integrate_modes(const CoefficientTables& tables, const InitialCondition& init, int m_track, int m_series,
                            const std::vector<double>& sample_times, const IntegratorOptions& options) {
    if (m_track < 1 || m_track > m_series) throw std::invalid_argument("need 1 <= M_track <= M_series");
    if (m_series > tables.modes()) throw std::invalid_argument("M_series exceeds the tabulated modes");
    if (init.N < 1 || init.N > m_track) throw std::invalid_argument("initial mode must be tracked");
    if (!(options.rel_tol > 0.0) || !(options.abs_tol > 0.0)) throw std::invalid_argument("tolerances must be positive");
    if (sample_times.empty()) throw std::invalid_argument("no sample times");
    if (!std::is_sorted(sample_times.begin(), sample_times.end()) || sample_times.front() < 0.0)
        throw std::invalid_argument("sample times must be sorted and nonnegative");
    const MembraneTrajectory& traj = tables.trajectory();
    const CavityConfig& cfg = tables.config();
    if (!check_trajectory(cfg, traj, sample_times.back()).in_range)
        throw std::invalid_argument("trajectory leaves the admissible range");

    using State = std::vector<double>;
    const int M = m_series;
    State x(static_cast<std::size_t>(2 * M), 0.0);
    x[static_cast<std::size_t>(init.N - 1)] = init.g0;
    x[static_cast<std::size_t>(M + init.N - 1)] = init.g1;

    std::vector<double> w2(M), gam(static_cast<std::size_t>(M) * M);
    auto rhs = [&](const State& y, State& dy, double tau) {
        const double q = traj.q(tau);
        const double v = traj.dq(tau);
        const double acc = traj.ddq(tau);
        const bool moving = v != 0.0 || acc != 0.0;
        for (int m = 0; m < M; ++m) {
            const double w = tables.omega(m + 1, q);
            w2[m] = w * w;
        }
        if (moving)
            for (int m = 0; m < M; ++m)
                for (int n = 0; n < M; ++n) gam[static_cast<std::size_t>(m) * M + n] = tables.gamma(m + 1, n + 1, q);
        for (int m = 0; m < M; ++m) {
            dy[m] = y[M + m];
            double force = -w2[m] * y[m];
            if (moving)
                for (int n = 0; n < M; ++n)
                    force -= gam[static_cast<std::size_t>(m) * M + n] * (2.0 * v * y[M + n] + acc * y[n]);
            dy[M + m] = force;
        }
    };

    FieldSeries series;
    series.m_track = m_track;
    series.m_series = m_series;
    auto observe = [&](const State& y, double tau) {
        FieldState s;
        s.tau = tau;
        s.q = traj.q(tau);
        s.c.assign(y.begin(), y.begin() + m_track);
        s.cdot.assign(y.begin() + M, y.begin() + M + m_track);
        series.states.push_back(std::move(s));
    };

    namespace ode = boost::numeric::odeint;
    auto stepper = ode::make_dense_output(options.abs_tol, options.rel_tol, ode::runge_kutta_dopri5<State>());
    // integrate_times starts at the first sample; prepend tau = 0 when needed.
    std::vector<double> times;
    if (sample_times.front() > 0.0) times.push_back(0.0);
    times.insert(times.end(), sample_times.begin(), sample_times.end());
    try {
        series.steps = ode::integrate_times(stepper, rhs, x, times.begin(), times.end(), options.initial_step, observe);
    } catch (const ode::odeint_error& e) {
        throw NumericalError(std::string("integrator failure: ") + e.what());
    }
    if (sample_times.front() > 0.0) series.states.erase(series.states.begin());
    return series;
}

double reconstruct_potential(const CoefficientTables& tables, const FieldState& state, double xi) {
    return reconstruct_profile(tables, state, {xi}).front();
}

std::vector<double> reconstruct_profile(const CoefficientTables& tables, const FieldState& state,
                                        const std::vector<double>& xi) {
    const auto ms = tables.modes_at(state.q, static_cast<int>(state.c.size()));
    std::vector<double> out;
    out.reserve(xi.size());
    for (double x : xi) {
        double v = 0.0;
        for (std::size_t n = 0; n < ms.size(); ++n) v += state.c[n] * ms[n].value(x);
        out.push_back(v);
    }
    return out;
}

// --- multiple scales ---------------------------------------------------------------

MultipleScales::MultipleScales(const CoefficientTables& tables, const InitialCondition& init, double quad_tol)
    : tables_(&tables), quad_tol_(quad_tol) {
    if (init.N < 1 || init.N > tables.modes()) throw std::invalid_argument("mode index outside the tables");
    params_.N = init.N;
    const double w0 = tables.omega(init.N, tables.trajectory().q(0.0));
    const std::complex<double> z(0.5 * init.g0, 0.5 * init.g1 / w0);
    params_.bN0 = std::abs(z);
    params_.ThetaN0 = std::arg(z);
}

double MultipleScales::phase(double tau) const {
    if (tau < 0.0) throw std::invalid_argument("tau must be nonnegative");
    if (tau == 0.0) return 0.0;
    const auto& traj = tables_->trajectory();
    const int N = params_.N;
    auto f = [&](double rho) { return tables_->omega(N, traj.q(rho)); };
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, tau, 20, quad_tol_, &err);
    if (!(err <= std::max(1e3 * quad_tol_, 1e-9) * std::abs(v)))
        throw QuadratureError("phase integral did not converge");
    return v;
}

double MultipleScales::amplitude(double tau) const {
    const auto& traj = tables_->trajectory();
    const int N = params_.N;
    const double q0 = traj.q(0.0);
    const double q = traj.q(tau);
    return std::sqrt(tables_->omega(N, q0) / tables_->omega(N, q)) *
           std::exp(-tables_->gamma_diagonal_integral(N, q0, q));
}

double MultipleScales::velocity_correction(double tau) const {
    const auto& traj = tables_->trajectory();
    const double q = traj.q(tau);
    const double w = tables_->omega(params_.N, q);
    return traj.dq(tau) * tables_->domega(params_.N, q) / (4.0 * w * w);
}

std::vector<double> MultipleScales::coefficients(double tau, int M, bool include_cross) const {
    const int N = params_.N;
    if (M < N) throw std::invalid_argument("M must include the excited mode");
    if (include_cross && M > tables_->modes()) throw std::invalid_argument("M exceeds the tabulated modes");
    const auto& traj = tables_->trajectory();
    const double q = traj.q(tau);
    const double phi = phase(tau) - params_.ThetaN0;
    const double amp = 2.0 * amplitude(tau) * params_.bN0;
    std::vector<double> c(static_cast<std::size_t>(M), 0.0);
    c[static_cast<std::size_t>(N - 1)] = amp * (std::cos(phi) + velocity_correction(tau) * std::sin(phi));
    if (include_cross) {
        const double v = traj.dq(tau);
        const double wN = tables_->omega(N, q);
        for (int m = 1; m <= M; ++m) {
            if (m == N) continue;
            const double wm = tables_->omega(m, q);
            const double K = 2.0 * tables_->gamma(m, N, q) * wN / (wm * wm - wN * wN);
            c[static_cast<std::size_t>(m - 1)] = amp * v * std::sin(phi) * K;
        }
    }
    return c;
}

double MultipleScales::potential(double xi, double tau, int M, bool include_cross) const {
    const auto c = coefficients(tau, M, include_cross);
    const auto ms = tables_->modes_at(tables_->trajectory().q(tau), M);
    double v = 0.0;
    for (std::size_t n = 0; n < ms.size(); ++n) v += c[n] * ms[n].value(xi);
    return v;
}

double ms_phase(const CoefficientTables& tables, int N, double tau, double quad_tol) {
    return MultipleScales(tables, {N, 1.0, 0.0}, quad_tol).phase(tau);
}

double ms_amplitude(const CoefficientTables& tables, int N, double tau) {
    return MultipleScales(tables, {N, 1.0, 0.0}).amplitude(tau);
}

double ms_potential_leading(const CoefficientTables& tables, double xi, double tau) {
    return MultipleScales(tables, {1, 1.0, 0.0}).potential(xi, tau, 1, false);
}

double ms_potential_full(const CoefficientTables& tables, int N, double g0N, double g1N, double xi, double tau,
                         int M) {
    return MultipleScales(tables, {N, g0N, g1N}).potential(xi, tau, M, true);
}

// --- diagnostics -------------------------------------------------------------------

Diagnostics diagnostics(const FieldState& state, const MultipleScales& ms, bool include_cross) {
    const int M = static_cast<int>(state.c.size());
    const auto m = ms.coefficients(state.tau, M, include_cross);
    double a2 = 0.0, b2 = 0.0, d2 = 0.0;
    for (int n = 0; n < M; ++n) {
        a2 += state.c[n] * state.c[n];
        b2 += m[n] * m[n];
        d2 += (state.c[n] - m[n]) * (state.c[n] - m[n]);
    }
    Diagnostics d;
    d.tau = state.tau;
    d.a = std::sqrt(a2);
    d.b = std::sqrt(b2);
    d.d = 100.0 * std::sqrt(d2) / d.a;
    return d;
}

Diagnostics diagnostics_quadrature(const CoefficientTables& tables, const FieldState& state, const MultipleScales& ms,
                                   bool include_cross) {
    const int M = static_cast<int>(state.c.size());
    const auto basis = tables.modes_at(state.q, M);
    const auto m = ms.coefficients(state.tau, M, include_cross);
    auto field = [&](const std::vector<double>& c) {
        return [&basis, c](double xi) {
            double v = 0.0;
            for (std::size_t n = 0; n < basis.size(); ++n) v += c[n] * basis[n].value(xi);
            return v;
        };
    };
    std::vector<double> diff(state.c.size());
    for (std::size_t n = 0; n < diff.size(); ++n) diff[n] = state.c[n] - m[n];
    const auto& cfg = tables.config();
    const auto pos = position_from_q0(cfg, state.q);
    const double k = 2.0 * basis.back().omega;
    auto norm = [&](const std::function<double(double)>& f) { return std::sqrt(std::max(0.0, inner_product(cfg, pos, f, f, k))); };
    Diagnostics d;
    d.tau = state.tau;
    d.a = norm(field(state.c));
    d.b = norm(field(m));
    d.d = 100.0 * norm(field(diff)) / d.a;
    return d;
}

}  // namespace mim
