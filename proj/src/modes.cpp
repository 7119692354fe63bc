#include "mim/modes.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mim/spectrum.hpp"

namespace mim {

namespace {

using std::numbers::pi;

struct TermEval {
    double phase;
    double p;  // slope * xi + offset + edge * x_left
};

TermEval eval_term(const SineTerm& t, double omega, double x_left, double xi) {
    const double p = t.slope * xi + t.offset + t.edge * x_left;
    return {omega * p + t.shift, p};
}

}  // namespace

ModeShape ModeShape::exact(const CavityConfig& cfg, const MembranePosition& pos, double omega) {
    ModeShape s;
    s.omega_ = omega;
    s.x_left_ = pos.left_edge(cfg);
    s.x_right_ = pos.right_edge(cfg);
    const double a = cfg.alpha;
    const double d = cfg.delta0;
    s.branches_[0] = {{1.0, 1.0, 0.0, 0.0, 0.0}};
    // cos[w a (xi - xl)] sin(w xl) + sin[w a (xi - xl)] cos(w xl) / a, as two sines.
    s.branches_[1] = {{0.5 * (1.0 + 1.0 / a), a, 0.0, 1.0 - a, 0.0},
                      {0.5 * (1.0 - 1.0 / a), -a, 0.0, 1.0 + a, 0.0}};
    const double c = 1.0 / (4.0 * a);
    s.branches_[2] = {{(1.0 + a) * (1.0 + a) * c, 1.0, d * (a - 1.0), 0.0, 0.0},
                      {-(a - 1.0) * (a - 1.0) * c, 1.0, -d * (a + 1.0), 0.0, 0.0},
                      {-(a * a - 1.0) * c, 1.0, d * (a - 1.0), -2.0, 0.0},
                      {(a * a - 1.0) * c, 1.0, -d * (a + 1.0), -2.0, 0.0}};
    return s;
}

ModeShape ModeShape::thin(const CavityConfig& cfg, const MembranePosition& pos, double omega) {
    ModeShape s = exact(cfg, pos, omega);
    const double w = 0.5 * cfg.delta0 * omega * (cfg.alpha * cfg.alpha - 1.0);
    s.branches_[2] = {{1.0, 1.0, 0.0, 0.0, 0.0},
                      {w, 1.0, 0.0, 0.0, 0.5 * pi},
                      {-w, 1.0, 0.0, -2.0, 0.5 * pi}};
    return s;
}

int ModeShape::region(double xi) const {
    if (xi <= x_left_) return 0;
    if (xi <= x_right_) return 1;
    return 2;
}

double ModeShape::branch_value(int r, double xi) const {
    double sum = 0.0;
    for (const SineTerm& t : branches_[r]) sum += t.amp * std::sin(eval_term(t, omega_, x_left_, xi).phase);
    return sum;
}

double ModeShape::branch_d_xi(int r, double xi) const {
    double sum = 0.0;
    for (const SineTerm& t : branches_[r])
        sum += t.amp * omega_ * t.slope * std::cos(eval_term(t, omega_, x_left_, xi).phase);
    return sum;
}

double ModeShape::value(double xi) const { return branch_value(region(xi), xi); }

double ModeShape::d_xi(double xi) const { return branch_d_xi(region(xi), xi); }

double ModeShape::d2_xi(double xi) const {
    double sum = 0.0;
    for (const SineTerm& t : branches_[region(xi)]) {
        const double k = omega_ * t.slope;
        sum -= t.amp * k * k * std::sin(eval_term(t, omega_, x_left_, xi).phase);
    }
    return sum;
}

double ModeShape::d_omega(double xi) const {
    double sum = 0.0;
    for (const SineTerm& t : branches_[region(xi)]) {
        const TermEval e = eval_term(t, omega_, x_left_, xi);
        sum += t.amp * e.p * std::cos(e.phase);
    }
    return sum;
}

double ModeShape::d_edge(double xi) const {
    double sum = 0.0;
    for (const SineTerm& t : branches_[region(xi)])
        sum += t.amp * omega_ * t.edge * std::cos(eval_term(t, omega_, x_left_, xi).phase);
    return sum;
}

std::array<Region, 3> cavity_regions(const CavityConfig& cfg, const MembranePosition& pos, double omega) {
    const double xl = pos.left_edge(cfg);
    const double xr = pos.right_edge(cfg);
    return {Region{0.0, xl, omega}, Region{xl, xr, omega * cfg.alpha}, Region{xr, cfg.xi_L, omega}};
}

double norming_coefficient(const CavityConfig& cfg, const MembranePosition& pos, const ModeShape& shape,
                           const QuadratureSpec& spec) {
    // Twice the mode wavenumber: the integrand is a square.
    const auto regions = cavity_regions(cfg, pos, 2.0 * shape.omega());
    const double a2 = cfg.alpha * cfg.alpha;
    return integrate_regions(regions, 1,
                             [&](double xi, std::span<double> out) {
                                 const int r = shape.region(xi);
                                 const double g = shape.branch_value(r, xi);
                                 out[0] = (r == 1 ? a2 : 1.0) * g * g;
                             },
                             spec)[0];
}

double norming_coefficient(const CavityConfig& cfg, const MembranePosition& pos, double omega,
                           const QuadratureSpec& spec) {
    return norming_coefficient(cfg, pos, ModeShape::exact(cfg, pos, omega), spec);
}

double unnormalized_mode_value(const CavityConfig& cfg, const MembranePosition& pos, double omega, double xi) {
    return ModeShape::exact(cfg, pos, omega).value(xi);
}

double ModeSolution::value(double xi) const { return shape.value(xi) / std::sqrt(norming); }
double ModeSolution::d_xi(double xi) const { return shape.d_xi(xi) / std::sqrt(norming); }
double ModeSolution::d2_xi(double xi) const { return shape.d2_xi(xi) / std::sqrt(norming); }

ModeSolution mode_from_frequency(const CavityConfig& cfg, const MembranePosition& pos, int n, double omega,
                                 const QuadratureSpec& spec) {
    ModeSolution m{n, omega, cfg, pos, ModeShape::exact(cfg, pos, omega), 1.0};
    m.norming = norming_coefficient(cfg, pos, m.shape, spec);
    return m;
}

ModeSolution mode(const CavityConfig& cfg, const MembranePosition& pos, int n, const QuadratureSpec& spec) {
    if (n < 1) throw std::invalid_argument("mode index must be >= 1");
    const Spectrum s = solve_spectrum(cfg, pos, n);
    return mode_from_frequency(cfg, pos, n, s.omegas.back(), spec);
}

std::vector<ModeSolution> modes(const CavityConfig& cfg, const MembranePosition& pos, int count,
                                const QuadratureSpec& spec) {
    const Spectrum s = solve_spectrum(cfg, pos, count);
    std::vector<ModeSolution> out;
    out.reserve(count);
    for (int n = 1; n <= count; ++n) out.push_back(mode_from_frequency(cfg, pos, n, s.omegas[n - 1], spec));
    return out;
}

std::vector<ModeSolution> modes_near(const CavityConfig& cfg, const MembranePosition& pos,
                                     std::span<const double> guesses, const QuadratureSpec& spec) {
    std::vector<ModeSolution> out;
    out.reserve(guesses.size());
    for (std::size_t i = 0; i < guesses.size(); ++i) {
        const int n = static_cast<int>(i) + 1;
        out.push_back(mode_from_frequency(cfg, pos, n, solve_frequency(cfg, pos, n, guesses[i]), spec));
    }
    return out;
}

double inner_product(const CavityConfig& cfg, const MembranePosition& pos, const std::function<double(double)>& f,
                     const std::function<double(double)>& g, double wavenumber, const QuadratureSpec& spec) {
    const auto regions = cavity_regions(cfg, pos, wavenumber);
    const double a2 = cfg.alpha * cfg.alpha;
    const double xl = pos.left_edge(cfg);
    const double xr = pos.right_edge(cfg);
    return integrate_regions(regions, 1,
                             [&](double xi, std::span<double> out) {
                                 const double eps = (xi > xl && xi < xr) ? a2 : 1.0;
                                 out[0] = eps * f(xi) * g(xi);
                             },
                             spec)[0];
}

std::function<double(double)> mode_derivative_q(const CavityConfig& cfg, const MembranePosition& pos, int n,
                                                double h, bool richardson, const QuadratureSpec& spec) {
    if (!(h > 0.0)) throw std::invalid_argument("step h must be positive");
    const double omega = solve_spectrum(cfg, pos, n).omegas.back();
    auto shifted = [&](double dq) {
        const MembranePosition p = position_from_q0(cfg, pos.q0 + dq);
        return mode_from_frequency(cfg, p, n, solve_frequency(cfg, p, n, omega), spec);
    };
    ModeSolution plus = shifted(h);
    ModeSolution minus = shifted(-h);
    if (!richardson) {
        return [plus, minus, h](double xi) { return (plus.value(xi) - minus.value(xi)) / (2.0 * h); };
    }
    ModeSolution plus_half = shifted(0.5 * h);
    ModeSolution minus_half = shifted(-0.5 * h);
    return [plus, minus, plus_half, minus_half, h](double xi) {
        const double coarse = (plus.value(xi) - minus.value(xi)) / (2.0 * h);
        const double fine = (plus_half.value(xi) - minus_half.value(xi)) / h;
        return (4.0 * fine - coarse) / 3.0;
    };
}

ModeQDerivative::ModeQDerivative(const ModeSolution& m, const QuadratureSpec& spec) : mode_(m) {
    const CavityConfig& cfg = m.cfg;
    domega_dq_ = frequency_slope(cfg, m.pos, m.omega);
    const double a2 = cfg.alpha * cfg.alpha;
    const auto regions = cavity_regions(cfg, m.pos, 2.0 * m.omega);
    const ModeShape& s = m.shape;
    const double interior = integrate_regions(
        regions, 1,
        [&](double xi, std::span<double> out) {
            const int r = s.region(xi);
            const double dq = s.d_omega(xi) * domega_dq_ + s.d_edge(xi);
            out[0] = (r == 1 ? a2 : 1.0) * 2.0 * s.branch_value(r, xi) * dq;
        },
        spec)[0];
    const double gl = s.value(s.left_edge());
    const double gr = s.value(s.right_edge());
    dnorm_dq_ = interior + (a2 - 1.0) * (gr * gr - gl * gl);
}

double ModeQDerivative::operator()(double xi) const {
    const ModeShape& s = mode_.shape;
    const double n = mode_.norming;
    const double dq = s.d_omega(xi) * domega_dq_ + s.d_edge(xi);
    return dq / std::sqrt(n) - 0.5 * s.value(xi) * dnorm_dq_ / (n * std::sqrt(n));
}

double ThinModeSolution::value(double xi) const { return shape.value(xi) / std::sqrt(norming); }

double thin_norming_closed_form(const CavityConfig& cfg, const MembranePosition& pos, double omega) {
    const double L = cfg.xi_L;
    const double b = pos.beta;
    const double x = 2.0 * L * omega;
    const double bracket = 2.0 * L - std::sin(x) / omega +
                           cfg.delta0 * (cfg.alpha * cfg.alpha - 1.0) *
                               (1.0 - std::cos(x) + std::cos(x * (b - 1.0)) - std::cos(x * b) +
                                x * (b - 1.0) * std::sin(x * b));
    const double root = 0.5 * std::sqrt(bracket);
    return root * root;
}

ThinModeSolution thin_mode(const CavityConfig& cfg, const MembranePosition& pos, int n, const QuadratureSpec& spec) {
    if (n < 1) throw std::invalid_argument("mode index must be >= 1");
    const double omega = solve_spectrum(cfg, pos, n).omegas.back();
    ThinModeSolution t;
    t.n = n;
    t.omega = omega;
    t.cfg = cfg;
    t.pos = pos;
    t.shape = ModeShape::thin(cfg, pos, omega);
    t.norming = thin_norming_closed_form(cfg, pos, omega);
    t.norming_quadrature = norming_coefficient(cfg, pos, t.shape, spec);
    const double wd = omega * cfg.delta0;
    t.taylor_bound = 0.5 * cfg.alpha * (cfg.alpha * cfg.alpha - 1.0) * wd * wd;
    t.frequency_bound = error_bound(cfg, omega);
    if (t.frequency_bound >= 1.0)
        t.warnings.push_back("Delta_n = " + std::to_string(t.frequency_bound) +
                             " >= 1: slab too thick for the first-order form");
    return t;
}

}  // namespace mim
