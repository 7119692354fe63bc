#include "mim/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace mim {

namespace {

using std::numbers::pi;

double optical_length(const CavityConfig& cfg) { return cfg.xi_L + cfg.delta0 * (cfg.alpha - 1.0); }

double scan_step(const CavityConfig& cfg) {
    return pi / (8.0 * optical_length(cfg) * std::max(cfg.alpha, 1.0));
}

// Maps a Pruefer angle across an interface where the local wavenumber jumps
// from k_old to k_new; G and G' are continuous, so tan(theta) scales by
// k_new / k_old while the multiple of pi is preserved.
double remap_phase(double theta, double k_old, double k_new) {
    const double m = std::floor(theta / pi);
    const double phi = theta - m * pi;
    return m * pi + std::atan2(k_new * std::sin(phi), k_old * std::cos(phi));
}

struct Bracket {
    double lo;
    double hi;
    double f_lo;
    double f_hi;
};

// Bisection to width <= tol, then one secant step inside the final bracket.
double refine(const CavityConfig& cfg, double beta, Bracket b, double tol, int index) {
    if (b.f_lo == 0.0) return b.lo;
    if (b.f_hi == 0.0) return b.hi;
    constexpr int kMaxIterations = 200;
    int it = 0;
    for (; it < kMaxIterations; ++it) {
        const double width = b.hi - b.lo;
        if (width <= std::min(tol, 1e-13 * std::max(1.0, b.hi))) break;
        const double mid = 0.5 * (b.lo + b.hi);
        if (mid <= b.lo || mid >= b.hi) break;
        const double fm = residual(cfg, beta, mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (b.f_lo < 0.0)) {
            b.lo = mid;
            b.f_lo = fm;
        } else {
            b.hi = mid;
            b.f_hi = fm;
        }
    }
    if (it == kMaxIterations)
        throw NumericalError("root " + std::to_string(index) + " did not converge within the iteration cap");
    double root = b.hi - b.f_hi * (b.hi - b.lo) / (b.f_hi - b.f_lo);
    if (!(root >= b.lo && root <= b.hi)) root = 0.5 * (b.lo + b.hi);
    const double f = std::abs(residual(cfg, beta, root));
    if (f > 1e-10 * residual_scale(cfg))
        throw NumericalError("root " + std::to_string(index) + " residual " + std::to_string(f) +
                             " above acceptance");
    return root;
}

// Sign-change brackets of the residual on (a, b] with the given step.
std::vector<Bracket> scan(const CavityConfig& cfg, double beta, double a, double b, double step,
                          std::size_t stop_after) {
    std::vector<Bracket> out;
    double x0 = a;
    double f0 = residual(cfg, beta, x0);
    const auto cells = static_cast<long>(std::ceil((b - a) / step));
    for (long j = 1; j <= cells && out.size() < stop_after; ++j) {
        const double x1 = j == cells ? b : a + j * step;
        const double f1 = residual(cfg, beta, x1);
        if (f1 == 0.0 || (f0 < 0.0) != (f1 < 0.0)) {
            if (f0 != 0.0) out.push_back({x0, x1, f0, f1});
        }
        x0 = x1;
        f0 = f1;
    }
    return out;
}

}  // namespace

double residual(const CavityConfig& cfg, double beta, double omega) {
    const double a = cfg.alpha;
    const double L = cfg.xi_L;
    const double d = cfg.delta0;
    return -(a - 1.0) * (a - 1.0) * std::sin(omega * (L - d * (a + 1.0))) -
           2.0 * (a * a - 1.0) * std::cos(omega * (L - d - 2.0 * L * beta)) * std::sin(omega * d * a) +
           (a + 1.0) * (a + 1.0) * std::sin(omega * (L + d * (a - 1.0)));
}

double residual_scale(const CavityConfig& cfg) { return (cfg.alpha + 1.0) * (cfg.alpha + 1.0); }

double thin_residual(const CavityConfig& cfg, double beta, double omega) {
    const double L = cfg.xi_L;
    return std::sin(L * omega) + omega * cfg.delta0 * (cfg.alpha * cfg.alpha - 1.0) *
                                     std::sin(L * omega * (beta - 1.0)) * std::sin(L * omega * beta);
}

double pruefer_phase(const CavityConfig& cfg, const MembranePosition& pos, double omega) {
    const double k_vac = omega;
    const double k_slab = omega * cfg.alpha;
    double theta = k_vac * pos.left_edge(cfg);
    theta = remap_phase(theta, k_vac, k_slab);
    theta += k_slab * cfg.delta0;
    theta = remap_phase(theta, k_slab, k_vac);
    theta += k_vac * (cfg.xi_L - pos.right_edge(cfg));
    return theta;
}

int count_below(const CavityConfig& cfg, const MembranePosition& pos, double omega) {
    if (omega <= 0.0) return 0;
    return static_cast<int>(std::ceil(pruefer_phase(cfg, pos, omega) / pi)) - 1;
}

Spectrum solve_spectrum(const CavityConfig& cfg, const MembranePosition& pos, int count, double tol,
                        double scan_density) {
    if (count < 1) throw std::invalid_argument("count must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    if (!(scan_density > 0.0)) throw std::invalid_argument("scan density must be positive");

    const double beta = pos.beta;
    const double step = scan_step(cfg) / scan_density;
    const auto wanted = static_cast<std::size_t>(count) + 1;  // one extra closes the last count check

    std::vector<double> roots;
    double lo = 1e-6 * step;
    while (roots.size() < wanted) {
        const double hi = lo + 64.0 * step;
        for (const Bracket& b : scan(cfg, beta, lo, hi, step, wanted - roots.size()))
            roots.push_back(refine(cfg, beta, b, tol, static_cast<int>(roots.size()) + 1));
        lo = hi;
    }

    // Reconcile with the Sturm count: between consecutive roots exactly the
    // lower ones lie below. A mismatch means roots were missed inside one
    // scan cell; rescan that gap more finely.
    for (int pass = 0;; ++pass) {
        if (pass > 12) throw NumericalError("could not reconcile roots with the Sturm count");
        bool clean = true;
        for (std::size_t i = 0; i < roots.size() && i < static_cast<std::size_t>(count); ++i) {
            const double gap_lo = i == 0 ? 1e-6 * step : roots[i - 1];
            const double probe = i == 0 ? 0.5 * roots[0] : 0.5 * (roots[i - 1] + roots[i]);
            if (count_below(cfg, pos, probe) == static_cast<int>(i)) continue;
            clean = false;
            const double fine = step / std::pow(8.0, pass + 1);
            const double a = i == 0 ? gap_lo : gap_lo + 1e-3 * fine;
            const double b = roots[i] - 1e-3 * fine;
            std::vector<double> extra;
            for (const Bracket& br : scan(cfg, beta, a, b, fine, 1000))
                extra.push_back(refine(cfg, beta, br, tol, static_cast<int>(i) + 1));
            roots.insert(roots.end(), extra.begin(), extra.end());
            std::sort(roots.begin(), roots.end());
            break;
        }
        if (clean) break;
    }

    Spectrum s{cfg, pos, {}, {}};
    s.omegas.assign(roots.begin(), roots.begin() + count);
    for (std::size_t i = 1; i < s.omegas.size(); ++i)
        if (!(s.omegas[i] > s.omegas[i - 1]))
            throw NumericalError("spectrum not strictly increasing at index " + std::to_string(i + 1));
    s.residuals.reserve(s.omegas.size());
    for (double w : s.omegas) s.residuals.push_back(std::abs(residual(cfg, beta, w)));
    return s;
}

double solve_frequency(const CavityConfig& cfg, const MembranePosition& pos, int n, double guess,
                       double tol) {
    if (n < 1) throw std::invalid_argument("mode index must be >= 1");
    const double floor_omega = 1e-9;
    double spread = 0.05 * pi / (optical_length(cfg) * cfg.alpha);
    guess = std::max(guess, floor_omega);

    double lo = std::max(guess - spread, floor_omega);
    for (double s = spread; count_below(cfg, pos, lo) > n - 1; s *= 2.0)
        lo = std::max(guess - 2.0 * s, floor_omega);
    double hi = guess + spread;
    for (double s = spread; count_below(cfg, pos, hi) < n; s *= 2.0) hi = guess + 2.0 * s;

    for (int it = 0; !(count_below(cfg, pos, lo) == n - 1 && count_below(cfg, pos, hi) == n); ++it) {
        if (it > 200) throw NumericalError("could not isolate mode " + std::to_string(n));
        const double mid = 0.5 * (lo + hi);
        if (count_below(cfg, pos, mid) >= n)
            hi = mid;
        else
            lo = mid;
    }
    Bracket b{lo, hi, residual(cfg, pos.beta, lo), residual(cfg, pos.beta, hi)};
    if (b.f_lo != 0.0 && b.f_hi != 0.0 && (b.f_lo < 0.0) == (b.f_hi < 0.0))
        throw NumericalError("isolated bracket for mode " + std::to_string(n) + " has no sign change");
    return refine(cfg, pos.beta, b, tol, n);
}

Spectrum track_spectrum(const CavityConfig& cfg, const MembranePosition& pos, const Spectrum& previous,
                        double tol) {
    Spectrum s{cfg, pos, {}, {}};
    s.omegas.reserve(previous.omegas.size());
    for (std::size_t i = 0; i < previous.omegas.size(); ++i)
        s.omegas.push_back(solve_frequency(cfg, pos, static_cast<int>(i) + 1, previous.omegas[i], tol));
    for (double w : s.omegas) s.residuals.push_back(std::abs(residual(cfg, pos.beta, w)));
    return s;
}

double frequency_slope(const CavityConfig& cfg, const MembranePosition& pos, double omega) {
    const double a = cfg.alpha;
    const double d = cfg.delta0;
    const double L1 = cfg.xi_L - d * (a + 1.0);
    const double L2 = cfg.xi_L - d - 2.0 * pos.left_edge(cfg);
    const double L3 = cfg.xi_L + d * (a - 1.0);
    const double s = std::sin(omega * d * a);
    const double dF_domega = -(a - 1.0) * (a - 1.0) * L1 * std::cos(omega * L1) -
                             2.0 * (a * a - 1.0) *
                                 (-L2 * std::sin(omega * L2) * s + std::cos(omega * L2) * d * a * std::cos(omega * d * a)) +
                             (a + 1.0) * (a + 1.0) * L3 * std::cos(omega * L3);
    const double dF_dedge = -4.0 * omega * (a * a - 1.0) * std::sin(omega * L2) * s;
    return -dF_dedge / dF_domega;
}

StructuralFrequency structural_frequency(double xi_L, double alpha, int n, int k) {
    if (n < 1 || k < 1) throw std::invalid_argument("structural indices must be >= 1");
    const double na_k = n * alpha + k;
    return StructuralFrequency{n, k, na_k * pi / (xi_L * alpha), xi_L * k / na_k};
}

std::vector<StructuralFrequency> structural_set(const CavityConfig& cfg, int n_max, int k_max) {
    if (n_max < 1 || k_max < 1) throw std::invalid_argument("n_max and k_max must be >= 1");
    std::vector<StructuralFrequency> out;
    for (int n = 1; n <= n_max; ++n)
        for (int k = 1; k <= k_max; ++k) {
            StructuralFrequency sf = structural_frequency(cfg.xi_L, cfg.alpha, n, k);
            if (sf.delta_required < cfg.xi_L) out.push_back(sf);
        }
    std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
        return x.omega < y.omega || (x.omega == y.omega && x.n < y.n);
    });
    return out;
}

std::vector<StructuralFrequency> structural_for_width(const CavityConfig& cfg, int n_max, int k_max,
                                                      double rel_tol) {
    std::vector<StructuralFrequency> out;
    for (const auto& sf : structural_set(cfg, n_max, k_max))
        if (std::abs(sf.delta_required - cfg.delta0) <= rel_tol * cfg.xi_L) out.push_back(sf);
    return out;
}

std::vector<double> interior_beta_grid(const CavityConfig& cfg, int points) {
    if (points < 1) throw std::invalid_argument("grid needs at least one point");
    const double beta_max = 1.0 - cfg.delta0 / cfg.xi_L;
    std::vector<double> grid(points);
    for (int j = 0; j < points; ++j) grid[j] = beta_max * (j + 1.0) / (points + 1.0);
    return grid;
}

StructuralReport verify_structural(const CavityConfig& cfg, const StructuralFrequency& sf,
                                   const std::vector<double>& beta_grid, double tol) {
    if (std::abs(cfg.delta0 - sf.delta_required) > 1e-12 * cfg.xi_L)
        throw std::invalid_argument("cavity width does not match the structural width for (n, k) = (" +
                                    std::to_string(sf.n) + ", " + std::to_string(sf.k) + ")");
    StructuralReport report{sf, 0.0, 0.0, true, false};
    for (double beta : beta_grid) {
        const double r = std::abs(residual(cfg, beta, sf.omega));
        if (r > report.max_residual) {
            report.max_residual = r;
            report.worst_beta = beta;
        }
        const MembranePosition pos = position_from_beta(cfg, beta);
        const int upto = count_below(cfg, pos, sf.omega + 1e-6) ;
        bool found = false;
        if (upto >= 1) {
            const Spectrum s = solve_spectrum(cfg, pos, upto);
            for (double w : s.omegas) found = found || std::abs(w - sf.omega) < 1e-9 * std::max(1.0, sf.omega);
        }
        report.in_every_spectrum = report.in_every_spectrum && found;
    }
    report.pass = report.max_residual < tol && report.in_every_spectrum;
    return report;
}

std::vector<MidpointSolution> midpoint_family(double xi_L, double alpha, int n_max) {
    if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
    const double a2 = alpha * alpha;
    const double gamma = std::acos((a2 - 1.0) / (a2 + 1.0));
    std::vector<MidpointSolution> out;
    for (int n = 0; n <= n_max; ++n) {
        const double odd = (2.0 * n + 1.0) * pi;
        out.push_back({n, gamma, xi_L * odd / (odd + 2.0 * alpha * gamma),
                       (gamma + odd / (2.0 * alpha)) / xi_L});
    }
    return out;
}

BoundsReport spectral_bounds_check(const CavityConfig& cfg, const Spectrum& spectrum,
                                   const std::vector<StructuralFrequency>& structural, double tol) {
    if (spectrum.omegas.empty()) throw std::invalid_argument("spectrum is empty");
    BoundsReport r;
    const double w1 = spectrum.omegas.front();
    const double gap = pi / (cfg.xi_L * cfg.alpha);
    r.fundamental_margin = pi / cfg.xi_L - w1;
    r.fundamental_ok = r.fundamental_margin >= -tol * (pi / cfg.xi_L);
    r.structural_margin = std::numeric_limits<double>::infinity();
    for (const auto& sf : structural) {
        const double margin = sf.omega - w1 - gap;
        r.structural_margin = std::min(r.structural_margin, margin);
        if (margin < -tol * sf.omega) r.violations.push_back(sf);
    }
    r.pass = r.fundamental_ok && r.violations.empty();
    return r;
}

ApproxFrequency approx_frequency(const CavityConfig& cfg, double beta, int n) {
    if (n < 1) throw std::invalid_argument("mode index must be >= 1");
    const double L = cfg.xi_L;
    const double d_n = -(n * pi / (2.0 * L * L)) * cfg.delta0 * (cfg.alpha * cfg.alpha - 1.0) *
                       (1.0 - std::cos(2.0 * n * pi * beta));
    return {n * pi / L + d_n, d_n};
}

double error_bound(const CavityConfig& cfg, double omega) {
    const double wd = omega * cfg.delta0;
    return 2.0 * cfg.alpha * (cfg.alpha * cfg.alpha - 1.0) * wd * wd;
}

ThinExplicitSolution explicit_thin_solutions(const CavityConfig& cfg, int n, int k) {
    if (n < 1 || k < 1) throw std::invalid_argument("n and k must be >= 1");
    const double ratio = static_cast<double>(k) / n;
    if (!(cfg.delta0 / cfg.xi_L < ratio && ratio < 1.0))
        throw std::invalid_argument("k/n must lie in (delta0/xi_L, 1)");
    return {n * pi / cfg.xi_L, 1.0 - ratio};
}

std::vector<ComparisonRow> comparison_table(const CavityConfig& cfg, double beta, int count, double tol) {
    const Spectrum s = solve_spectrum(cfg, position_from_beta(cfg, beta), count, tol);
    std::vector<ComparisonRow> rows;
    rows.reserve(s.omegas.size());
    for (std::size_t i = 0; i < s.omegas.size(); ++i) {
        const int n = static_cast<int>(i) + 1;
        const double w = s.omegas[i];
        const double wa = approx_frequency(cfg, beta, n).omega_na;
        rows.push_back({n, w, wa, error_bound(cfg, w), 100.0 * (w - wa) / w});
    }
    return rows;
}

}  // namespace mim
