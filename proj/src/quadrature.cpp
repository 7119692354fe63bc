#include "mim/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

namespace mim {

namespace {

GaussRule compute_rule(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Tricomi initial guess, then Newton on P_n.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double pn = n == 1 ? x : p1;
            const double pm = n == 1 ? 1.0 : p0;
            dp = n * (x * pn - pm) / (x * x - 1.0);
            const double dx = pn / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

struct Estimate {
    std::vector<double> value;
    std::vector<double> magnitude;
};

Estimate composite(const Region& r, int panels, const GaussRule& rule, std::size_t dim,
                   const VectorIntegrand& f, std::vector<double>& scratch) {
    Estimate e{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
    const double width = (r.b - r.a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = r.a + (p + 0.5) * width;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double x = mid + 0.5 * width * rule.nodes[i];
            const double w = 0.5 * width * rule.weights[i];
            f(x, scratch);
            for (std::size_t d = 0; d < dim; ++d) {
                e.value[d] += w * scratch[d];
                e.magnitude[d] += w * std::abs(scratch[d]);
            }
        }
    }
    return e;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("Gauss-Legendre order must be positive");
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
    return it->second;
}

std::vector<double> integrate_regions(std::span<const Region> regions, std::size_t dim,
                                      const VectorIntegrand& f, const QuadratureSpec& spec) {
    const GaussRule& rule = gauss_legendre(spec.order);
    std::vector<double> total(dim, 0.0);
    std::vector<double> scratch(dim, 0.0);
    for (const Region& r : regions) {
        if (!(r.b > r.a)) continue;
        const double half_waves = std::abs(r.wavenumber) * (r.b - r.a) / std::numbers::pi;
        const int nodes = std::max(spec.min_nodes,
                                   static_cast<int>(spec.nodes_per_half_wave * std::ceil(half_waves)));
        int panels = std::max(1, (nodes + spec.order - 1) / spec.order);
        Estimate coarse = composite(r, panels, rule, dim, f, scratch);
        for (;;) {
            if (2 * panels * spec.order > spec.max_nodes)
                throw QuadratureError("quadrature did not converge on [" + std::to_string(r.a) + ", " +
                                      std::to_string(r.b) + "]");
            panels *= 2;
            Estimate fine = composite(r, panels, rule, dim, f, scratch);
            double worst = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                const double scale = std::max({std::abs(fine.value[d]), fine.magnitude[d], 1e-300});
                worst = std::max(worst, std::abs(fine.value[d] - coarse.value[d]) / scale);
            }
            coarse = std::move(fine);
            if (worst < spec.rel_tol) break;
        }
        for (std::size_t d = 0; d < dim; ++d) total[d] += coarse.value[d];
    }
    return total;
}

double integrate_regions(std::span<const Region> regions, const std::function<double(double)>& f,
                         const QuadratureSpec& spec) {
    return integrate_regions(regions, 1, [&f](double x, std::span<double> out) { out[0] = f(x); },
                             spec)[0];
}

}  // namespace mim
