#pragma once

// Composite Gauss-Legendre quadrature for piecewise-smooth, oscillatory
// integrands on [0, xi_L]. Each region is refined independently by
// doubling its panel count until successive estimates agree.

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace mim {

struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct QuadratureSpec {
    int order = 20;                    ///< Gauss points per panel
    int min_nodes = 20;                ///< per region
    double nodes_per_half_wave = 10.0; ///< wavelength-resolved floor
    double rel_tol = 1e-12;
    int max_nodes = 1 << 14;           ///< per region
};

/// Smooth sub-interval with a local wavenumber used to size the initial rule.
struct Region {
    double a = 0.0;
    double b = 0.0;
    double wavenumber = 0.0;
};

struct GaussRule {
    std::vector<double> nodes;    ///< on [-1, 1], ascending
    std::vector<double> weights;
};

/// Nodes and weights of the n-point Gauss-Legendre rule (cached).
const GaussRule& gauss_legendre(int n);

/// Vector-valued integrand: writes `dim` values at xi into `out`.
using VectorIntegrand = std::function<void(double xi, std::span<double> out)>;

/// Integrates every component over the union of `regions`. Convergence is
/// judged per region on the max-norm of the change relative to the larger
/// of the estimate and the integral of |f| (so near-zero results such as
/// orthogonality integrals terminate). Throws QuadratureError at the cap.
std::vector<double> integrate_regions(std::span<const Region> regions, std::size_t dim,
                                      const VectorIntegrand& f, const QuadratureSpec& spec = {});

double integrate_regions(std::span<const Region> regions, const std::function<double(double)>& f,
                         const QuadratureSpec& spec = {});

}  // namespace mim
