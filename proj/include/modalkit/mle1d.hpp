#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "modalkit/model.hpp"

namespace modalkit::mle1d
{

/// Density of a1/a0 for independent normals with means 1 and rho and common
/// variance sigma^2 (Cauchy-like, no moments).
double ratio_density_p2(double x, double rho, double sigma);

/// Quadrature resolution shared by the normalisers below.
struct QuadratureOptions
{
    int intervals = 40000; ///< Simpson panels (even)
};

///
/// First-order (linearised score) approximation of the density of the ML
/// estimate of rho from a_j = rho^j + eps_j, j = 0..n-1. The normaliser K_n
/// is computed once at construction.
///
class ApproxDensity
{
public:
    ApproxDensity(double rho, double sigma, Index n,
                  QuadratureOptions opts = {});

    double operator()(double x) const;
    double normalization_constant() const { return norm_; }
    /// Integration window [-w, w] used for K_n and moments.
    double window() const { return window_; }

    /// Integral of g(x) p_n(x) over the window.
    template <typename F>
    double integrate(F&& g) const;

private:
    double unnormalized(double x) const;

    double rho_, sigma_;
    Index n_;
    QuadratureOptions opts_;
    double window_ = 0.0;
    double norm_   = 1.0;
};

///
/// Large-n limit of ApproxDensity, supported on (-1, 1). Integrals use the
/// substitution x = tanh(u) so the nodes cluster at the endpoints.
///
class LimitDensity
{
public:
    static constexpr double endpoint_gap = 1e-10;

    LimitDensity(double rho, double sigma, QuadratureOptions opts = {});

    /// Throws ErrorCode::Domain for |x| >= 1.
    double operator()(double x) const;
    double normalization_constant() const { return norm_; }

    /// Integral of g(x) p_inf(x) over [lo, hi] within (-1, 1).
    template <typename F>
    double integrate(F&& g, double lo = -1.0, double hi = 1.0) const;

    /// Local maxima of p_inf on the quadrature nodes, ascending in x.
    std::vector<double> modes() const;

private:
    double log_kernel(double x, double one_minus_x, double one_plus_x) const;
    double kernel_u(double u) const;

    double rho_, sigma_;
    QuadratureOptions opts_;
    double norm_ = 1.0;
};

double approx_density_pn(double x, double rho, double sigma, Index n);
double limit_density_pinf(double x, double rho, double sigma);

/// E[(x - rho)^2] under p_n, or under p_inf when n is empty.
double mse_by_quadrature(double rho, double sigma, std::optional<Index> n,
                         QuadratureOptions opts = {});

struct DensityCurve
{
    std::vector<double> grid;
    std::vector<double> values;
    double rho   = 0.0;
    double sigma = 0.0;
    std::optional<Index> n; ///< empty for the limit density
    double normalization_constant = 1.0;
};

DensityCurve pn_curve(double rho, double sigma, Index n, int points);
DensityCurve pinf_curve(double rho, double sigma, int points);
DensityCurve p2_curve(double rho, double sigma, double half_width,
                      int points);

struct MonteCarloResult
{
    std::vector<double> estimates;
    double mse = 0.0;
    /// Histogram density on [-1.5, 1.5].
    std::vector<double> bin_centers;
    std::vector<double> histogram;
};

/// Least-squares estimate of rho from one realisation by multi-start
/// golden-section search on [-1.5, 1.5].
double rho_ml(const RVector& a);

MonteCarloResult montecarlo_rho_ml(double rho, double sigma, Index n,
                                   Index samples, std::uint64_t seed,
                                   int bins = 120);

} // namespace modalkit::mle1d

#include "modalkit/mle1d_impl.hpp"
