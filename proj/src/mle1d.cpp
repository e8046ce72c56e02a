#include "modalkit/mle1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace modalkit::mle1d
{

double ratio_density_p2(double x, double rho, double sigma)
{
    require(sigma > 0.0, "p2 needs sigma > 0");
    const double pi  = std::numbers::pi;
    const double q   = x * x + 1.0;
    const double lin = 1.0 + rho * x;
    const double s2  = sigma * sigma;
    const double first = std::exp(-(rho * rho + 1.0) / (2.0 * s2));
    const double second =
        std::sqrt(2.0 * pi) * lin / (2.0 * sigma * std::sqrt(q)) *
        std::erf(lin / (sigma * std::sqrt(2.0 * q))) *
        std::exp(-(rho - x) * (rho - x) / (2.0 * s2 * q));
    return (first + second) / (pi * q);
}

// ---------------------------------------------------------------------------

ApproxDensity::ApproxDensity(double rho, double sigma, Index n,
                             QuadratureOptions opts)
    : rho_(rho), sigma_(sigma), n_(n), opts_(opts)
{
    require(std::abs(rho) < 1.0, "p_n needs |rho| < 1", ErrorCode::Domain);
    require(sigma > 0.0, "p_n needs sigma > 0");
    require(n >= 2, "p_n needs n >= 2");
    window_ = std::max(3.0, std::abs(rho) + 15.0 * sigma);
    norm_   = detail::simpson([this](double x) { return unnormalized(x); },
                              -window_, window_, opts_.intervals);
}

double ApproxDensity::unnormalized(double x) const
{
    // Score sums in extended precision; beyond |x| = 1 they overflow long
    // before the Gaussian factor stops underflowing.
    long double num = 0.0L, den = 0.0L;
    long double xp  = 1.0L; // x^(j-1)
    long double rp  = rho_; // rho^j
    const long double xl = x;
    for (Index j = 1; j <= n_ - 1; ++j)
    {
        const long double jj = static_cast<long double>(j);
        num += jj * xp * (xp * xl - rp);
        den += jj * jj * xp * xp;
        xp *= xl;
        rp *= rho_;
    }
    if (!std::isfinite(static_cast<double>(den)) || !std::isfinite(num * num))
        return 0.0;
    const long double expo =
        -(num * num) / (2.0L * sigma_ * sigma_ * den);
    const double value = static_cast<double>(std::sqrt(den) * std::exp(expo));
    return std::isfinite(value) ? value : 0.0;
}

double ApproxDensity::operator()(double x) const
{
    require(std::isfinite(x), "p_n needs finite x");
    return unnormalized(x) / norm_;
}

// ---------------------------------------------------------------------------

LimitDensity::LimitDensity(double rho, double sigma, QuadratureOptions opts)
    : rho_(rho), sigma_(sigma), opts_(opts)
{
    require(std::abs(rho) < 1.0, "p_inf needs |rho| < 1", ErrorCode::Domain);
    require(sigma > 0.0, "p_inf needs sigma > 0");
    const double u_max = std::atanh(1.0 - endpoint_gap);
    norm_              = detail::simpson(
        [this](double u) { return kernel_u(u); }, -u_max, u_max,
        opts_.intervals);
}

double LimitDensity::log_kernel(double x, double one_minus_x,
                                double one_plus_x) const
{
    const double x2      = x * x;
    const double gap3    = std::pow(one_minus_x * one_plus_x, 3);
    const double s       = (1.0 + x2) / gap3;
    const double rx1     = rho_ * x - 1.0;
    const double num     = rho_ * x2 * x - 1.0;
    const double r_ratio = num * num / (one_minus_x * one_plus_x *
                                        std::pow(rx1, 4) * (1.0 + x2));
    const double d = x - rho_;
    return -d * d * r_ratio / (2.0 * sigma_ * sigma_) + 0.5 * std::log(s);
}

double LimitDensity::kernel_u(double u) const
{
    // x = tanh u; 1 -+ x and dx/du = 1 - x^2 evaluated without cancellation.
    const double x           = std::tanh(u);
    const double one_minus_x = 2.0 / (std::exp(2.0 * u) + 1.0);
    const double one_plus_x  = 2.0 / (std::exp(-2.0 * u) + 1.0);
    const double jac         = one_minus_x * one_plus_x;
    if (jac == 0.0)
        return 0.0;
    const double v = std::exp(log_kernel(x, one_minus_x, one_plus_x)) * jac;
    return std::isfinite(v) ? v : 0.0;
}

double LimitDensity::operator()(double x) const
{
    if (!(std::abs(x) < 1.0))
        throw Error(ErrorCode::Domain, "p_inf is supported on (-1, 1)");
    const double v = std::exp(log_kernel(x, 1.0 - x, 1.0 + x));
    return std::isfinite(v) ? v / norm_ : 0.0;
}

std::vector<double> LimitDensity::modes() const
{
    const double u_max = std::atanh(1.0 - endpoint_gap);
    const int steps    = opts_.intervals;
    const double h     = 2.0 * u_max / steps;
    // density in x is kernel_u / jacobian; compare in log to stay finite
    auto log_density = [&](double u) {
        const double x  = std::tanh(u);
        const double om = 2.0 / (std::exp(2.0 * u) + 1.0);
        const double op = 2.0 / (std::exp(-2.0 * u) + 1.0);
        return log_kernel(x, om, op);
    };
    std::vector<double> out;
    double prev = log_density(-u_max);
    double cur  = log_density(-u_max + h);
    for (int i = 2; i <= steps; ++i)
    {
        const double next = log_density(-u_max + i * h);
        if (cur > prev && cur >= next)
            out.push_back(std::tanh(-u_max + (i - 1) * h));
        prev = cur;
        cur  = next;
    }
    return out;
}

double approx_density_pn(double x, double rho, double sigma, Index n)
{
    return ApproxDensity(rho, sigma, n)(x);
}

double limit_density_pinf(double x, double rho, double sigma)
{
    if (!(std::abs(x) < 1.0))
        throw Error(ErrorCode::Domain, "p_inf is supported on (-1, 1)");
    return LimitDensity(rho, sigma)(x);
}

double mse_by_quadrature(double rho, double sigma, std::optional<Index> n,
                         QuadratureOptions opts)
{
    auto sq = [rho](double x) { return (x - rho) * (x - rho); };
    if (n)
        return ApproxDensity(rho, sigma, *n, opts).integrate(sq);
    return LimitDensity(rho, sigma, opts).integrate(sq);
}

// ---------------------------------------------------------------------------

DensityCurve pn_curve(double rho, double sigma, Index n, int points)
{
    require(points >= 2, "curve needs at least two points");
    const ApproxDensity p(rho, sigma, n);
    DensityCurve c;
    c.rho = rho, c.sigma = sigma, c.n = n;
    c.normalization_constant = p.normalization_constant();
    const double w = std::min(p.window(), 1.5 + 5.0 * sigma);
    for (int i = 0; i < points; ++i)
    {
        const double x = -w + 2.0 * w * i / (points - 1);
        c.grid.push_back(x);
        c.values.push_back(p(x));
    }
    return c;
}

DensityCurve pinf_curve(double rho, double sigma, int points)
{
    require(points >= 2, "curve needs at least two points");
    const LimitDensity p(rho, sigma);
    DensityCurve c;
    c.rho = rho, c.sigma = sigma;
    c.normalization_constant = p.normalization_constant();
    // open grid on (-1, 1) with nodes clustered at the ends
    const double u_max = std::atanh(1.0 - 1e-6);
    for (int i = 0; i < points; ++i)
    {
        const double x = std::tanh(-u_max + 2.0 * u_max * i / (points - 1));
        c.grid.push_back(x);
        c.values.push_back(p(x));
    }
    return c;
}

DensityCurve p2_curve(double rho, double sigma, double half_width,
                      int points)
{
    require(points >= 2, "curve needs at least two points");
    DensityCurve c;
    c.rho = rho, c.sigma = sigma, c.n = 2;
    for (int i = 0; i < points; ++i)
    {
        const double x = -half_width + 2.0 * half_width * i / (points - 1);
        c.grid.push_back(x);
        c.values.push_back(ratio_density_p2(x, rho, sigma));
    }
    return c;
}

// ---------------------------------------------------------------------------

namespace
{

double ls_objective(const RVector& a, double x)
{
    double acc = 0.0, p = 1.0;
    for (Index j = 0; j < a.size(); ++j)
    {
        const double r = a[j] - p;
        acc += r * r;
        p *= x;
    }
    return acc;
}

double golden_section(const RVector& a, double lo, double hi)
{
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c  = hi - inv_phi * (hi - lo);
    double d  = lo + inv_phi * (hi - lo);
    double fc = ls_objective(a, c), fd = ls_objective(a, d);
    while (hi - lo > 1e-12)
    {
        if (fc < fd)
        {
            hi = d, d = c, fd = fc;
            c  = hi - inv_phi * (hi - lo);
            fc = ls_objective(a, c);
        }
        else
        {
            lo = c, c = d, fc = fd;
            d  = lo + inv_phi * (hi - lo);
            fd = ls_objective(a, d);
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

double rho_ml(const RVector& a)
{
    constexpr double lo = -1.5, hi = 1.5;
    constexpr int starts = 5;
    constexpr int scan   = 16;
    const double width   = (hi - lo) / starts;
    double best = 0.0, best_f = std::numeric_limits<double>::infinity();
    for (int s = 0; s < starts; ++s)
    {
        // coarse scan of the start's bracket, then golden section around the
        // best scan node
        const double b0 = lo + s * width;
        const double h  = width / scan;
        int arg         = 0;
        double fmin     = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= scan; ++i)
        {
            const double f = ls_objective(a, b0 + i * h);
            if (f < fmin)
                fmin = f, arg = i;
        }
        const double x = golden_section(a, std::max(lo, b0 + (arg - 1) * h),
                                        std::min(hi, b0 + (arg + 1) * h));
        const double f = ls_objective(a, x);
        if (f < best_f)
            best_f = f, best = x;
    }
    return best;
}

MonteCarloResult montecarlo_rho_ml(double rho, double sigma, Index n,
                                   Index samples, std::uint64_t seed, int bins)
{
    require(samples >= 100, "Monte Carlo needs at least 100 samples");
    require(n >= 2, "Monte Carlo needs n >= 2");
    require(sigma >= 0.0, "sigma must be nonnegative");
    require(bins >= 1, "need at least one bin");
    MonteCarloResult out;
    out.estimates.reserve(static_cast<std::size_t>(samples));
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    RVector clean(n), a(n);
    double p = 1.0;
    for (Index j = 0; j < n; ++j, p *= rho)
        clean[j] = p;
    double sq = 0.0;
    for (Index s = 0; s < samples; ++s)
    {
        for (Index j = 0; j < n; ++j)
            a[j] = clean[j] + sigma * normal(engine);
        const double est = rho_ml(a);
        out.estimates.push_back(est);
        sq += (est - rho) * (est - rho);
    }
    out.mse = sq / static_cast<double>(samples);

    const double lo = -1.5, hi = 1.5, w = (hi - lo) / bins;
    out.histogram.assign(static_cast<std::size_t>(bins), 0.0);
    for (int b = 0; b < bins; ++b)
        out.bin_centers.push_back(lo + (b + 0.5) * w);
    for (double e : out.estimates)
    {
        const int b = std::clamp(static_cast<int>((e - lo) / w), 0, bins - 1);
        out.histogram[static_cast<std::size_t>(b)] += 1.0;
    }
    for (double& h : out.histogram)
        h /= static_cast<double>(samples) * w;
    return out;
}

} // namespace modalkit::mle1d
