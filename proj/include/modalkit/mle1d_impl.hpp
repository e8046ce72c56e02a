#pragma once

#include <cmath>

namespace modalkit::mle1d
{

namespace detail
{

/// Composite Simpson rule of f on [a, b] with `intervals` (even) panels.
template <typename F>
double simpson(F&& f, double a, double b, int intervals)
{
    if (intervals % 2)
        ++intervals;
    const double h = (b - a) / intervals;
    double acc     = f(a) + f(b);
    for (int i = 1; i < intervals; ++i)
        acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return acc * h / 3.0;
}

} // namespace detail

template <typename F>
double ApproxDensity::integrate(F&& g) const
{
    return detail::simpson(
        [&](double x) { return g(x) * unnormalized(x); }, -window_, window_,
        opts_.intervals) /
        norm_;
}

template <typename F>
double LimitDensity::integrate(F&& g, double lo, double hi) const
{
    const double edge = 1.0 - endpoint_gap;
    lo                = std::max(lo, -edge);
    hi                = std::min(hi, edge);
    if (!(hi > lo))
        return 0.0;
    return detail::simpson(
        [&](double u) { return g(std::tanh(u)) * kernel_u(u); },
        std::atanh(lo), std::atanh(hi), opts_.intervals) /
        norm_;
}

} // namespace modalkit::mle1d
