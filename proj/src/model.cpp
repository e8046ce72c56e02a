#include "modalkit/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace modalkit
{

namespace
{

bool nearly_equal(Complex x, Complex y)
{
    const double scale = std::max({1.0, std::abs(x), std::abs(y)});
    return std::abs(x - y) <= 1e-12 * scale;
}

} // namespace

void ModalModel::validate(double delta) const
{
    require(order() >= 1, "model must have at least one mode",
            ErrorCode::InvalidModel);
    require(c.size() == xi.size(), "weights and modes differ in length",
            ErrorCode::InvalidModel);
    for (Index j = 0; j < order(); ++j)
    {
        require(std::abs(std::arg(xi[j])) * delta <= std::numbers::pi,
                "mode violates |arg xi| * delta <= pi",
                ErrorCode::InvalidModel);
        for (Index h = 0; h < j; ++h)
        {
            if (nearly_equal(xi[j], xi[h]))
                throw Error(ErrorCode::InvalidModel,
                            "duplicate modes at indices " + std::to_string(h) +
                                " and " + std::to_string(j));
        }
    }
}

void RealModalParams::validate(double delta) const
{
    const auto q = count();
    require(q >= 1, "real model must have at least one component",
            ErrorCode::InvalidModel);
    require(decay.size() == q && frequency.size() == q && phase.size() == q,
            "real model parameter lists differ in length",
            ErrorCode::InvalidModel);
    for (std::size_t j = 0; j < q; ++j)
    {
        require(amplitude[j] > 0.0, "amplitudes must be positive",
                ErrorCode::InvalidModel);
        require(decay[j] > 0.0, "decays must be positive",
                ErrorCode::InvalidModel);
        require(std::abs(frequency[j]) * delta <= std::numbers::pi,
                "frequency violates |omega| * delta <= pi",
                ErrorCode::InvalidModel);
        for (std::size_t h = 0; h < j; ++h)
            require(frequency[h] != frequency[j], "frequencies must differ",
                    ErrorCode::InvalidModel);
    }
}

void Hyperparameters::validate() const
{
    require(p_tilde >= 1, "p_tilde must be >= 1");
    require(beta_factor > 0.0, "beta_factor must be positive");
    require(gamma >= 0.0, "gamma must be nonnegative");
    require(tau > 0.0, "tau must be positive");
    require(pseudo_count >= 1, "pseudosample count must be >= 1");
    require(sigma_ratio >= 0.0, "sigma_ratio must be nonnegative");
    require(alpha > 0.5 && alpha <= 1.0, "alpha must lie in (0.5, 1]");
    require(cadzow_iters >= 1, "cadzow_iters must be >= 1");
    require(cadzow_tol > 0.0, "cadzow_tol must be positive");
    require(lattice_dim >= 3, "lattice_dim must be >= 3");
    require(lattice_bounds.x_max > lattice_bounds.x_min &&
                lattice_bounds.y_max > lattice_bounds.y_min,
            "lattice bounds are empty");
}

SignalSamples synthesize(const ModalModel& model, Index n, double delta)
{
    model.validate(delta);
    require(n >= 2, "need at least two samples");
    SignalSamples out;
    out.delta = delta;
    out.a     = CVector::Zero(n);
    for (Index j = 0; j < model.order(); ++j)
    {
        Complex power(1.0, 0.0);
        for (Index k = 0; k < n; ++k)
        {
            out.a[k] += model.c[j] * power;
            power *= model.xi[j];
        }
    }
    return out;
}

ModalModel real_to_complex(const RealModalParams& params, double delta)
{
    params.validate(delta);
    const auto q = static_cast<Index>(params.count());
    ModalModel m;
    m.c.resize(2 * q);
    m.xi.resize(2 * q);
    const double two_pi = 2.0 * std::numbers::pi;
    for (Index j = 0; j < q; ++j)
    {
        const auto u   = static_cast<std::size_t>(j);
        const double A = params.amplitude[u];
        m.c[j]         = 0.5 * A * std::polar(1.0, params.phase[u]);
        m.xi[j]     = std::polar(params.decay[u], two_pi * params.frequency[u]);
        m.c[j + q]  = std::conj(m.c[j]);
        m.xi[j + q] = std::conj(m.xi[j]);
    }
    m.validate(delta);
    return m;
}

void fill_complex_gaussian(std::mt19937_64& engine, double sigma, CVector& out)
{
    if (sigma == 0.0)
    {
        out.setZero();
        return;
    }
    std::normal_distribution<double> normal(0.0, sigma / std::sqrt(2.0));
    for (Index k = 0; k < out.size(); ++k)
    {
        const double re = normal(engine);
        const double im = normal(engine);
        out[k]          = Complex(re, im);
    }
}

SignalSamples add_noise(const SignalSamples& signal, double sigma,
                        std::uint64_t seed)
{
    require(sigma >= 0.0, "noise sigma must be nonnegative");
    SignalSamples out = signal;
    out.sigma         = sigma;
    if (sigma == 0.0)
        return out;
    std::mt19937_64 engine(seed);
    CVector noise(signal.size());
    fill_complex_gaussian(engine, sigma, noise);
    out.a += noise;
    return out;
}

SnrSummary snr(const ModalModel& model, double sigma)
{
    require(sigma > 0.0, "SNR undefined for sigma = 0", ErrorCode::UndefinedSnr);
    require(model.order() >= 1, "empty model");
    SnrSummary s;
    s.per_mode = std::sqrt(2.0) * model.c.cwiseAbs() / sigma;
    s.min      = s.per_mode.minCoeff();
    return s;
}

std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b)
{
    return mix_seed(mix_seed(mix_seed(master) ^ a) ^ b);
}

ModalModel benchmark_model()
{
    const double two_pi = 2.0 * std::numbers::pi;
    auto mode = [&](double damping, double freq) {
        return std::exp(Complex(-damping, two_pi * freq));
    };
    ModalModel m;
    m.xi.resize(5);
    m.c.resize(5);
    m.xi << mode(0.3, -0.35), mode(0.1, -0.3), mode(0.05, -0.28),
        mode(0.0001, 0.2), mode(0.0001, 0.21);
    m.c << 20.0, 6.0, 3.0, 1.0, 1.0;
    return m;
}

} // namespace modalkit
