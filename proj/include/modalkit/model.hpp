#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "modalkit/error.hpp"

namespace modalkit
{

using Complex = std::complex<double>;
using Index   = Eigen::Index;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

///
/// Weighted sum of complex exponentials  s_k = sum_j c_j xi_j^k.
///
struct ModalModel
{
    CVector c;  ///< complex weights
    CVector xi; ///< complex modes, pairwise distinct

    Index order() const { return xi.size(); }

    /// Throws ErrorCode::InvalidModel unless p >= 1, sizes agree, modes are
    /// pairwise distinct and |arg xi_j| * delta <= pi.
    void validate(double delta = 1.0) const;
};

/// Real damped cosines  sum_j A_j rho_j^t cos(2 pi omega_j t + theta_j).
struct RealModalParams
{
    std::vector<double> amplitude;
    std::vector<double> decay;
    std::vector<double> frequency;
    std::vector<double> phase;

    std::size_t count() const { return amplitude.size(); }
    void validate(double delta = 1.0) const;
};

struct SignalSamples
{
    CVector a;
    double delta = 1.0;
    double sigma = 0.0;

    Index size() const { return a.size(); }
};

struct LatticeBounds
{
    double x_min = -1.3;
    double x_max = 1.3;
    double y_min = -1.3;
    double y_max = 1.3;
};

/// What happens when two regions grown from different maxima meet.
enum class RegionMerge
{
    Partition, ///< contested cells stay with the higher maximum
    Union,     ///< touching regions are fused into one
};

/// Tuning knobs of the automatic estimator. Defaults reproduce the
/// reference benchmark configuration.
struct Hyperparameters
{
    int p_tilde        = 20;   ///< overestimate of the number of modes
    double beta_factor = 0.6;  ///< beta = beta_factor * 2 * p_tilde
    double gamma       = 0.4;  ///< R-diagonal filter exponent
    double tau         = 2e-3; ///< density peak threshold
    int pseudo_count   = 20;   ///< T, number of pseudosamples
    double sigma_ratio = 0.15; ///< sigma' / sigma
    double alpha       = 0.75; ///< cluster acceptance fraction
    int cadzow_iters   = 10;
    double cadzow_tol  = 1e-3; ///< relative to the Frobenius norm of U
    int lattice_dim    = 80;
    LatticeBounds lattice_bounds{};
    RegionMerge region_merge = RegionMerge::Partition;

    void validate() const;
};

/// s_k = sum_j c_j xi_j^k for k = 0..n-1; sigma of the result is 0.
SignalSamples synthesize(const ModalModel& model, Index n, double delta = 1.0);

/// Complex form of a real damped-cosine model: p = 2q, conjugate pairs.
ModalModel real_to_complex(const RealModalParams& params, double delta = 1.0);

/// Adds circular complex Gaussian noise with E|eps|^2 = sigma^2.
SignalSamples add_noise(const SignalSamples& signal, double sigma,
                        std::uint64_t seed);

/// Fills `out` with circular complex Gaussian draws of variance sigma^2.
void fill_complex_gaussian(std::mt19937_64& engine, double sigma,
                           CVector& out);

struct SnrSummary
{
    RVector per_mode;
    double min = 0.0;
};

/// SNR_i = sqrt(2) |c_i| / sigma.
SnrSummary snr(const ModalModel& model, double sigma);

/// SplitMix64 finaliser, used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b = 0);

/// The five-mode test signal used by the benchmark harness.
ModalModel benchmark_model();

} // namespace modalkit
