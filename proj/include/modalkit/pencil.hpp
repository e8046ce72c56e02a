#pragma once

#include <vector>

#include <Eigen/SVD>

#include "modalkit/model.hpp"

namespace modalkit
{

///
/// Hankel data matrix U[i][j] = a_{i+j} of size (n-l) x (l+1).
///
/// Only the generating sequence is stored, so the Hankel structure holds by
/// construction. `u0()` drops the last column and `u1()` the first one.
///
class HankelDataMatrix
{
public:
    HankelDataMatrix() = default;
    HankelDataMatrix(CVector samples, Index l);

    Index rows() const { return samples_.size() - l_; }
    Index cols() const { return l_ + 1; }
    Index pencil_parameter() const { return l_; }
    Index source_length() const { return samples_.size(); }
    const CVector& samples() const { return samples_; }

    Complex operator()(Index i, Index j) const { return samples_[i + j]; }

    CMatrix dense() const;
    CMatrix u0() const;
    CMatrix u1() const;

private:
    CVector samples_;
    Index l_ = 0;
};

HankelDataMatrix build_data_matrix(const CVector& a, Index l);

/// Averages every anti-diagonal of a (n-l) x (l+1) matrix.
HankelDataMatrix hankel_projection(const CMatrix& m);

struct PencilSolution
{
    CVector zeta;
    CVector gamma;
    double residual = 0.0;
    /// Set when fewer modes than requested were numerically supported or the
    /// weight system was rank deficient.
    bool rank_deficient = false;
};

struct LeastSquaresFit
{
    CVector gamma;
    double residual     = 0.0;
    bool rank_deficient = false;
};

/// gamma = argmin ||V(xi) gamma - a||_2 with V[k][j] = xi_j^k, solved by a
/// complete orthogonal decomposition of V (minimum norm if deficient).
LeastSquaresFit weights_ls(const CVector& a, const CVector& xi);

/// V(xi) gamma evaluated at k = 0..n-1.
CVector evaluate_modes(const CVector& xi, const CVector& gamma, Index n);

/// Permutation ordering modes by descending |gamma|, ties by descending
/// |zeta| then by angle.
std::vector<Index> weight_order(const CVector& zeta, const CVector& gamma);

/// Applies `weight_order` to both vectors.
void sort_by_weight(CVector& zeta, CVector& gamma);

/// Threshold above which a square pencil matrix is declared singular.
inline constexpr double singular_pencil_condition = 1e12;

/// Exact interpolation of n (even) samples by n/2 exponentials through the
/// generalized eigenvalues of the square pencil U1 - z U0.
PencilSolution ceip_square(const CVector& a);

struct CadzowResult
{
    HankelDataMatrix matrix;
    int iterations = 0;
    double change  = 0.0;
    std::vector<double> change_history;
};

/// Alternating rank-`rank` truncation and anti-diagonal averaging until the
/// Frobenius change drops below `eta` or `max_iter` sweeps were made.
CadzowResult cadzow(const HankelDataMatrix& u, Index rank, int max_iter,
                    double eta);

/// Singular values below max(rows, cols) * eps * s_max count as zero.
Index numerical_rank(const RVector& singular_values, Index rows, Index cols);

///
/// SVD of the Hankel data matrix, reusable for several model orders.
///
class GpofFactorization
{
public:
    GpofFactorization(const CVector& a, Index l);

    Index numerical_rank() const { return rank_; }
    Index pencil_parameter() const { return l_; }
    const RVector& singular_values() const { return svd_.singularValues(); }

    /// Eigenvalues of the reduced p x p pencil built from the leading
    /// `p_hat` right singular vectors. Returns min(p_hat, rank) values.
    CVector modes(Index p_hat) const;

private:
    Eigen::BDCSVD<CMatrix> svd_;
    Index l_    = 0;
    Index rank_ = 0;
};

/// Generalized pencil-of-function estimate of `p_hat` modes, with weights
/// fitted by `weights_ls` on all of `a`.
PencilSolution gpof(const CVector& a, Index l, Index p_hat);

} // namespace modalkit
