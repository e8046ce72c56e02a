#include "modalkit/pencil.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

namespace modalkit
{

HankelDataMatrix::HankelDataMatrix(CVector samples, Index l)
    : samples_(std::move(samples)), l_(l)
{
    require(l_ >= 1 && l_ <= samples_.size() - 1,
            "pencil parameter l must satisfy 1 <= l <= n-1");
}

CMatrix HankelDataMatrix::dense() const
{
    CMatrix m(rows(), cols());
    for (Index j = 0; j < cols(); ++j)
        m.col(j) = samples_.segment(j, rows());
    return m;
}

CMatrix HankelDataMatrix::u0() const { return dense().leftCols(l_); }
CMatrix HankelDataMatrix::u1() const { return dense().rightCols(l_); }

HankelDataMatrix build_data_matrix(const CVector& a, Index l)
{
    return HankelDataMatrix(a, l);
}

HankelDataMatrix hankel_projection(const CMatrix& m)
{
    const Index rows = m.rows();
    const Index cols = m.cols();
    CVector sum      = CVector::Zero(rows + cols - 1);
    Eigen::VectorXi count = Eigen::VectorXi::Zero(rows + cols - 1);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i)
        {
            sum[i + j] += m(i, j);
            ++count[i + j];
        }
    for (Index d = 0; d < sum.size(); ++d)
        sum[d] /= static_cast<double>(count[d]);
    return HankelDataMatrix(std::move(sum), cols - 1);
}

CVector evaluate_modes(const CVector& xi, const CVector& gamma, Index n)
{
    CVector s = CVector::Zero(n);
    for (Index j = 0; j < xi.size(); ++j)
    {
        Complex power(1.0, 0.0);
        for (Index k = 0; k < n; ++k)
        {
            s[k] += gamma[j] * power;
            power *= xi[j];
        }
    }
    return s;
}

LeastSquaresFit weights_ls(const CVector& a, const CVector& xi)
{
    const Index n = a.size();
    const Index p = xi.size();
    require(p <= n, "more modes than samples");
    LeastSquaresFit fit;
    if (p == 0)
    {
        fit.gamma.resize(0);
        fit.residual = a.norm();
        return fit;
    }
    CMatrix v(n, p);
    for (Index j = 0; j < p; ++j)
    {
        Complex power(1.0, 0.0);
        for (Index k = 0; k < n; ++k)
        {
            v(k, j) = power;
            power *= xi[j];
        }
    }
    Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(v);
    fit.gamma          = cod.solve(a);
    fit.rank_deficient = cod.rank() < p;
    fit.residual       = (v * fit.gamma - a).norm();
    return fit;
}

std::vector<Index> weight_order(const CVector& zeta, const CVector& gamma)
{
    std::vector<Index> order(static_cast<std::size_t>(zeta.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) {
        const double gx = std::abs(gamma[x]), gy = std::abs(gamma[y]);
        if (gx != gy)
            return gx > gy;
        const double zx = std::abs(zeta[x]), zy = std::abs(zeta[y]);
        if (zx != zy)
            return zx > zy;
        return std::arg(zeta[x]) < std::arg(zeta[y]);
    });
    return order;
}

void sort_by_weight(CVector& zeta, CVector& gamma)
{
    const auto order = weight_order(zeta, gamma);
    CVector z(zeta.size()), g(gamma.size());
    for (std::size_t i = 0; i < order.size(); ++i)
    {
        z[static_cast<Index>(i)] = zeta[order[i]];
        g[static_cast<Index>(i)] = gamma[order[i]];
    }
    zeta  = std::move(z);
    gamma = std::move(g);
}

namespace
{

double condition_number(const CMatrix& m)
{
    Eigen::JacobiSVD<CMatrix> svd(m);
    const RVector& s = svd.singularValues();
    if (s.size() == 0 || s[s.size() - 1] == 0.0)
        return std::numeric_limits<double>::infinity();
    return s[0] / s[s.size() - 1];
}

} // namespace

PencilSolution ceip_square(const CVector& a)
{
    const Index n = a.size();
    require(n >= 2 && n % 2 == 0, "square pencil needs an even sample count");
    const Index m = n / 2;
    CMatrix u0(m, m), u1(m, m);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < m; ++j)
        {
            u0(i, j) = a[i + j];
            u1(i, j) = a[i + j + 1];
        }

    const double cond0 = condition_number(u0);
    const double cond1 = condition_number(u1);
    if (!(cond0 <= singular_pencil_condition) ||
        !(cond1 <= singular_pencil_condition))
        throw Error(ErrorCode::SingularPencil,
                    "square Hankel pencil is numerically singular");

    CVector zeta;
    if (cond0 <= 1e8)
    {
        const CMatrix a_std = u0.partialPivLu().solve(u1);
        zeta                = Eigen::ComplexEigenSolver<CMatrix>(a_std, false)
                   .eigenvalues();
    }
    else
    {
        // Shift-and-invert: z = s + 1/mu with mu eigenvalues of
        // (U1 - s U0)^{-1} U0. Pick the best conditioned trial shift.
        const Complex shifts[] = {Complex(0.3, 0.7), Complex(-0.6, 0.2),
                                  Complex(0.9, -0.4), Complex(-0.2, -1.1)};
        Complex best_shift = shifts[0];
        double best_cond   = std::numeric_limits<double>::infinity();
        for (Complex s : shifts)
        {
            const double c = condition_number(u1 - s * u0);
            if (c < best_cond)
            {
                best_cond  = c;
                best_shift = s;
            }
        }
        const CMatrix inv_pencil =
            (u1 - best_shift * u0).partialPivLu().solve(u0);
        const CVector mu =
            Eigen::ComplexEigenSolver<CMatrix>(inv_pencil, false).eigenvalues();
        zeta.resize(m);
        for (Index j = 0; j < m; ++j)
            zeta[j] = best_shift + 1.0 / mu[j];
    }

    PencilSolution sol;
    const auto fit     = weights_ls(a, zeta);
    sol.zeta           = zeta;
    sol.gamma          = fit.gamma;
    sol.residual       = fit.residual;
    sol.rank_deficient = fit.rank_deficient;
    sort_by_weight(sol.zeta, sol.gamma);
    return sol;
}

CadzowResult cadzow(const HankelDataMatrix& u, Index rank, int max_iter,
                    double eta)
{
    require(rank >= 1 && rank <= std::min(u.rows(), u.cols()),
            "Cadzow rank must satisfy 1 <= p <= min(rows, cols)");
    require(eta > 0.0, "Cadzow tolerance must be positive");
    require(max_iter >= 1, "Cadzow needs at least one iteration");

    CadzowResult result;
    result.matrix   = u;
    CMatrix current = u.dense();
    for (int k = 0; k < max_iter; ++k)
    {
        Eigen::BDCSVD<CMatrix> svd(current,
                                   Eigen::ComputeThinU | Eigen::ComputeThinV);
        const CMatrix truncated =
            svd.matrixU().leftCols(rank) *
            svd.singularValues().head(rank).asDiagonal() *
            svd.matrixV().leftCols(rank).adjoint();
        HankelDataMatrix next = hankel_projection(truncated);
        CMatrix next_dense    = next.dense();
        const double change   = (next_dense - current).norm();

        result.matrix = std::move(next);
        result.iterations = k + 1;
        result.change     = change;
        result.change_history.push_back(change);
        current = std::move(next_dense);
        if (change < eta)
            break;
    }
    return result;
}

Index numerical_rank(const RVector& singular_values, Index rows, Index cols)
{
    if (singular_values.size() == 0 || singular_values[0] == 0.0)
        return 0;
    const double tol = static_cast<double>(std::max(rows, cols)) *
                       std::numeric_limits<double>::epsilon() *
                       singular_values[0];
    return (singular_values.array() > tol).count();
}

GpofFactorization::GpofFactorization(const CVector& a, Index l)
    : l_(l)
{
    const HankelDataMatrix u(a, l);
    svd_.compute(u.dense(), Eigen::ComputeThinV);
    rank_ = modalkit::numerical_rank(svd_.singularValues(), u.rows(),
                                     u.cols());
}

CVector GpofFactorization::modes(Index p_hat) const
{
    require(p_hat >= 1 && p_hat <= l_, "GPOF order must satisfy 1 <= p <= l");
    const Index k = std::min(p_hat, rank_);
    if (k == 0)
        return CVector(0);
    // Rows of Q^F = V_k^H span the signal row space; shifting a row by one
    // column multiplies by the mode matrix. The transposes of the two
    // column-selected blocks give a p x p problem whose eigenvalues are the
    // rank reducing numbers of Q^F E1 - z Q^F E0.
    const auto vk       = svd_.matrixV().leftCols(k);
    const CMatrix lead  = vk.topRows(l_).conjugate();
    const CMatrix trail = vk.bottomRows(l_).conjugate();
    const CMatrix reduced = lead.colPivHouseholderQr().solve(trail);
    return Eigen::ComplexEigenSolver<CMatrix>(reduced, false).eigenvalues();
}

PencilSolution gpof(const CVector& a, Index l, Index p_hat)
{
    const Index n = a.size();
    require(p_hat >= 1 && p_hat <= l && 2 * l <= n,
            "GPOF requires 1 <= p_hat <= l <= n/2");
    const GpofFactorization factor(a, l);
    PencilSolution sol;
    sol.zeta           = factor.modes(p_hat);
    sol.rank_deficient = sol.zeta.size() < p_hat;
    const auto fit     = weights_ls(a, sol.zeta);
    sol.gamma          = fit.gamma;
    sol.residual       = fit.residual;
    sol.rank_deficient = sol.rank_deficient || fit.rank_deficient;
    sort_by_weight(sol.zeta, sol.gamma);
    return sol;
}

} // namespace modalkit
