#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "modalkit/model.hpp"

namespace modalkit
{

/// Residual sum of squares ||V(xi) c - a||^2 over real and imaginary parts.
double residual_sum_of_squares(const CVector& a, const ModalModel& model);

/// Residuals at or below this fraction of ||a|| count as a perfect fit.
inline constexpr double perfect_fit_relative_residual = 1e-10;

/// BIC = 2n ln(RSS / 2n) + 4p ln(2n) with 2n real observations and 4p real
/// parameters. A perfect fit scores -infinity. Lower is better.
double bic_score(const CVector& a, const ModalModel& model);

struct GridPoint
{
    Index m     = 0;
    Index l     = 0;
    Index p_hat = 0;
    Index modes = 0; ///< modes actually returned (rank may cut p_hat)
    double rss  = 0.0;
    double bic  = std::numeric_limits<double>::infinity();
};

struct GridSearchResult
{
    Index m_ott = 0;
    Index p_ott = 0;
    ModalModel model; ///< sorted by descending |c|
    double bic = std::numeric_limits<double>::infinity();
    std::vector<GridPoint> grid_scores;
};

///
/// GPOF over m = ceil(n/3)..n (first m samples, l = floor(m/2)) and
/// p_hat = ceil(l/3)..floor(l/2). Weights and BIC use all n samples. Ties
/// go to fewer parameters, then to smaller m.
///
GridSearchResult gpof_grid_search(const CVector& a);

struct ErrorRecord
{
    double e    = -1.0;
    Index p_ott = 0;
    double sigma = 0.0;
};

/// Relative error of the p leading (by |c|) estimated modes paired
/// index-wise with the truth sorted the same way; -1 when fewer than p modes
/// were found.
ErrorRecord relative_error(const ModalModel& truth, const ModalModel& est,
                           double sigma = 0.0);

struct MseSummary
{
    std::optional<double> mse;
    Index n_sigma = 0;
};

MseSummary mse_aggregate(const std::vector<ErrorRecord>& records);

} // namespace modalkit
