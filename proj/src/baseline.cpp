#include "modalkit/baseline.hpp"

#include <cmath>

#include "modalkit/pencil.hpp"

namespace modalkit
{

double residual_sum_of_squares(const CVector& a, const ModalModel& model)
{
    return (evaluate_modes(model.xi, model.c, a.size()) - a).squaredNorm();
}

double bic_score(const CVector& a, const ModalModel& model)
{
    require(model.order() >= 1, "BIC needs a nonempty model");
    const double rss = residual_sum_of_squares(a, model);
    const double floor =
        perfect_fit_relative_residual * perfect_fit_relative_residual *
        a.squaredNorm();
    if (rss <= floor)
        return -std::numeric_limits<double>::infinity();
    const double obs = 2.0 * static_cast<double>(a.size());
    const double k   = 4.0 * static_cast<double>(model.order());
    return obs * std::log(rss / obs) + k * std::log(obs);
}

GridSearchResult gpof_grid_search(const CVector& a)
{
    const Index n = a.size();
    require(n >= 6, "grid search needs at least 6 samples");
    GridSearchResult best;
    bool found = false;
    Index best_modes = 0;

    for (Index m = (n + 2) / 3; m <= n; ++m)
    {
        const Index l     = m / 2;
        const Index p_min = (l + 2) / 3;
        const Index p_max = l / 2;
        if (l < 1 || p_min > p_max || p_min < 1)
            continue;
        const GpofFactorization factor(a.head(m), l);
        for (Index p_hat = p_min; p_hat <= p_max; ++p_hat)
        {
            GridPoint gp{m, l, p_hat, 0, 0.0,
                         std::numeric_limits<double>::infinity()};
            ModalModel model;
            model.xi = factor.modes(p_hat);
            gp.modes = model.xi.size();
            if (gp.modes > 0)
            {
                model.c = weights_ls(a, model.xi).gamma;
                gp.rss  = residual_sum_of_squares(a, model);
                gp.bic  = bic_score(a, model);
            }
            best.grid_scores.push_back(gp);
            if (gp.modes == 0 || std::isnan(gp.bic))
                continue;
            const bool better =
                !found || gp.bic < best.bic ||
                (gp.bic == best.bic && gp.modes < best_modes);
            if (better)
            {
                found       = true;
                best.bic    = gp.bic;
                best.m_ott  = m;
                best.p_ott  = gp.modes;
                best_modes  = gp.modes;
                best.model  = std::move(model);
            }
        }
    }
    if (!found)
        throw Error(ErrorCode::NoModel, "no grid point produced a model");
    sort_by_weight(best.model.xi, best.model.c);
    return best;
}

ErrorRecord relative_error(const ModalModel& truth, const ModalModel& est,
                           double sigma)
{
    ErrorRecord rec;
    rec.sigma     = sigma;
    rec.p_ott     = est.order();
    const Index p = truth.order();
    if (rec.p_ott < p)
    {
        rec.e = -1.0;
        return rec;
    }
    CVector txi = truth.xi, tc = truth.c;
    CVector exi = est.xi, ec = est.c;
    sort_by_weight(txi, tc);
    sort_by_weight(exi, ec);
    const double dc =
        (tc - ec.head(p)).squaredNorm() / tc.squaredNorm();
    const double dxi =
        (txi - exi.head(p)).squaredNorm() / txi.squaredNorm();
    rec.e = dc + dxi;
    return rec;
}

MseSummary mse_aggregate(const std::vector<ErrorRecord>& records)
{
    MseSummary s;
    double sum = 0.0;
    for (const auto& r : records)
        if (r.e >= 0.0)
        {
            sum += r.e;
            ++s.n_sigma;
        }
    if (s.n_sigma > 0)
        s.mse = sum / static_cast<double>(s.n_sigma);
    return s;
}

} // namespace modalkit
