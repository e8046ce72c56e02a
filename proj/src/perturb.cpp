#include "modalkit/perturb.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "modalkit/pencil.hpp"

namespace modalkit
{

PseudosamplePool gen_pseudosamples(const CVector& a, double sigma_prime,
                                   Index count, std::uint64_t seed)
{
    require(count >= 1, "need at least one pseudosample");
    require(sigma_prime >= 0.0, "sigma' must be nonnegative");
    PseudosamplePool pool;
    pool.sigma_prime = sigma_prime;
    pool.seed        = seed;
    pool.samples.reserve(static_cast<std::size_t>(count));
    std::mt19937_64 engine(seed);
    CVector noise(a.size());
    for (Index r = 0; r < count; ++r)
    {
        fill_complex_gaussian(engine, sigma_prime, noise);
        pool.samples.push_back(a + noise);
    }
    return pool;
}

PooledEigenvalues pool_eigenvalues(const PseudosamplePool& pool, Index l,
                                   Index p_tilde)
{
    PooledEigenvalues out;
    for (Index r = 0; r < pool.count(); ++r)
    {
        const auto sol =
            gpof(pool.samples[static_cast<std::size_t>(r)], l, p_tilde);
        if (sol.rank_deficient)
            ++out.rank_deficient_samples;
        for (Index j = 0; j < sol.zeta.size(); ++j)
            out.points.push_back({sol.zeta[j], sol.gamma[j], r});
    }
    return out;
}

GatedPoints gate_by_regions(const std::vector<PooledPoint>& points,
                            const RegionSet& regions)
{
    GatedPoints out;
    for (const auto& pt : points)
    {
        if (regions.region_of(pt.z))
            out.retained.push_back(pt);
        else
            out.discarded.push_back(pt);
    }
    return out;
}

Index ClusterSet::accepted_count() const
{
    Index k = 0;
    for (const auto& c : clusters)
        k += c.accepted ? 1 : 0;
    return k;
}

ClusterSet kmeans_cluster(const std::vector<PooledPoint>& points,
                          const CVector& init, int max_iter)
{
    ClusterSet out;
    out.init_centroids = init;
    if (points.empty() || init.size() == 0)
        return out;

    const Index k = init.size();
    CVector centroids = init;
    std::vector<Index> assign(points.size(), -1);
    for (int it = 0; it < max_iter; ++it)
    {
        bool changed = false;
        for (std::size_t i = 0; i < points.size(); ++i)
        {
            Index best   = 0;
            double bestd = std::numeric_limits<double>::infinity();
            for (Index c = 0; c < k; ++c)
            {
                const double d = std::norm(points[i].z - centroids[c]);
                if (d < bestd)
                {
                    bestd = d;
                    best  = c;
                }
            }
            if (assign[i] != best)
            {
                assign[i] = best;
                changed   = true;
            }
        }
        out.iterations = it + 1;
        if (!changed)
            break;
        CVector sum                 = CVector::Zero(k);
        std::vector<Index> counts(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < points.size(); ++i)
        {
            sum[assign[i]] += points[i].z;
            ++counts[static_cast<std::size_t>(assign[i])];
        }
        for (Index c = 0; c < k; ++c)
            if (counts[static_cast<std::size_t>(c)] > 0)
                centroids[c] =
                    sum[c] / static_cast<double>(counts[static_cast<std::size_t>(c)]);
    }

    out.clusters.resize(static_cast<std::size_t>(k));
    for (Index c = 0; c < k; ++c)
        out.clusters[static_cast<std::size_t>(c)].centroid = centroids[c];
    for (std::size_t i = 0; i < points.size(); ++i)
        out.clusters[static_cast<std::size_t>(assign[i])].members.push_back(
            points[i]);
    return out;
}

ClusterSet accept_clusters(ClusterSet clusters, double alpha, Index count)
{
    require(alpha > 0.5 && alpha <= 1.0, "alpha must lie in (0.5, 1]");
    const auto threshold =
        static_cast<Index>(std::floor(alpha * static_cast<double>(count)));
    for (auto& c : clusters.clusters)
        c.accepted = c.cardinality() > 0 && c.cardinality() >= threshold;
    return clusters;
}

namespace
{

std::pair<double, double> spread_of(const std::vector<Complex>& values)
{
    const auto m = static_cast<double>(values.size());
    if (values.size() < 2)
        return {0.0, 0.0};
    Complex mean(0.0);
    for (Complex v : values)
        mean += v;
    mean /= m;
    double sr = 0.0, si = 0.0;
    for (Complex v : values)
    {
        sr += (v.real() - mean.real()) * (v.real() - mean.real());
        si += (v.imag() - mean.imag()) * (v.imag() - mean.imag());
    }
    return {std::sqrt(sr / (m - 1.0)), std::sqrt(si / (m - 1.0))};
}

} // namespace

EstimationTrace estimate_traced(const CVector& a, double sigma,
                                const Hyperparameters& hp,
                                std::uint64_t seed)
{
    hp.validate();
    require(sigma > 0.0, "estimate needs sigma > 0");
    const Index n = a.size();
    if (n < 2 * static_cast<Index>(hp.p_tilde))
        throw Error(ErrorCode::InsufficientData,
                    "estimate needs at least 2 * p_tilde samples");

    EstimationTrace t;
    EstimationReport& rep = t.report;
    rep.seed              = seed;
    rep.sigma             = sigma;
    rep.n                 = n;
    rep.hp                = hp;

    t.density             = condensed_density(a, hp, sigma);
    rep.cadzow_rank       = t.density.cadzow_rank;
    rep.cadzow_iterations = t.density.cadzow_iterations;
    t.regions             = extract_regions(t.density, hp.tau, hp.region_merge);
    rep.region_count      = static_cast<Index>(t.regions.size());
    if (t.regions.empty())
    {
        rep.no_regions = true;
        rep.residual   = a.norm();
        return t;
    }

    const Index l       = n / 2;
    const Index p_tilde = hp.p_tilde;
    const auto pool     = gen_pseudosamples(
        a, hp.sigma_ratio * sigma, hp.pseudo_count, derive_seed(seed, 1));
    t.pooled                   = pool_eigenvalues(pool, l, p_tilde);
    rep.rank_deficient_samples = t.pooled.rank_deficient_samples;
    rep.pooled_count           = static_cast<Index>(t.pooled.points.size());
    t.gated                    = gate_by_regions(t.pooled.points, t.regions);
    rep.discarded_fraction =
        t.pooled.points.empty()
            ? 0.0
            : static_cast<double>(t.gated.discarded.size()) /
                  static_cast<double>(t.pooled.points.size());

    const auto init = gpof(a, l, p_tilde).zeta;
    t.clusters      = kmeans_cluster(t.gated.retained, init);
    t.clusters.discarded_points = t.gated.discarded;
    t.clusters = accept_clusters(std::move(t.clusters), hp.alpha,
                                 hp.pseudo_count);

    std::vector<Complex> xi;
    for (const auto& c : t.clusters.clusters)
    {
        if (!c.accepted)
            continue;
        std::vector<Complex> zs, ws;
        Complex zsum(0.0), wsum(0.0);
        for (const auto& m : c.members)
        {
            zs.push_back(m.z);
            ws.push_back(m.weight);
            zsum += m.z;
            wsum += m.weight;
        }
        const double size = static_cast<double>(c.members.size());
        xi.push_back(zsum / size);
        rep.xi_spread.push_back(spread_of(zs));
        rep.c_spread.push_back(spread_of(ws));
        rep.cluster_size.push_back(c.cardinality());
        rep.c_cluster_mean.conservativeResize(rep.c_cluster_mean.size() + 1);
        rep.c_cluster_mean[rep.c_cluster_mean.size() - 1] = wsum / size;
    }
    rep.p_ott = static_cast<Index>(xi.size());
    rep.xi_hat = Eigen::Map<const CVector>(xi.data(), rep.p_ott);
    const auto fit = weights_ls(a, rep.xi_hat);
    rep.c_hat      = fit.gamma;
    rep.residual   = fit.residual;

    // Reorder every per-cluster field by descending |c_hat|.
    const auto order = weight_order(rep.xi_hat, rep.c_hat);
    auto permute_vec = [&](CVector& v) {
        CVector out(v.size());
        for (Index i = 0; i < v.size(); ++i)
            out[i] = v[order[static_cast<std::size_t>(i)]];
        v = std::move(out);
    };
    auto permute_std = [&](auto& v) {
        auto out = v;
        for (std::size_t i = 0; i < v.size(); ++i)
            out[i] = v[static_cast<std::size_t>(order[i])];
        v = std::move(out);
    };
    permute_vec(rep.xi_hat);
    permute_vec(rep.c_hat);
    permute_vec(rep.c_cluster_mean);
    permute_std(rep.xi_spread);
    permute_std(rep.c_spread);
    permute_std(rep.cluster_size);
    return t;
}

EstimationReport estimate(const CVector& a, double sigma,
                          const Hyperparameters& hp, std::uint64_t seed)
{
    return estimate_traced(a, sigma, hp, seed).report;
}

} // namespace modalkit
