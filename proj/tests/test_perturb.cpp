#include <gtest/gtest.h>

#include <map>
#include <random>

#include "helpers.hpp"
#include "modalkit/pencil.hpp"
#include "modalkit/perturb.hpp"

using namespace modalkit;
using namespace std::complex_literals;
using testing_helpers::hausdorff;
using testing_helpers::make_model;

namespace
{

std::vector<PooledPoint> points_at(std::initializer_list<Complex> zs)
{
    std::vector<PooledPoint> out;
    for (auto z : zs)
        out.push_back({z, 0.0, 0});
    return out;
}

ClusterSet with_sizes(std::initializer_list<int> sizes)
{
    ClusterSet set;
    for (int s : sizes)
    {
        Cluster c;
        c.members.resize(static_cast<std::size_t>(s));
        set.clusters.push_back(c);
    }
    return set;
}

} // namespace

TEST(Pseudosamples, ZeroPerturbationCopiesTheData)
{
    const auto a    = synthesize(benchmark_model(), 40).a;
    const auto pool = gen_pseudosamples(a, 0.0, 5, 1);
    ASSERT_EQ(pool.count(), 5);
    for (const auto& s : pool.samples)
        EXPECT_EQ(s, a);
}

TEST(Pseudosamples, DeterministicPerSeed)
{
    const auto a = synthesize(benchmark_model(), 40).a;
    const auto p1 = gen_pseudosamples(a, 0.3, 4, 77);
    const auto p2 = gen_pseudosamples(a, 0.3, 4, 77);
    const auto p3 = gen_pseudosamples(a, 0.3, 4, 78);
    for (std::size_t r = 0; r < 4; ++r)
    {
        EXPECT_EQ(p1.samples[r], p2.samples[r]);
        EXPECT_NE(p1.samples[r], p3.samples[r]);
        EXPECT_EQ(p1.samples[r].size(), a.size());
    }
    EXPECT_NE(p1.samples[0], p1.samples[1]);
}

TEST(Pseudosamples, PerturbationVariance)
{
    const CVector a = CVector::Zero(5000);
    const auto pool = gen_pseudosamples(a, 0.4, 4, 3);
    double acc = 0.0;
    for (const auto& s : pool.samples)
        acc += s.squaredNorm();
    EXPECT_NEAR(acc / (4 * 5000), 0.16, 0.16 * 0.03);
}

TEST(PoolEigenvalues, DegeneratePoolIsTheGpofSolution)
{
    const auto d = add_noise(synthesize(benchmark_model(), 80), 0.3, 2);
    const auto pooled =
        pool_eigenvalues(gen_pseudosamples(d.a, 0.0, 1, 5), 40, 20);
    const auto direct = gpof(d.a, 40, 20);
    ASSERT_EQ(static_cast<Index>(pooled.points.size()), direct.zeta.size());
    for (std::size_t k = 0; k < pooled.points.size(); ++k)
    {
        EXPECT_EQ(pooled.points[k].z, direct.zeta[static_cast<Index>(k)]);
        EXPECT_EQ(pooled.points[k].source, 0);
    }
}

TEST(PoolEigenvalues, AtMostTPTildePoints)
{
    const auto d = add_noise(synthesize(benchmark_model(), 80), 1.0, 2);
    const auto pooled =
        pool_eigenvalues(gen_pseudosamples(d.a, 0.15, 20, 5), 40, 20);
    EXPECT_LE(pooled.points.size(), 400u);
    std::map<Index, int> per_source;
    for (const auto& p : pooled.points)
        ++per_source[p.source];
    EXPECT_EQ(per_source.size(), 20u);
    for (const auto& [r, k] : per_source)
        EXPECT_LE(k, 20);
}

TEST(PoolEigenvalues, NoiselessSingleModeCollapses)
{
    const Complex xi(0.6, -0.5);
    const auto a = synthesize(make_model({2.0}, {xi}), 40).a;
    const auto pooled =
        pool_eigenvalues(gen_pseudosamples(a, 0.0, 6, 1), 20, 20);
    ASSERT_FALSE(pooled.points.empty());
    for (const auto& p : pooled.points)
        EXPECT_LE(std::abs(p.z - xi), 1e-8);
}

TEST(GateByRegions, EmptyRegionSetDiscardsEverything)
{
    RegionSet empty;
    const auto g = gate_by_regions(points_at({0.1, 0.5i, -0.3}), empty);
    EXPECT_TRUE(g.retained.empty());
    EXPECT_EQ(g.discarded.size(), 3u);
}

TEST(GateByRegions, PeaksAreRetained)
{
    const auto d = add_noise(synthesize(benchmark_model(), 80), 0.1, 4);
    const auto g = condensed_density(d.a, Hyperparameters{}, 0.1);
    const auto rs = extract_regions(g, 2e-3);
    ASSERT_FALSE(rs.empty());
    std::vector<PooledPoint> pts;
    for (const auto& r : rs.regions)
        pts.push_back({r.peak, 0.0, 0});
    pts.push_back({Complex(1.29, 1.29), 0.0, 0});
    const auto gated = gate_by_regions(pts, rs);
    EXPECT_EQ(gated.retained.size(), rs.size());
    ASSERT_EQ(gated.discarded.size(), 1u);
    EXPECT_EQ(gated.discarded[0].z, Complex(1.29, 1.29));
}

TEST(GateByRegions, LowSnrDiscardsSpuriousModes)
{
    const double sigma = 2.0 * std::sqrt(2.0);
    const auto d = add_noise(synthesize(benchmark_model(), 80), sigma, 6);
    const auto t = estimate_traced(d.a, sigma, Hyperparameters{}, 1);
    EXPECT_FALSE(t.gated.discarded.empty());
    EXPECT_GT(t.report.discarded_fraction, 0.0);
}

TEST(KMeans, SeparableBlobsRecoverTheirMeans)
{
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g(0.0, 0.01);
    const std::vector<Complex> centres{{0.5, 0.5}, {-0.5, 0.2}, {0.1, -0.7}};
    std::vector<PooledPoint> pts;
    std::vector<Complex> sums(3, 0.0);
    for (int k = 0; k < 30; ++k)
        for (std::size_t c = 0; c < 3; ++c)
        {
            const Complex z = centres[c] + Complex(g(rng), g(rng));
            pts.push_back({z, 0.0, k});
            sums[c] += z;
        }
    CVector init(3);
    init << centres[0], centres[1], centres[2];
    const auto set = kmeans_cluster(pts, init);
    ASSERT_EQ(set.clusters.size(), 3u);
    for (std::size_t c = 0; c < 3; ++c)
    {
        EXPECT_EQ(set.clusters[c].cardinality(), 30);
        EXPECT_LE(std::abs(set.clusters[c].centroid - sums[c] / 30.0), 1e-12);
    }
}

TEST(KMeans, IdenticalPointsFillOneCluster)
{
    std::vector<PooledPoint> pts(10, PooledPoint{Complex(0.2, 0.2), 0.0, 0});
    CVector init(3);
    init << Complex(0.0, 0.0), Complex(1.0, 1.0), Complex(-1.0, 0.0);
    const auto set = kmeans_cluster(pts, init);
    int nonempty   = 0;
    for (const auto& c : set.clusters)
        if (c.cardinality() > 0)
        {
            ++nonempty;
            EXPECT_EQ(c.cardinality(), 10);
            EXPECT_LE(std::abs(c.centroid - Complex(0.2, 0.2)), 1e-15);
        }
    EXPECT_EQ(nonempty, 1);
    EXPECT_EQ(set.clusters.size(), 3u);
}

TEST(KMeans, TwoBlobsAtPlusMinusOne)
{
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    std::vector<PooledPoint> pts;
    Complex left = 0.0, right = 0.0;
    for (int k = 0; k < 20; ++k)
    {
        const Complex l(-1.0 + u(rng), u(rng)), r(1.0 + u(rng), u(rng));
        pts.push_back({l, 0.0, k});
        pts.push_back({r, 0.0, k});
        left += l;
        right += r;
    }
    CVector init(2);
    init << Complex(-0.5, 0.0), Complex(0.5, 0.0);
    const auto set = kmeans_cluster(pts, init);
    EXPECT_LE(std::abs(set.clusters[0].centroid - left / 20.0), 1e-12);
    EXPECT_LE(std::abs(set.clusters[1].centroid - right / 20.0), 1e-12);
}

TEST(KMeans, NoPointsGiveAnEmptySet)
{
    CVector init(2);
    init << 0.0, 1.0;
    const auto set = kmeans_cluster({}, init);
    EXPECT_TRUE(set.clusters.empty());
    EXPECT_EQ(set.accepted_count(), 0);
}

TEST(AcceptClusters, FloorAlphaTThreshold)
{
    const auto set = accept_clusters(with_sizes({20, 3, 15, 14}), 0.75, 20);
    EXPECT_TRUE(set.clusters[0].accepted);
    EXPECT_FALSE(set.clusters[1].accepted);
    EXPECT_TRUE(set.clusters[2].accepted);
    EXPECT_FALSE(set.clusters[3].accepted);
    EXPECT_EQ(set.accepted_count(), 2);
}

TEST(AcceptClusters, AlphaOneNeedsFullCardinality)
{
    const auto set = accept_clusters(with_sizes({20, 19, 25}), 1.0, 20);
    EXPECT_TRUE(set.clusters[0].accepted);
    EXPECT_FALSE(set.clusters[1].accepted);
    EXPECT_TRUE(set.clusters[2].accepted);
}

TEST(AcceptClusters, EmptyClustersNeverAccepted)
{
    EXPECT_EQ(accept_clusters(with_sizes({0, 0, 0}), 0.75, 20).accepted_count(),
              0);
    EXPECT_THROW(accept_clusters(with_sizes({1}), 0.5, 20), Error);
}

TEST(Estimate, NoiselessTwoModeSignal)
{
    const auto m = make_model({1.0, 0.8}, {Complex(0.5, 0.5), Complex(-0.6, 0.2)});
    const auto s = synthesize(m, 80);
    const double sigma = std::sqrt(2.0) * 0.8 / 1e4;
    const auto r       = estimate(s.a, sigma, Hyperparameters{}, 11);
    ASSERT_EQ(r.p_ott, 2);
    EXPECT_LE(std::abs(r.xi_hat[0] - m.xi[0]), 1e-6);
    EXPECT_LE(std::abs(r.xi_hat[1] - m.xi[1]), 1e-6);
    EXPECT_EQ(r.n, 80);
    EXPECT_EQ(r.seed, 11u);
}

TEST(Estimate, NoiselessTwoModeOrderAcrossSeeds)
{
    const auto m = make_model({1.0, 0.8}, {Complex(0.5, 0.5), Complex(-0.6, 0.2)});
    const auto s = synthesize(m, 80);
    const double sigma = std::sqrt(2.0) * 0.8 / 1e4;
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
    {
        const auto r = estimate(s.a, sigma, Hyperparameters{}, seed);
        ASSERT_EQ(r.p_ott, 2);
        EXPECT_LE(hausdorff(r.xi_hat, m.xi), 1e-2);
    }
}

TEST(Estimate, ModeErrorVanishesWithDeclaredSigma)
{
    const auto m = make_model({1.0, 0.8}, {Complex(0.5, 0.5), Complex(-0.6, 0.2)});
    const auto s = synthesize(m, 80);
    std::vector<double> err;
    for (double snr_min : {1e4, 1e5, 1e6})
    {
        const double sigma = std::sqrt(2.0) * 0.8 / snr_min;
        const auto r       = estimate(s.a, sigma, Hyperparameters{}, 3);
        ASSERT_EQ(r.p_ott, 2);
        err.push_back(hausdorff(r.xi_hat, m.xi));
    }
    EXPECT_LE(err[1], 1e-6);
    EXPECT_LE(err[2], 1e-7);
    EXPECT_NEAR(err[0] / err[1], 10.0, 1.0);
    EXPECT_NEAR(err[1] / err[2], 10.0, 1.0);
}

TEST(Estimate, Deterministic)
{
    const double sigma = std::sqrt(2.0);
    const auto d = add_noise(synthesize(benchmark_model(), 80), sigma, 21);
    const auto r1 = estimate(d.a, sigma, Hyperparameters{}, 5);
    const auto r2 = estimate(d.a, sigma, Hyperparameters{}, 5);
    EXPECT_EQ(r1.p_ott, r2.p_ott);
    EXPECT_EQ(r1.xi_hat, r2.xi_hat);
    EXPECT_EQ(r1.c_hat, r2.c_hat);
    EXPECT_EQ(r1.cluster_size, r2.cluster_size);
    EXPECT_EQ(r1.residual, r2.residual);
}

TEST(Estimate, ReportInvariants)
{
    const auto clean = synthesize(benchmark_model(), 80);
    const Hyperparameters hp;
    for (int h = 0; h < 8; ++h)
    {
        const double sigma = std::sqrt(2.0) / (1.0 + h);
        const auto d = add_noise(clean, sigma, 100 + static_cast<unsigned>(h));
        const auto t = estimate_traced(d.a, sigma, hp, 7);
        const auto& r = t.report;
        ASSERT_EQ(r.xi_hat.size(), r.p_ott);
        ASSERT_EQ(r.c_hat.size(), r.p_ott);
        ASSERT_EQ(static_cast<Index>(r.xi_spread.size()), r.p_ott);
        for (Index k = 0; k < r.p_ott; ++k)
        {
            EXPECT_TRUE(t.regions.region_of(r.xi_hat[k]).has_value());
            EXPECT_GE(r.cluster_size[static_cast<std::size_t>(k)], 15);
            if (k > 0)
            {
                EXPECT_GE(std::abs(r.c_hat[k - 1]), std::abs(r.c_hat[k]));
            }
        }
        if (r.p_ott >= 1)
        {
            const CVector fit = evaluate_modes(r.xi_hat, r.c_hat, 80);
            EXPECT_LE((fit - d.a).norm(), d.a.norm());
            EXPECT_NEAR(r.residual, (fit - d.a).norm(), 1e-9 * d.a.norm());
        }
        for (const auto& c : t.clusters.clusters)
        {
            if (c.accepted)
            {
                for (const auto& p : c.members)
                    EXPECT_TRUE(t.regions.region_of(p.z).has_value());
            }
        }
        EXPECT_EQ(r.region_count, static_cast<Index>(t.regions.size()));
    }
}

TEST(Estimate, EveryPseudosampleHitsEveryModeAtHighSnr)
{
    const auto m = benchmark_model();
    const double sigma = std::sqrt(2.0) / 10.0;
    for (std::uint64_t h = 0; h < 5; ++h)
    {
        const auto d = add_noise(synthesize(m, 80), sigma, 300 + h);
        const auto t = estimate_traced(d.a, sigma, Hyperparameters{}, h);
        std::map<Index, std::vector<Complex>> by_source;
        for (const auto& p : t.pooled.points)
            by_source[p.source].push_back(p.z);
        ASSERT_EQ(by_source.size(), 20u);
        for (const auto& [r, zs] : by_source)
            for (Index k = 0; k < m.order(); ++k)
            {
                double best = 1e9;
                for (auto z : zs)
                    best = std::min(best, std::abs(z - m.xi[k]));
                EXPECT_LE(best, 0.05) << "pseudosample " << r << " mode " << k;
            }
    }
}

TEST(Estimate, NoRegionsGiveAnEmptyReport)
{
    Hyperparameters hp;
    hp.tau = 10.0;
    const auto d = add_noise(synthesize(benchmark_model(), 80), 1.0, 1);
    const auto r = estimate(d.a, 1.0, hp, 1);
    EXPECT_EQ(r.p_ott, 0);
    EXPECT_TRUE(r.no_regions);
    EXPECT_EQ(r.region_count, 0);
}

TEST(Estimate, NeedsTwoPTildeSamples)
{
    const auto a = synthesize(benchmark_model(), 39).a;
    EXPECT_THROW(estimate(a, 0.1, Hyperparameters{}, 1), Error);
}
