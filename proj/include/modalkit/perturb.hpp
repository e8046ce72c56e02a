#pragma once

#include <cstdint>
#include <vector>

#include "modalkit/density.hpp"
#include "modalkit/model.hpp"

namespace modalkit
{

struct PseudosamplePool
{
    std::vector<CVector> samples;
    double sigma_prime = 0.0;
    std::uint64_t seed = 0;

    Index count() const { return static_cast<Index>(samples.size()); }
};

/// T copies a + nu^(r), nu i.i.d. circular complex Gaussian, E|nu|^2 =
/// sigma_prime^2.
PseudosamplePool gen_pseudosamples(const CVector& a, double sigma_prime,
                                   Index count, std::uint64_t seed);

struct PooledPoint
{
    Complex z;
    Complex weight; ///< GPOF weight fitted on the source pseudosample
    Index source = 0;
};

struct PooledEigenvalues
{
    std::vector<PooledPoint> points;
    Index rank_deficient_samples = 0;
};

/// GPOF of order `p_tilde` with pencil parameter `l` on every pseudosample.
PooledEigenvalues pool_eigenvalues(const PseudosamplePool& pool, Index l,
                                   Index p_tilde);

struct GatedPoints
{
    std::vector<PooledPoint> retained;
    std::vector<PooledPoint> discarded;
};

/// Keeps the points whose nearest lattice cell belongs to a region.
GatedPoints gate_by_regions(const std::vector<PooledPoint>& points,
                            const RegionSet& regions);

struct Cluster
{
    Complex centroid;
    std::vector<PooledPoint> members;
    bool accepted = false;

    Index cardinality() const { return static_cast<Index>(members.size()); }
};

struct ClusterSet
{
    std::vector<Cluster> clusters;
    CVector init_centroids;
    std::vector<PooledPoint> discarded_points;
    int iterations = 0;

    Index accepted_count() const;
};

/// Lloyd iteration in the plane from the given centroids; stops when the
/// assignment is stable or after `max_iter` sweeps. Empty clusters keep
/// their previous centroid.
ClusterSet kmeans_cluster(const std::vector<PooledPoint>& points,
                          const CVector& init, int max_iter = 100);

/// Marks clusters with at least floor(alpha T) members as accepted.
ClusterSet accept_clusters(ClusterSet clusters, double alpha, Index count);

struct EstimationReport
{
    Index p_ott = 0;
    CVector xi_hat;
    CVector c_hat;
    /// Per accepted cluster: (sd of real parts, sd of imaginary parts).
    std::vector<std::pair<double, double>> xi_spread;
    std::vector<std::pair<double, double>> c_spread;
    /// Cluster means of the per-pseudosample weights.
    CVector c_cluster_mean;
    std::vector<Index> cluster_size;
    double residual = 0.0;

    // diagnostics
    Index region_count        = 0;
    bool no_regions           = false;
    Index pooled_count        = 0;
    double discarded_fraction = 0.0;
    Index rank_deficient_samples = 0;
    Index cadzow_rank            = 0;
    int cadzow_iterations        = 0;
    std::uint64_t seed           = 0;
    double sigma                 = 0.0;
    Index n                      = 0;
    Hyperparameters hp;
};

/// The automatic two-stage estimator: condensed-density regions from the
/// first 2 p_tilde samples, then clustering of perturbed GPOF solutions.
/// Modes are reported by descending |c_hat|.
EstimationReport estimate(const CVector& a, double sigma,
                          const Hyperparameters& hp, std::uint64_t seed);

/// Same pipeline, also returning the intermediate stages.
struct EstimationTrace
{
    DensityGrid density;
    RegionSet regions;
    PooledEigenvalues pooled;
    GatedPoints gated;
    ClusterSet clusters;
    EstimationReport report;
};

EstimationTrace estimate_traced(const CVector& a, double sigma,
                                const Hyperparameters& hp,
                                std::uint64_t seed);

} // namespace modalkit
