#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "modalkit/model.hpp"

namespace modalkit
{

/// Lattice size at which tau is calibrated.
inline constexpr double reference_lattice_dim = 80.0;

/// Region growth stops at cells whose scaled mass is below this fraction of
/// tau.
inline constexpr double region_floor_fraction = 0.1;

///
/// Square lattice of dim x dim points over `bounds`. Point (i, j) sits at
/// (x_min + i dx, y_min + j dy); each point owns the cell centred on it.
///
struct Lattice
{
    LatticeBounds bounds{};
    int dim = 80;

    double dx() const { return (bounds.x_max - bounds.x_min) / (dim - 1); }
    double dy() const { return (bounds.y_max - bounds.y_min) / (dim - 1); }
    double cell_area() const { return dx() * dy(); }
    double x(int i) const { return bounds.x_min + i * dx(); }
    double y(int j) const { return bounds.y_min + j * dy(); }
    Complex point(int i, int j) const { return {x(i), y(j)}; }

    /// Nearest lattice cell, or nothing when z is outside the lattice.
    std::optional<std::pair<int, int>> locate(Complex z) const;
};

struct DensityGrid
{
    Lattice lattice;
    Eigen::MatrixXd values; ///< values(i, j) at lattice.point(i, j)
    double beta = 0.0;

    // pipeline diagnostics
    Index cadzow_rank     = 0;
    int cadzow_iterations = 0;
    double cadzow_change  = 0.0;

    /// Probability mass of a cell rescaled to an 80 x 80 lattice, the
    /// quantity compared against tau.
    double scaled_mass(int i, int j) const
    {
        const double r = (lattice.dim - 1) / (reference_lattice_dim - 1.0);
        return values(i, j) * lattice.cell_area() * r * r;
    }
};

struct Region
{
    std::vector<std::pair<int, int>> cells;
    std::pair<int, int> peak_cell{};
    Complex peak{};
    double peak_value = 0.0;
};

struct RegionSet
{
    std::vector<Region> regions;
    /// label(i, j) = region index or -1.
    Eigen::MatrixXi label;
    Lattice lattice;

    std::size_t size() const { return regions.size(); }
    bool empty() const { return regions.empty(); }
    /// Index of the region whose cell contains z, if any.
    std::optional<std::size_t> region_of(Complex z) const;
};

/// Divides row h (1-based) of the upper-trapezoidal factor by h^gamma, i.e.
/// every stored diagonal entry R_{h,h+l}.
CMatrix filter_r_diagonals(const CMatrix& r, double gamma);

/// |diag| of the Givens-triangularised Hessenberg matrix R (E1 - z E0).
RVector shifted_diag(const CMatrix& r, Complex z);

/// Sum over lattice points of the digamma potential, then the discrete
/// Laplacian with negatives clamped and unit mass normalisation.
DensityGrid density_from_factor(const CMatrix& r, double sigma, double beta,
                                const Lattice& lattice);

/// Full first-stage pipeline on the first 2 p_tilde samples of `a`.
DensityGrid condensed_density(const CVector& a, const Hyperparameters& hp,
                              double sigma);

/// Five-point discrete Laplacian with one-sided second differences on the
/// border. `f` indexed (i, j) with spacing dx along i and dy along j.
Eigen::MatrixXd discrete_laplacian(const Eigen::MatrixXd& f, double dx,
                                   double dy);

/// Local maxima whose scaled mass reaches tau, each grown downhill along the
/// four lattice directions while the scaled mass stays above
/// region_floor_fraction * tau. Under RegionMerge::Partition a growth never
/// enters cells already claimed by a higher maximum; under Union growths
/// sharing a cell are fused and keep the higher maximum.
RegionSet extract_regions(const DensityGrid& grid, double tau,
                          RegionMerge rule = RegionMerge::Partition);

} // namespace modalkit
