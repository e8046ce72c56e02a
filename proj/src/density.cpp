#include "modalkit/density.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include <Eigen/QR>
#include <Eigen/SVD>
#include <boost/math/special_functions/digamma.hpp>

#include "modalkit/givens.hpp"
#include "modalkit/pencil.hpp"

namespace modalkit
{

std::optional<std::pair<int, int>> Lattice::locate(Complex z) const
{
    const double fi = (z.real() - bounds.x_min) / dx();
    const double fj = (z.imag() - bounds.y_min) / dy();
    const double lo = -0.5, hi = dim - 0.5;
    if (!(fi >= lo && fi < hi && fj >= lo && fj < hi))
        return std::nullopt;
    const int i = std::clamp(static_cast<int>(std::lround(fi)), 0, dim - 1);
    const int j = std::clamp(static_cast<int>(std::lround(fj)), 0, dim - 1);
    return std::make_pair(i, j);
}

std::optional<std::size_t> RegionSet::region_of(Complex z) const
{
    if (regions.empty())
        return std::nullopt;
    const auto cell = lattice.locate(z);
    if (!cell)
        return std::nullopt;
    const int id = label(cell->first, cell->second);
    if (id < 0)
        return std::nullopt;
    return static_cast<std::size_t>(id);
}

CMatrix filter_r_diagonals(const CMatrix& r, double gamma)
{
    require(gamma >= 0.0, "filter exponent must be nonnegative");
    CMatrix out = r;
    for (Index h = 0; h < r.rows(); ++h)
    {
        const double scale = std::pow(static_cast<double>(h + 1), gamma);
        for (Index j = h; j < r.cols(); ++j)
            out(h, j) /= scale;
    }
    return out;
}

namespace
{

void fill_shifted(const CMatrix& r, Complex z, CMatrix& h)
{
    const Index m = r.cols() - 1;
    h             = r.rightCols(m) - z * r.leftCols(m);
}

} // namespace

RVector shifted_diag(const CMatrix& r, Complex z)
{
    require(r.cols() >= 2, "factor needs at least two columns");
    CMatrix h;
    fill_shifted(r, z, h);
    givens_triangularize(h);
    const Index k = std::min(h.rows(), h.cols());
    return h.diagonal().head(k).cwiseAbs();
}

Eigen::MatrixXd discrete_laplacian(const Eigen::MatrixXd& f, double dx,
                                   double dy)
{
    const Index nx = f.rows();
    const Index ny = f.cols();
    require(nx >= 3 && ny >= 3, "Laplacian needs at least 3x3 points");
    auto second = [](double a, double b, double c, double h) {
        return (a - 2.0 * b + c) / (h * h);
    };
    Eigen::MatrixXd out(nx, ny);
    for (Index i = 0; i < nx; ++i)
        for (Index j = 0; j < ny; ++j)
        {
            double fxx, fyy;
            if (i == 0)
                fxx = second(f(0, j), f(1, j), f(2, j), dx);
            else if (i == nx - 1)
                fxx = second(f(nx - 1, j), f(nx - 2, j), f(nx - 3, j), dx);
            else
                fxx = second(f(i - 1, j), f(i, j), f(i + 1, j), dx);
            if (j == 0)
                fyy = second(f(i, 0), f(i, 1), f(i, 2), dy);
            else if (j == ny - 1)
                fyy = second(f(i, ny - 1), f(i, ny - 2), f(i, ny - 3), dy);
            else
                fyy = second(f(i, j - 1), f(i, j), f(i, j + 1), dy);
            out(i, j) = fxx + fyy;
        }
    return out;
}

DensityGrid density_from_factor(const CMatrix& r, double sigma, double beta,
                                const Lattice& lattice)
{
    require(sigma > 0.0, "density needs sigma > 0");
    require(beta > 0.0, "beta must be positive");
    require(lattice.dim >= 3, "lattice needs dim >= 3");
    require(r.cols() >= 2, "factor needs at least two columns");

    const int dim      = lattice.dim;
    const double scale = 1.0 / (sigma * sigma * beta);
    Eigen::MatrixXd potential(dim, dim);
    CMatrix h;
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
        {
            fill_shifted(r, lattice.point(i, j), h);
            givens_triangularize(h);
            const Index k = std::min(h.rows(), h.cols());
            double acc    = 0.0;
            for (Index d = 0; d < k; ++d)
                acc += boost::math::digamma(
                    0.5 * (std::norm(h(d, d)) * scale + 1.0));
            potential(i, j) = acc;
        }

    DensityGrid grid;
    grid.lattice = lattice;
    grid.beta    = beta;
    grid.values  = discrete_laplacian(potential, lattice.dx(), lattice.dy())
                      .cwiseMax(0.0);
    const double mass = grid.values.sum() * lattice.cell_area();
    if (!(mass > 0.0))
        throw Error(ErrorCode::Domain,
                    "condensed density vanishes on the whole lattice");
    grid.values /= mass;
    return grid;
}

DensityGrid condensed_density(const CVector& a, const Hyperparameters& hp,
                              double sigma)
{
    hp.validate();
    require(sigma > 0.0, "density needs sigma > 0");
    const Index n_used = 2 * static_cast<Index>(hp.p_tilde);
    if (n_used > a.size())
        throw Error(ErrorCode::InsufficientData,
                    "condensed density needs 2 * p_tilde samples");
    const Index l = n_used / 2;

    const HankelDataMatrix u(a.head(n_used), l);
    const CMatrix dense = u.dense();
    const RVector s     = Eigen::JacobiSVD<CMatrix>(dense).singularValues();
    const double noise_level = sigma * std::sqrt(static_cast<double>(n_used));
    Index rank = (s.array() > noise_level).count();
    rank       = std::clamp<Index>(rank, 1, std::min(u.rows(), u.cols()));

    const double eta = hp.cadzow_tol * dense.norm();
    const auto filtered =
        cadzow(u, rank, hp.cadzow_iters, eta > 0.0 ? eta : 1e-300);

    Eigen::HouseholderQR<CMatrix> qr(filtered.matrix.dense());
    const Index k = std::min(u.rows(), u.cols());
    const CMatrix r =
        qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    const CMatrix r_filtered = filter_r_diagonals(r, hp.gamma);

    Lattice lattice{hp.lattice_bounds, hp.lattice_dim};
    DensityGrid grid = density_from_factor(
        r_filtered, sigma, hp.beta_factor * static_cast<double>(n_used),
        lattice);
    grid.cadzow_rank       = rank;
    grid.cadzow_iterations = filtered.iterations;
    grid.cadzow_change     = filtered.change;
    return grid;
}

namespace
{

struct DisjointSets
{
    std::vector<std::size_t> parent;
    explicit DisjointSets(std::size_t n) : parent(n)
    {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x)
    {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b)
    {
        a = find(a);
        b = find(b);
        if (a != b)
            parent[std::max(a, b)] = std::min(a, b);
    }
};

} // namespace

RegionSet extract_regions(const DensityGrid& grid, double tau,
                          RegionMerge rule)
{
    require(tau > 0.0, "tau must be positive");
    const int dim        = grid.lattice.dim;
    const auto& v        = grid.values;
    constexpr int di[4]  = {1, -1, 0, 0};
    constexpr int dj[4]  = {0, 0, 1, -1};
    auto inside          = [dim](int i, int j) {
        return i >= 0 && j >= 0 && i < dim && j < dim;
    };
    auto linear = [dim](int i, int j) { return i * dim + j; };
    const double floor = tau * region_floor_fraction;

    // Peaks: strictly above each 4-neighbour, plateau ties resolved towards
    // the lowest linear index.
    std::vector<std::pair<int, int>> peaks;
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
        {
            if (!(v(i, j) > 0.0) || grid.scaled_mass(i, j) < tau)
                continue;
            bool is_max = true;
            for (int d = 0; d < 4 && is_max; ++d)
            {
                const int ni = i + di[d], nj = j + dj[d];
                if (!inside(ni, nj))
                    continue;
                if (v(ni, nj) > v(i, j) ||
                    (v(ni, nj) == v(i, j) && linear(ni, nj) < linear(i, j)))
                    is_max = false;
            }
            if (is_max)
                peaks.emplace_back(i, j);
        }
    std::sort(peaks.begin(), peaks.end(), [&](auto p, auto q) {
        if (v(p.first, p.second) != v(q.first, q.second))
            return v(p.first, p.second) > v(q.first, q.second);
        return linear(p.first, p.second) < linear(q.first, q.second);
    });

    // Downhill growth from each peak down to the floor, higher peaks first; a
    // cell claimed by two growths links them.
    Eigen::MatrixXi owner = Eigen::MatrixXi::Constant(dim, dim, -1);
    DisjointSets sets(peaks.size());
    std::vector<std::vector<std::pair<int, int>>> grown(peaks.size());
    for (std::size_t p = 0; p < peaks.size(); ++p)
    {
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> seen =
            Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(
                dim, dim, false);
        std::queue<std::pair<int, int>> frontier;
        frontier.push(peaks[p]);
        seen(peaks[p].first, peaks[p].second) = true;
        while (!frontier.empty())
        {
            const auto [i, j] = frontier.front();
            frontier.pop();
            grown[p].emplace_back(i, j);
            int& o = owner(i, j);
            if (o < 0)
                o = static_cast<int>(p);
            else
                sets.unite(static_cast<std::size_t>(o), p);
            for (int d = 0; d < 4; ++d)
            {
                const int ni = i + di[d], nj = j + dj[d];
                if (!inside(ni, nj) || seen(ni, nj))
                    continue;
                if (v(ni, nj) > 0.0 && v(ni, nj) < v(i, j) &&
                    grid.scaled_mass(ni, nj) >= floor &&
                    (rule == RegionMerge::Union || owner(ni, nj) < 0))
                {
                    seen(ni, nj) = true;
                    frontier.emplace(ni, nj);
                }
            }
        }
    }

    RegionSet out;
    out.lattice = grid.lattice;
    out.label   = Eigen::MatrixXi::Constant(dim, dim, -1);
    std::vector<int> root_to_region(peaks.size(), -1);
    // Peaks are sorted by height and roots are the lowest index in a set, so
    // each merged region keeps its highest peak.
    for (std::size_t p = 0; p < peaks.size(); ++p)
    {
        const std::size_t root = sets.find(p);
        if (root_to_region[root] < 0)
        {
            root_to_region[root] = static_cast<int>(out.regions.size());
            Region reg;
            reg.peak_cell  = peaks[root];
            reg.peak       = grid.lattice.point(peaks[root].first,
                                                peaks[root].second);
            reg.peak_value = v(peaks[root].first, peaks[root].second);
            out.regions.push_back(std::move(reg));
        }
        const int id = root_to_region[root];
        for (const auto& [i, j] : grown[p])
        {
            if (out.label(i, j) < 0)
            {
                out.label(i, j) = id;
                out.regions[static_cast<std::size_t>(id)].cells.emplace_back(
                    i, j);
            }
        }
    }
    for (auto& reg : out.regions)
        std::sort(reg.cells.begin(), reg.cells.end());
    return out;
}

} // namespace modalkit
