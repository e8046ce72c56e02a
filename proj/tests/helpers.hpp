#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "modalkit/model.hpp"

namespace testing_helpers
{

using modalkit::Complex;
using modalkit::CVector;
using modalkit::Index;
using modalkit::ModalModel;

inline ModalModel make_model(std::initializer_list<Complex> c,
                             std::initializer_list<Complex> xi)
{
    ModalModel m;
    m.c.resize(static_cast<Index>(c.size()));
    m.xi.resize(static_cast<Index>(xi.size()));
    Index k = 0;
    for (auto v : c)
        m.c[k++] = v;
    k = 0;
    for (auto v : xi)
        m.xi[k++] = v;
    return m;
}

inline double hausdorff(const CVector& a, const CVector& b)
{
    auto directed = [](const CVector& x, const CVector& y) {
        double worst = 0.0;
        for (Index i = 0; i < x.size(); ++i)
        {
            double best = std::numeric_limits<double>::infinity();
            for (Index j = 0; j < y.size(); ++j)
                best = std::min(best, std::abs(x[i] - y[j]));
            worst = std::max(worst, best);
        }
        return worst;
    };
    if (a.size() == 0 || b.size() == 0)
        return std::numeric_limits<double>::infinity();
    return std::max(directed(a, b), directed(b, a));
}

/// p modes with |xi| in [0.3, 1], pairwise distance >= min_sep, weights of
/// modulus in [0.5, 2].
inline ModalModel random_model(std::mt19937_64& rng, Index p,
                               double min_sep = 0.1)
{
    std::uniform_real_distribution<double> radius(0.3, 1.0);
    std::uniform_real_distribution<double> angle(-std::numbers::pi,
                                                 std::numbers::pi);
    std::uniform_real_distribution<double> weight(0.5, 2.0);
    ModalModel m;
    m.xi.resize(p);
    m.c.resize(p);
    for (Index j = 0; j < p; ++j)
    {
        for (;;)
        {
            const Complex z = std::polar(radius(rng), angle(rng));
            bool ok         = true;
            for (Index h = 0; h < j; ++h)
                ok = ok && std::abs(z - m.xi[h]) >= min_sep;
            if (ok)
            {
                m.xi[j] = z;
                break;
            }
        }
        m.c[j] = std::polar(weight(rng), angle(rng));
    }
    return m;
}

} // namespace testing_helpers
