#include "modalkit/givens.hpp"

#include <algorithm>
#include <cmath>

namespace modalkit
{

void givens_triangularize(CMatrix& h)
{
    const Index rows  = h.rows();
    const Index cols  = h.cols();
    const Index steps = std::min(rows - 1, cols);
    for (Index k = 0; k < steps; ++k)
    {
        const Complex x = h(k, k);
        const Complex y = h(k + 1, k);
        if (y == Complex(0.0))
            continue;
        const double ax = std::abs(x);
        const double r  = std::hypot(ax, std::abs(y));
        double c;
        Complex s;
        if (ax == 0.0)
        {
            c = 0.0;
            s = std::conj(y) / std::abs(y);
        }
        else
        {
            c = ax / r;
            s = (x / ax) * std::conj(y) / r;
        }
        for (Index j = k; j < cols; ++j)
        {
            const Complex t1 = h(k, j);
            const Complex t2 = h(k + 1, j);
            h(k, j)          = c * t1 + s * t2;
            h(k + 1, j)      = -std::conj(s) * t1 + c * t2;
        }
        h(k + 1, k) = Complex(0.0);
    }
}

} // namespace modalkit
