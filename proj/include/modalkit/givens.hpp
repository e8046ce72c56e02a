#pragma once

#include "modalkit/model.hpp"

namespace modalkit
{

/// Reduces an upper-Hessenberg matrix to upper-triangular form in place by
/// complex Givens rotations acting on adjacent rows. Unitary, so the moduli
/// of any square leading determinant are preserved.
void givens_triangularize(CMatrix& h);

} // namespace modalkit
