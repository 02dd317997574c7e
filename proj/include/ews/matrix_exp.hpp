#pragma once

#include "ews/linalg.hpp"

namespace ews {

// Matrix exponential by scaling-and-squaring with diagonal Pade approximants
// (degrees 3/5/7/9/13 selected from the 1-norm). Deterministic; throws
// ews::error on non-square or non-finite input.
Matrix matrix_exp(const Matrix& a);

}  // namespace ews
