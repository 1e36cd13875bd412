#pragma once

#include "bopt/types.hpp"

namespace bopt {

struct CholeskyResult {
    Matrix lower;   // L with L L^T = A + jitter I
    double jitter;  // absolute jitter added to the diagonal
};

/// Cholesky factorisation with diagonal jitter escalation.
///
/// Jitter starts at 1e-8 * scale and grows by a factor of ten up to
/// 1e-4 * scale. When every attempt fails an IllConditioned error naming
/// the final jitter is thrown. A non-positive scale falls back to 1.
/// With exact_first, an unshifted factorisation is tried before any jitter.
CholeskyResult cholesky_with_jitter(const Matrix& a, double scale, bool exact_first = false);

// Solves L X = B and L^T X = B for lower-triangular L.
Matrix solve_lower(const Matrix& lower, const Matrix& rhs);
Matrix solve_upper_t(const Matrix& lower, const Matrix& rhs);
Vector solve_lower(const Matrix& lower, const Vector& rhs);
Vector solve_upper_t(const Matrix& lower, const Vector& rhs);

// Reverse-mode derivative of the Cholesky factorisation: given dl/dL
// (lower triangle used), returns the symmetric dl/dA for L = chol(A).
Matrix cholesky_backward(const Matrix& lower, const Matrix& lower_bar);

}  // namespace bopt
