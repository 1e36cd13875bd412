#include "bopt/linalg.hpp"

#include "bopt/error.hpp"

#include <cmath>
#include <sstream>

namespace bopt {

bool Bounds::contains(const Vector& x, double tol) const {
    if (x.size() != lower.size()) return false;
    for (Index i = 0; i < x.size(); ++i) {
        if (!(x[i] >= lower[i] - tol && x[i] <= upper[i] + tol)) return false;
    }
    return true;
}

CholeskyResult cholesky_with_jitter(const Matrix& a, double scale, bool exact_first) {
    if (!(scale > 0.0) || !std::isfinite(scale)) scale = 1.0;
    if (!a.allFinite()) fail(ErrorKind::Domain, "cholesky: matrix has non-finite entries");
    if (exact_first) {
        Eigen::LLT<Matrix> llt(a);
        if (llt.info() == Eigen::Success) {
            Matrix lower = llt.matrixL();
            if (lower.diagonal().minCoeff() > 0.0 && lower.allFinite()) return {std::move(lower), 0.0};
        }
    }
    const double first = 1e-8 * scale;
    const double last = 1e-4 * scale;
    double jitter = first;
    for (;;) {
        Matrix shifted = a;
        shifted.diagonal().array() += jitter;
        Eigen::LLT<Matrix> llt(shifted);
        if (llt.info() == Eigen::Success) {
            Matrix lower = llt.matrixL();
            if (lower.diagonal().minCoeff() > 0.0 && lower.allFinite()) return {std::move(lower), jitter};
        }
        if (jitter >= last * (1.0 - 1e-12)) break;
        jitter = std::min(jitter * 10.0, last);
    }
    std::ostringstream msg;
    msg << "ill-conditioned kernel matrix: Cholesky failed with final jitter " << jitter;
    fail(ErrorKind::IllConditioned, msg.str());
}

Matrix solve_lower(const Matrix& lower, const Matrix& rhs) {
    return lower.triangularView<Eigen::Lower>().solve(rhs);
}

Matrix solve_upper_t(const Matrix& lower, const Matrix& rhs) {
    return lower.transpose().triangularView<Eigen::Upper>().solve(rhs);
}

Vector solve_lower(const Matrix& lower, const Vector& rhs) {
    return lower.triangularView<Eigen::Lower>().solve(rhs);
}

Vector solve_upper_t(const Matrix& lower, const Vector& rhs) {
    return lower.transpose().triangularView<Eigen::Upper>().solve(rhs);
}

Matrix cholesky_backward(const Matrix& lower, const Matrix& lower_bar) {
    Matrix phi = lower.transpose() * lower_bar.triangularView<Eigen::Lower>().toDenseMatrix();
    phi.triangularView<Eigen::StrictlyUpper>().setZero();
    phi.diagonal() *= 0.5;
    // S = L^-T phi L^-1
    const Matrix left = solve_upper_t(lower, phi);
    const Matrix s = solve_upper_t(lower, Matrix(left.transpose())).transpose();
    return 0.5 * (s + s.transpose());
}

}  // namespace bopt
