#pragma once

#include "bopt/random.hpp"
#include "bopt/surrogate.hpp"
#include "bopt/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

namespace testutil {

using bopt::Index;
using bopt::Matrix;
using bopt::Vector;

inline Vector central_difference(const std::function<double(const Vector&)>& f, const Vector& x, double h = 1e-5) {
    Vector g(x.size());
    for (Index i = 0; i < x.size(); ++i) {
        Vector xp = x;
        Vector xm = x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (f(xp) - f(xm)) / (2.0 * h);
    }
    return g;
}

inline double relative_error(double a, double b, double floor = 1e-8) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline Matrix uniform_matrix(bopt::Rng& rng, Index rows, Index cols, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) m(i, j) = u(rng);
    }
    return m;
}

// Smooth deterministic response used to build small regression problems.
inline Vector smooth_response(const Matrix& x) {
    Vector y(x.rows());
    for (Index i = 0; i < x.rows(); ++i) {
        double s = 0.0;
        for (Index j = 0; j < x.cols(); ++j) s += std::sin(3.0 * x(i, j) + static_cast<double>(j)) * (1.0 + 0.3 * j);
        y[i] = s;
    }
    return y;
}

inline bopt::Dataset make_dataset(const Matrix& x, const Vector& y) {
    bopt::Dataset d;
    d.inputs = x;
    d.outputs = y;
    return d;
}

// Independent dense evaluation of the Matern 5/2 and RBF kernels.
inline double reference_kernel(bool matern, double s, const Vector& l, const Vector& a, const Vector& b) {
    double r2 = 0.0;
    for (Index i = 0; i < a.size(); ++i) {
        const double t = (a[i] - b[i]) / l[i];
        r2 += t * t;
    }
    if (!matern) return s * std::exp(-0.5 * r2);
    const double r = std::sqrt(r2);
    return s * (1.0 + std::sqrt(5.0) * r + 5.0 * r2 / 3.0) * std::exp(-std::sqrt(5.0) * r);
}

}  // namespace testutil
