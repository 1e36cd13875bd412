#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>

namespace bopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

// Box used by the local optimisers. Unlike InputSpace, lower == upper is
// allowed; such a coordinate is pinned.
struct Bounds {
    Vector lower;
    Vector upper;

    [[nodiscard]] Index dims() const { return lower.size(); }
    [[nodiscard]] Vector clamp(const Vector& x) const { return x.cwiseMax(lower).cwiseMin(upper); }
    [[nodiscard]] bool contains(const Vector& x, double tol = 0.0) const;
};

// Objective for maximisation. When grad is non-null it must be filled with
// the gradient of the returned value with respect to x.
using Objective = std::function<double(const Vector& x, Vector* grad)>;

}  // namespace bopt
