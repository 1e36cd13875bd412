#pragma once

// Data-parallel inner loops. Each kernel exists twice: a plain serial
// reference and an OpenMP version. Both write every output element from
// exactly one iteration and finish reductions in a fixed serial order, so
// their results are bitwise identical. Tests compare the two and
// bench/bench_kernels.cpp times them.

#include "bopt/covariance.hpp"
#include "bopt/types.hpp"

#include <vector>

namespace bopt {

enum class Execution { Serial, Parallel };

// Process-wide default used by the library; tests flip it.
Execution default_execution();
void set_default_execution(Execution exec);

enum class McReduction { ExpectedImprovement, UpperConfidenceBound };

struct McReduceInput {
    McReduction kind;
    const Vector* mean;    // m
    const Matrix* lower;   // m x m
    const Matrix* base;    // S x m standard-normal draws
    double y_best = 0.0;   // EI
    double ucb_scale = 0.0;  // sqrt(beta * pi / 2), UCB
};

struct McReduceOutput {
    double value = 0.0;
    Vector mean_bar;   // d value / d mean
    Matrix lower_bar;  // d value / d lower (lower triangle)
};

namespace serial {
Matrix cross_covariance(KernelKind kind, const GPHyperparameters& hyper, const Matrix& a, const Matrix& b);
McReduceOutput mc_reduce(const McReduceInput& in, bool with_gradient);
double min_pairwise_distance(const Matrix& points);
std::vector<double> design_scores(const std::vector<Matrix>& designs);
}  // namespace serial

namespace omp {
Matrix cross_covariance(KernelKind kind, const GPHyperparameters& hyper, const Matrix& a, const Matrix& b);
McReduceOutput mc_reduce(const McReduceInput& in, bool with_gradient);
double min_pairwise_distance(const Matrix& points);
std::vector<double> design_scores(const std::vector<Matrix>& designs);
}  // namespace omp

// Dispatch on default_execution().
Matrix cross_covariance(KernelKind kind, const GPHyperparameters& hyper, const Matrix& a, const Matrix& b);
McReduceOutput mc_reduce(const McReduceInput& in, bool with_gradient);
std::vector<double> design_scores(const std::vector<Matrix>& designs);

}  // namespace bopt
