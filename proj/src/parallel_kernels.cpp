#include "bopt/parallel_kernels.hpp"

#include "bopt/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

namespace bopt {

namespace {

std::atomic<Execution> g_execution{Execution::Parallel};

// Below this many inner-loop iterations the parallel region costs more
// than it saves.
constexpr Index kParallelThreshold = 2048;

void check_cross_shapes(const GPHyperparameters& hyper, const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols() || a.cols() != hyper.lengthscales.size())
        fail(ErrorKind::Parameter, "cross_covariance: dimension mismatch");
}

inline double covariance_entry(KernelKind kind, const GPHyperparameters& hyper, const double* x, const double* y) {
    return hyper.signal_variance * kernel_profile(kind, scaled_sq_distance(hyper.lengthscales, x, y)).value;
}

struct SampleOutcome {
    Index winner;  // -1 when the sample contributes nothing to the gradient
    double contribution;
    double sign;   // d contribution / d (L z)_winner, excluding the 1/S factor
};

inline SampleOutcome reduce_sample(const McReduceInput& in, Index s) {
    const Vector& mu = *in.mean;
    const Matrix& l = *in.lower;
    const Matrix& z = *in.base;
    const Index m = mu.size();
    Index best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    double best_w = 0.0;
    for (Index a = 0; a < m; ++a) {
        double w = 0.0;
        for (Index j = 0; j <= a; ++j) w += l(a, j) * z(s, j);
        const double v = in.kind == McReduction::ExpectedImprovement ? mu[a] + w - in.y_best
                                                                     : mu[a] + in.ucb_scale * std::abs(w);
        if (v > best_val) {
            best_val = v;
            best = a;
            best_w = w;
        }
    }
    if (in.kind == McReduction::ExpectedImprovement) {
        if (best_val > 0.0) return {best, best_val, 1.0};
        return {-1, 0.0, 0.0};
    }
    const double sgn = best_w > 0.0 ? 1.0 : (best_w < 0.0 ? -1.0 : 0.0);
    return {best, best_val, in.ucb_scale * sgn};
}

void check_mc_shapes(const McReduceInput& in) {
    const Index m = in.mean->size();
    if (in.lower->rows() != m || in.lower->cols() != m || in.base->cols() != m)
        fail(ErrorKind::BaseSamples, "mc_reduce: base samples do not match the joint point count");
    if (in.base->rows() < 1) fail(ErrorKind::BaseSamples, "mc_reduce: no base samples");
}

McReduceOutput accumulate(const McReduceInput& in, const std::vector<SampleOutcome>& outcomes, bool with_gradient) {
    const Index m = in.mean->size();
    const Index samples = in.base->rows();
    const double inv = 1.0 / static_cast<double>(samples);
    const Matrix& z = *in.base;
    McReduceOutput out;
    double total = 0.0;
    for (const auto& o : outcomes) total += o.contribution;
    out.value = total * inv;
    if (!with_gradient) return out;
    out.mean_bar = Vector::Zero(m);
    out.lower_bar = Matrix::Zero(m, m);
    for (Index s = 0; s < samples; ++s) {
        const auto& o = outcomes[static_cast<std::size_t>(s)];
        if (o.winner < 0) continue;
        out.mean_bar[o.winner] += inv;
        if (o.sign != 0.0) {
            for (Index j = 0; j <= o.winner; ++j) out.lower_bar(o.winner, j) += o.sign * z(s, j) * inv;
        }
    }
    return out;
}

}  // namespace

Execution default_execution() { return g_execution.load(); }
void set_default_execution(Execution exec) { g_execution.store(exec); }

namespace serial {

Matrix cross_covariance(KernelKind kind, const GPHyperparameters& hyper, const Matrix& a, const Matrix& b) {
    check_cross_shapes(hyper, a, b);
    Matrix k(a.rows(), b.rows());
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < b.rows(); ++j) k(i, j) = covariance_entry(kind, hyper, a.row(i).data(), b.row(j).data());
    }
    return k;
}

McReduceOutput mc_reduce(const McReduceInput& in, bool with_gradient) {
    check_mc_shapes(in);
    const Index samples = in.base->rows();
    std::vector<SampleOutcome> outcomes(static_cast<std::size_t>(samples));
    for (Index s = 0; s < samples; ++s) outcomes[static_cast<std::size_t>(s)] = reduce_sample(in, s);
    return accumulate(in, outcomes, with_gradient);
}

double min_pairwise_distance(const Matrix& points) {
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < points.rows(); ++i) {
        for (Index j = i + 1; j < points.rows(); ++j) best = std::min(best, (points.row(i) - points.row(j)).squaredNorm());
    }
    return std::sqrt(best);
}

std::vector<double> design_scores(const std::vector<Matrix>& designs) {
    std::vector<double> scores(designs.size());
    for (std::size_t i = 0; i < designs.size(); ++i) scores[i] = min_pairwise_distance(designs[i]);
    return scores;
}

}  // namespace serial

namespace omp {

Matrix cross_covariance(KernelKind kind, const GPHyperparameters& hyper, const Matrix& a, const Matrix& b) {
    check_cross_shapes(hyper, a, b);
    Matrix k(a.rows(), b.rows());
    const Index rows = a.rows();
    const Index cols = b.rows();
#pragma omp parallel for schedule(static) if (rows * cols > kParallelThreshold)
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) k(i, j) = covariance_entry(kind, hyper, a.row(i).data(), b.row(j).data());
    }
    return k;
}

McReduceOutput mc_reduce(const McReduceInput& in, bool with_gradient) {
    check_mc_shapes(in);
    const Index samples = in.base->rows();
    const Index m = in.mean->size();
    std::vector<SampleOutcome> outcomes(static_cast<std::size_t>(samples));
#pragma omp parallel for schedule(static) if (samples * m * m > kParallelThreshold)
    for (Index s = 0; s < samples; ++s) outcomes[static_cast<std::size_t>(s)] = reduce_sample(in, s);
    return accumulate(in, outcomes, with_gradient);
}

double min_pairwise_distance(const Matrix& points) {
    const Index n = points.rows();
    std::vector<double> row_best(static_cast<std::size_t>(std::max<Index>(n, 1)),
                                 std::numeric_limits<double>::infinity());
#pragma omp parallel for schedule(dynamic, 8) if (n * n > kParallelThreshold)
    for (Index i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (Index j = i + 1; j < n; ++j) best = std::min(best, (points.row(i) - points.row(j)).squaredNorm());
        row_best[static_cast<std::size_t>(i)] = best;
    }
    double best = std::numeric_limits<double>::infinity();
    for (double v : row_best) best = std::min(best, v);
    return std::sqrt(best);
}

std::vector<double> design_scores(const std::vector<Matrix>& designs) {
    std::vector<double> scores(designs.size());
    const auto count = static_cast<std::ptrdiff_t>(designs.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        scores[static_cast<std::size_t>(i)] = serial::min_pairwise_distance(designs[static_cast<std::size_t>(i)]);
    }
    return scores;
}

}  // namespace omp

Matrix cross_covariance(KernelKind kind, const GPHyperparameters& hyper, const Matrix& a, const Matrix& b) {
    return default_execution() == Execution::Parallel ? omp::cross_covariance(kind, hyper, a, b)
                                                      : serial::cross_covariance(kind, hyper, a, b);
}

McReduceOutput mc_reduce(const McReduceInput& in, bool with_gradient) {
    return default_execution() == Execution::Parallel ? omp::mc_reduce(in, with_gradient)
                                                      : serial::mc_reduce(in, with_gradient);
}

std::vector<double> design_scores(const std::vector<Matrix>& designs) {
    return default_execution() == Execution::Parallel ? omp::design_scores(designs) : serial::design_scores(designs);
}

}  // namespace bopt
