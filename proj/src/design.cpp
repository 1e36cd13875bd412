#include "bopt/design.hpp"

#include "bopt/error.hpp"
#include "bopt/parallel_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bopt {

void validate_bounds(const Matrix& bounds) {
    if (bounds.rows() != 2 || bounds.cols() < 1) fail(ErrorKind::Parameter, "bounds must be a 2 x d matrix");
    if (!bounds.allFinite()) fail(ErrorKind::Parameter, "bounds must be finite");
    for (Index j = 0; j < bounds.cols(); ++j) {
        if (!(bounds(0, j) < bounds(1, j))) fail(ErrorKind::Parameter, "lower bound must be below upper bound");
    }
}

Matrix latin_hypercube(Index num_points, Index num_dims, Rng& rng) {
    Matrix design(num_points, num_dims);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Index> perm(static_cast<std::size_t>(num_points));
    const double n = static_cast<double>(num_points);
    for (Index j = 0; j < num_dims; ++j) {
        std::iota(perm.begin(), perm.end(), Index{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        for (Index i = 0; i < num_points; ++i) {
            // margin keeps floor(v * n) on the stratum index under rounding
            const double u = std::clamp(unif(rng), 1e-9, 1.0 - 1e-9);
            const double v = (static_cast<double>(perm[static_cast<std::size_t>(i)]) + u) / n;
            design(i, j) = v;
        }
    }
    return design;
}

MaximinSelection maximin_candidates(const DesignConfig& config) {
    if (config.num_points < 1 || config.num_dims < 1) fail(ErrorKind::Parameter, "design: sizes must be positive");
    if (config.num_designs < 1) fail(ErrorKind::Parameter, "design: num_designs must be positive");
    if (config.bounds.cols() != config.num_dims) fail(ErrorKind::Parameter, "design: bounds do not match num_dims");
    validate_bounds(config.bounds);
    MaximinSelection sel;
    sel.candidates.reserve(static_cast<std::size_t>(config.num_designs));
    for (int k = 0; k < config.num_designs; ++k) {
        Rng rng = make_rng(config.seed, static_cast<std::uint64_t>(k));
        sel.candidates.push_back(latin_hypercube(config.num_points, config.num_dims, rng));
    }
    if (config.num_points == 1) {
        sel.scores.assign(sel.candidates.size(), 0.0);
        return sel;
    }
    sel.scores = design_scores(sel.candidates);
    sel.chosen = static_cast<std::size_t>(std::max_element(sel.scores.begin(), sel.scores.end()) - sel.scores.begin());
    return sel;
}

Matrix gen_inputs(const DesignConfig& config) {
    const auto sel = maximin_candidates(config);
    return unnormalise(sel.candidates[sel.chosen], config.bounds);
}

Matrix normalise(const Matrix& x, const Matrix& bounds) {
    validate_bounds(bounds);
    if (x.cols() != bounds.cols()) fail(ErrorKind::Parameter, "normalise: dimension mismatch");
    Matrix out(x.rows(), x.cols());
    for (Index j = 0; j < x.cols(); ++j) {
        const double lo = bounds(0, j);
        const double width = bounds(1, j) - lo;
        for (Index i = 0; i < x.rows(); ++i) out(i, j) = (x(i, j) - lo) / width;
    }
    return out;
}

Matrix unnormalise(const Matrix& x, const Matrix& bounds) {
    validate_bounds(bounds);
    if (x.cols() != bounds.cols()) fail(ErrorKind::Parameter, "unnormalise: dimension mismatch");
    Matrix out(x.rows(), x.cols());
    for (Index j = 0; j < x.cols(); ++j) {
        const double lo = bounds(0, j);
        const double width = bounds(1, j) - lo;
        for (Index i = 0; i < x.rows(); ++i) out(i, j) = x(i, j) * width + lo;
    }
    return out;
}

Vector standardise(const Vector& y) {
    if (y.size() < 2) fail(ErrorKind::Parameter, "standardise: at least two values are required");
    if (!y.allFinite()) fail(ErrorKind::Domain, "standardise: non-finite value");
    const double mean = y.mean();
    const Vector centred = y.array() - mean;
    const double sd = std::sqrt(centred.squaredNorm() / static_cast<double>(y.size() - 1));
    if (!(sd > 0.0)) fail(ErrorKind::ZeroVariance, "standardise: outputs have zero variance");
    Vector out = centred / sd;
    // one correction pass removes the residual rounding in mean and spread
    const double m2 = out.mean();
    out.array() -= m2;
    const double sd2 = std::sqrt(out.squaredNorm() / static_cast<double>(y.size() - 1));
    return out / sd2;
}

}  // namespace bopt
