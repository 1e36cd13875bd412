#pragma once

#include "bopt/random.hpp"
#include "bopt/types.hpp"

#include <cstdint>
#include <vector>

namespace bopt {

struct DesignConfig {
    Index num_points = 1;
    Index num_dims = 1;
    Matrix bounds;  // 2 x d: row 0 lower, row 1 upper
    int num_designs = 100;
    std::uint64_t seed = 0;
};

void validate_bounds(const Matrix& bounds);

// One random Latin hypercube on [0,1]^d: each column holds one point per
// stratum [k/n, (k+1)/n) at a uniformly jittered position.
Matrix latin_hypercube(Index num_points, Index num_dims, Rng& rng);

struct MaximinSelection {
    std::vector<Matrix> candidates;  // unit-cube designs, candidate k drawn from stream k
    std::vector<double> scores;      // minimum pairwise Euclidean distance
    std::size_t chosen = 0;
};

MaximinSelection maximin_candidates(const DesignConfig& config);

/// Maximin Latin hypercube design rescaled to the bounds.
Matrix gen_inputs(const DesignConfig& config);

Matrix normalise(const Matrix& x, const Matrix& bounds);
Matrix unnormalise(const Matrix& x, const Matrix& bounds);

// (y - mean) / std with the n-1 sample standard deviation.
Vector standardise(const Vector& y);

}  // namespace bopt
