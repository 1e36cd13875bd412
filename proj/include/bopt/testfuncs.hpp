#pragma once

#include "bopt/types.hpp"

#include <cstdint>
#include <string>

namespace bopt {

enum class TestFunction { Ackley, Hartmann3D, Hartmann6D };

// Closed-form benchmark objectives (minimisation form in the literature).
// With minimise == false the sign is flipped so that the optimum is a
// maximum, and optimum_value follows that convention.
struct TestFunctionSpec {
    TestFunction name = TestFunction::Hartmann6D;
    Index dims = 6;
    double noise_std = 0.0;
    bool minimise = true;
    Matrix bounds;        // 2 x d
    double optimum_value = 0.0;
    Vector optimum_input;
};

TestFunctionSpec make_test_function(TestFunction name, Index dims = 0, double noise_std = 0.0, bool minimise = true);
TestFunction parse_test_function(const std::string& name);
std::string to_string(TestFunction name);

double ackley(const Vector& x);
double hartmann3(const Vector& x);
double hartmann6(const Vector& x);

// Noise-free value of one point, sign flipped when maximising.
double evaluate_clean(const TestFunctionSpec& spec, const Vector& x);

/// Evaluates every row of x. Gaussian noise with std noise_std comes from
/// a generator seeded with seed.
Vector evaluate(const TestFunctionSpec& spec, const Matrix& x, std::uint64_t seed);

}  // namespace bopt
