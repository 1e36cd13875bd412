#include "bopt/testfuncs.hpp"

#include "bopt/error.hpp"
#include "bopt/random.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace bopt {

namespace {

constexpr std::array<double, 4> kHartmannAlpha{1.0, 1.2, 3.0, 3.2};

constexpr double kHartmann3A[4][3] = {{3.0, 10.0, 30.0}, {0.1, 10.0, 35.0}, {3.0, 10.0, 30.0}, {0.1, 10.0, 35.0}};
constexpr double kHartmann3P[4][3] = {
    {0.3689, 0.1170, 0.2673}, {0.4699, 0.4387, 0.7470}, {0.1091, 0.8732, 0.5547}, {0.0381, 0.5743, 0.8828}};

constexpr double kHartmann6A[4][6] = {{10.0, 3.0, 17.0, 3.5, 1.7, 8.0},
                                      {0.05, 10.0, 17.0, 0.1, 8.0, 14.0},
                                      {3.0, 3.5, 1.7, 10.0, 17.0, 8.0},
                                      {17.0, 8.0, 0.05, 10.0, 0.1, 14.0}};
constexpr double kHartmann6P[4][6] = {{0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
                                      {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
                                      {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
                                      {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381}};

// Minimisers refined by local optimisation from the published points.
constexpr std::array<double, 3> kHartmann3Argmin{0.11458886859137944, 0.5556488945947685, 0.8525469839923088};
constexpr double kHartmann3Min = -3.862779787332663;
constexpr std::array<double, 6> kHartmann6Argmin{0.20168951284088166, 0.15001069121573468, 0.47687397552004734,
                                                 0.2753324309510746,  0.31165161746271286, 0.6573005329659732};
constexpr double kHartmann6Min = -3.322368011415515;

template <std::size_t D>
double hartmann(const Vector& x, const double (&a)[4][D], const double (&p)[4][D]) {
    double total = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        double inner = 0.0;
        for (std::size_t j = 0; j < D; ++j) {
            const double t = x[static_cast<Index>(j)] - p[i][j];
            inner += a[i][j] * t * t;
        }
        total += kHartmannAlpha[i] * std::exp(-inner);
    }
    return -total;
}

}  // namespace

double ackley(const Vector& x) {
    const double n = static_cast<double>(x.size());
    const double sq = x.squaredNorm() / n;
    double cos_sum = 0.0;
    for (Index i = 0; i < x.size(); ++i) cos_sum += std::cos(2.0 * std::numbers::pi * x[i]);
    return (20.0 - 20.0 * std::exp(-0.2 * std::sqrt(sq))) + (std::numbers::e - std::exp(cos_sum / n));
}

double hartmann3(const Vector& x) { return hartmann(x, kHartmann3A, kHartmann3P); }
double hartmann6(const Vector& x) { return hartmann(x, kHartmann6A, kHartmann6P); }

TestFunctionSpec make_test_function(TestFunction name, Index dims, double noise_std, bool minimise) {
    if (!(noise_std >= 0.0)) fail(ErrorKind::Parameter, "test function: noise_std must be non-negative");
    TestFunctionSpec spec;
    spec.name = name;
    spec.noise_std = noise_std;
    spec.minimise = minimise;
    double minimum = 0.0;
    switch (name) {
    case TestFunction::Ackley:
        if (dims < 1) fail(ErrorKind::Parameter, "Ackley needs at least one dimension");
        spec.dims = dims;
        spec.bounds.resize(2, dims);
        spec.bounds.row(0).setConstant(-32.768);
        spec.bounds.row(1).setConstant(32.768);
        spec.optimum_input = Vector::Zero(dims);
        minimum = 0.0;
        break;
    case TestFunction::Hartmann3D:
        if (dims != 0 && dims != 3) fail(ErrorKind::Parameter, "Hartmann3D is three-dimensional");
        spec.dims = 3;
        spec.bounds.resize(2, 3);
        spec.bounds.row(0).setZero();
        spec.bounds.row(1).setOnes();
        spec.optimum_input = Eigen::Map<const Vector>(kHartmann3Argmin.data(), 3);
        minimum = kHartmann3Min;
        break;
    case TestFunction::Hartmann6D:
        if (dims != 0 && dims != 6) fail(ErrorKind::Parameter, "Hartmann6D is six-dimensional");
        spec.dims = 6;
        spec.bounds.resize(2, 6);
        spec.bounds.row(0).setZero();
        spec.bounds.row(1).setOnes();
        spec.optimum_input = Eigen::Map<const Vector>(kHartmann6Argmin.data(), 6);
        minimum = kHartmann6Min;
        break;
    }
    spec.optimum_value = minimise ? minimum : -minimum;
    return spec;
}

TestFunction parse_test_function(const std::string& name) {
    if (name == "ackley") return TestFunction::Ackley;
    if (name == "hartmann3") return TestFunction::Hartmann3D;
    if (name == "hartmann6") return TestFunction::Hartmann6D;
    fail(ErrorKind::Parameter, "unknown test function '" + name + "' (expected ackley, hartmann3 or hartmann6)");
}

std::string to_string(TestFunction name) {
    switch (name) {
    case TestFunction::Ackley: return "ackley";
    case TestFunction::Hartmann3D: return "hartmann3";
    case TestFunction::Hartmann6D: return "hartmann6";
    }
    return "unknown";
}

double evaluate_clean(const TestFunctionSpec& spec, const Vector& x) {
    if (x.size() != spec.dims) fail(ErrorKind::Parameter, "test function: input has the wrong dimension");
    double v = 0.0;
    switch (spec.name) {
    case TestFunction::Ackley: v = ackley(x); break;
    case TestFunction::Hartmann3D: v = hartmann3(x); break;
    case TestFunction::Hartmann6D: v = hartmann6(x); break;
    }
    return spec.minimise ? v : -v;
}

Vector evaluate(const TestFunctionSpec& spec, const Matrix& x, std::uint64_t seed) {
    if (x.cols() != spec.dims) fail(ErrorKind::Parameter, "test function: input has the wrong dimension");
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector out(x.rows());
    for (Index i = 0; i < x.rows(); ++i) {
        const Vector row = x.row(i).transpose();
        double v = 0.0;
        switch (spec.name) {
        case TestFunction::Ackley: v = ackley(row); break;
        case TestFunction::Hartmann3D: v = hartmann3(row); break;
        case TestFunction::Hartmann6D: v = hartmann6(row); break;
        }
        if (spec.noise_std > 0.0) v += spec.noise_std * normal(rng);
        out[i] = spec.minimise ? v : -v;
    }
    return out;
}

}  // namespace bopt
