#pragma once

#include "bopt/types.hpp"

namespace bopt {

enum class MeanKind { Zero, Constant };
enum class KernelKind { RBF, Matern52 };

struct GPHyperparameters {
    double mean_constant = 0.0;
    double signal_variance = 1.0;
    Vector lengthscales;  // one per input dimension; tied when ARD is off
    double noise_variance = 0.0;
    bool learn_noise = true;
};

// Isotropic profile of a stationary kernel in terms of the squared scaled
// distance r2 = sum_d ((x_d - x2_d) / l_d)^2, for unit signal variance.
struct KernelProfile {
    double value;
    double d_value_d_r2;
};

KernelProfile kernel_profile(KernelKind kind, double r2);

double scaled_sq_distance(const Vector& lengthscales, const double* x, const double* x2);

/// Stationary covariance between two points.
///
/// RBF:      s * exp(-r^2 / 2)
/// Matern52: s * (1 + sqrt5 r + 5 r^2 / 3) * exp(-sqrt5 r)
///
/// where s is the signal variance and r the lengthscale-scaled distance.
/// Throws Domain on non-finite input and InvalidHyperparameter when a
/// lengthscale or the signal variance is not positive.
double kernel_eval(KernelKind kind, const GPHyperparameters& hyper, const Vector& x, const Vector& x2);

// Gradient of k(x, x2) with respect to x, accumulated as out += weight * dk/dx.
void add_kernel_input_gradient(KernelKind kind, const GPHyperparameters& hyper, const double* x, const double* x2,
                               double weight, double* out);

void validate_hyperparameters(const GPHyperparameters& hyper, Index dims);

}  // namespace bopt
