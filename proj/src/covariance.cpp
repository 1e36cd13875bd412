#include "bopt/covariance.hpp"

#include "bopt/error.hpp"

#include <cmath>

namespace bopt {

namespace {
constexpr double kSqrt5 = 2.2360679774997896964091736687313;
}

KernelProfile kernel_profile(KernelKind kind, double r2) {
    switch (kind) {
    case KernelKind::RBF: {
        const double v = std::exp(-0.5 * r2);
        return {v, -0.5 * v};
    }
    case KernelKind::Matern52: {
        const double r = std::sqrt(r2);
        const double e = std::exp(-kSqrt5 * r);
        return {(1.0 + kSqrt5 * r + 5.0 * r2 / 3.0) * e, -(5.0 / 6.0) * (1.0 + kSqrt5 * r) * e};
    }
    }
    return {0.0, 0.0};
}

double scaled_sq_distance(const Vector& lengthscales, const double* x, const double* x2) {
    double r2 = 0.0;
    for (Index d = 0; d < lengthscales.size(); ++d) {
        const double t = (x[d] - x2[d]) / lengthscales[d];
        r2 += t * t;
    }
    return r2;
}

void validate_hyperparameters(const GPHyperparameters& hyper, Index dims) {
    if (hyper.lengthscales.size() != dims)
        fail(ErrorKind::InvalidHyperparameter, "lengthscale count does not match input dimension");
    if (!(hyper.signal_variance > 0.0) || !std::isfinite(hyper.signal_variance))
        fail(ErrorKind::InvalidHyperparameter, "signal variance must be positive");
    for (Index d = 0; d < dims; ++d) {
        if (!(hyper.lengthscales[d] > 0.0) || !std::isfinite(hyper.lengthscales[d]))
            fail(ErrorKind::InvalidHyperparameter, "lengthscales must be positive");
    }
    if (!(hyper.noise_variance >= 0.0) || !std::isfinite(hyper.noise_variance))
        fail(ErrorKind::InvalidHyperparameter, "noise variance must be non-negative");
    if (!std::isfinite(hyper.mean_constant)) fail(ErrorKind::InvalidHyperparameter, "mean constant must be finite");
}

double kernel_eval(KernelKind kind, const GPHyperparameters& hyper, const Vector& x, const Vector& x2) {
    if (x.size() != x2.size()) fail(ErrorKind::Parameter, "kernel_eval: argument dimensions differ");
    if (!x.allFinite() || !x2.allFinite()) fail(ErrorKind::Domain, "kernel_eval: non-finite input");
    validate_hyperparameters(hyper, x.size());
    return hyper.signal_variance * kernel_profile(kind, scaled_sq_distance(hyper.lengthscales, x.data(), x2.data())).value;
}

void add_kernel_input_gradient(KernelKind kind, const GPHyperparameters& hyper, const double* x, const double* x2,
                               double weight, double* out) {
    const Vector& l = hyper.lengthscales;
    const double r2 = scaled_sq_distance(l, x, x2);
    const double dk_dr2 = hyper.signal_variance * kernel_profile(kind, r2).d_value_d_r2;
    for (Index d = 0; d < l.size(); ++d) {
        out[d] += weight * dk_dr2 * 2.0 * (x[d] - x2[d]) / (l[d] * l[d]);
    }
}

}  // namespace bopt
