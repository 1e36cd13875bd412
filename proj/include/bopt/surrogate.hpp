#pragma once

#include "bopt/covariance.hpp"
#include "bopt/types.hpp"

#include <optional>

namespace bopt {

struct Dataset {
    Matrix inputs;                    // n x d, problem units
    Vector outputs;                   // n
    std::optional<Vector> fixed_noise;  // n, variances

    [[nodiscard]] Index size() const { return outputs.size(); }
    [[nodiscard]] Index dims() const { return inputs.cols(); }
    void validate() const;
};

struct GPConfig {
    MeanKind mean = MeanKind::Constant;
    KernelKind kernel = KernelKind::Matern52;
    bool ard = true;
};

struct PosteriorDistribution {
    Vector mean;
    Matrix covariance;   // without jitter
    Matrix chol_factor;  // chol(covariance + jitter I)
    double jitter = 0.0;
};

// Intermediate products kept by posterior() for the reverse pass.
struct PosteriorCache {
    Matrix x;       // m x d test inputs
    Matrix k_star;  // m x n
    Matrix v;       // n x m, L^-1 K(X_n, X*)
};

/// Exact GP regression model bound to a dataset.
///
/// The training covariance K + noise is factorised once on construction;
/// the object is immutable afterwards and safe to share between threads.
class GPModel {
public:
    GPModel(GPConfig config, GPHyperparameters hyper, Dataset data);

    [[nodiscard]] const GPConfig& config() const { return config_; }
    [[nodiscard]] const GPHyperparameters& hyper() const { return hyper_; }
    [[nodiscard]] const Dataset& data() const { return data_; }
    [[nodiscard]] Index dims() const { return data_.dims(); }

    [[nodiscard]] double prior_mean() const { return config_.mean == MeanKind::Constant ? hyper_.mean_constant : 0.0; }
    [[nodiscard]] Vector noise_diagonal() const;

    [[nodiscard]] const Matrix& train_cholesky() const { return chol_; }
    [[nodiscard]] const Vector& alpha() const { return alpha_; }
    [[nodiscard]] double train_jitter() const { return jitter_; }

private:
    GPConfig config_;
    GPHyperparameters hyper_;
    Dataset data_;
    Matrix chol_;
    Vector alpha_;
    double jitter_ = 0.0;
};

// Hyperparameters with the defaults used by fit() before optimisation:
// c = mean(y), s = var(y), l_d = initial_lengthscales (or 1), noise = 1e-2 var(y).
GPHyperparameters default_hyperparameters(const GPConfig& config, const Dataset& data,
                                          const std::optional<Vector>& initial_lengthscales = std::nullopt);

PosteriorDistribution posterior(const GPModel& model, const Matrix& x_test, PosteriorCache* cache = nullptr);

// Pulls d(loss)/d(mean) and d(loss)/d(covariance) back to the test inputs.
// cov_bar is taken entry-wise; it need not be symmetric.
Matrix posterior_backward(const GPModel& model, const PosteriorCache& cache, const Vector& mean_bar,
                          const Matrix& cov_bar);

double log_marginal_likelihood(const GPModel& model);

// Unconstrained parameterisation used for fitting:
//   [c]            constant mean only
//   log s
//   log l_d        d entries with ARD, one otherwise
//   log(noise - 1e-8)   when hyper.learn_noise
struct Parameterisation {
    static constexpr double kNoiseFloor = 1e-8;

    GPConfig config;
    Index dims;
    bool learn_noise;

    [[nodiscard]] Index size() const;
    [[nodiscard]] Vector pack(const GPHyperparameters& hyper) const;
    [[nodiscard]] GPHyperparameters unpack(const Vector& theta, const GPHyperparameters& base) const;
};

struct LmlWithGradient {
    double value;
    Vector gradient;  // w.r.t. Parameterisation::pack(model.hyper())
};

LmlWithGradient log_marginal_likelihood_with_gradient(const GPModel& model);

struct FitOptions {
    double lr = 0.1;
    int steps = 200;
    int restarts = 1;
    bool initialise = true;  // false: start from the model's current hyperparameters
    std::optional<Vector> initial_lengthscales;
};

/// Maximum-likelihood hyperparameters by Adam on the negative LML.
/// Returns a new model holding the best iterate seen.
GPModel fit(const GPModel& model, const FitOptions& options = {});

}  // namespace bopt
