#include "bopt/surrogate.hpp"

#include "bopt/adam.hpp"
#include "bopt/error.hpp"
#include "bopt/linalg.hpp"
#include "bopt/parallel_kernels.hpp"

#include <cmath>
#include <numbers>

namespace bopt {

void Dataset::validate() const {
    if (inputs.rows() != outputs.size()) fail(ErrorKind::Parameter, "dataset: input rows and output length differ");
    if (fixed_noise && fixed_noise->size() != outputs.size())
        fail(ErrorKind::Parameter, "dataset: fixed noise length differs from output length");
    if (outputs.size() < 1) fail(ErrorKind::Parameter, "dataset: at least one observation is required");
    if (inputs.cols() < 1) fail(ErrorKind::Parameter, "dataset: at least one input dimension is required");
    if (!inputs.allFinite() || !outputs.allFinite()) fail(ErrorKind::Domain, "dataset: non-finite entries");
    if (fixed_noise && (!fixed_noise->allFinite() || fixed_noise->minCoeff() < 0.0))
        fail(ErrorKind::Domain, "dataset: fixed noise must be finite and non-negative");
}

GPModel::GPModel(GPConfig config, GPHyperparameters hyper, Dataset data)
    : config_(config), hyper_(std::move(hyper)), data_(std::move(data)) {
    data_.validate();
    validate_hyperparameters(hyper_, data_.dims());
    if (!config_.ard) {
        for (Index d = 1; d < hyper_.lengthscales.size(); ++d) {
            if (hyper_.lengthscales[d] != hyper_.lengthscales[0])
                fail(ErrorKind::InvalidHyperparameter, "lengthscales must be tied when ARD is off");
        }
    }
    Matrix a = cross_covariance(config_.kernel, hyper_, data_.inputs, data_.inputs);
    a.diagonal() += noise_diagonal();
    auto chol = cholesky_with_jitter(a, a.diagonal().mean(), true);
    chol_ = std::move(chol.lower);
    jitter_ = chol.jitter;
    const Vector resid = data_.outputs.array() - prior_mean();
    alpha_ = solve_upper_t(chol_, solve_lower(chol_, resid));
}

Vector GPModel::noise_diagonal() const {
    const Index n = data_.size();
    if (data_.fixed_noise) {
        Vector noise = *data_.fixed_noise;
        if (hyper_.learn_noise) noise.array() += hyper_.noise_variance;
        return noise;
    }
    return Vector::Constant(n, hyper_.noise_variance);
}

GPHyperparameters default_hyperparameters(const GPConfig& config, const Dataset& data,
                                          const std::optional<Vector>& initial_lengthscales) {
    data.validate();
    GPHyperparameters hyper;
    const double mean = data.outputs.mean();
    double var = (data.outputs.array() - mean).square().mean();
    if (!(var > 1e-12)) var = 1.0;
    hyper.mean_constant = config.mean == MeanKind::Constant ? mean : 0.0;
    hyper.signal_variance = var;
    if (initial_lengthscales) {
        if (initial_lengthscales->size() != data.dims())
            fail(ErrorKind::Parameter, "initial lengthscales do not match input dimension");
        hyper.lengthscales = *initial_lengthscales;
        if (!config.ard) hyper.lengthscales.setConstant(hyper.lengthscales.mean());
    } else {
        hyper.lengthscales = Vector::Ones(data.dims());
    }
    hyper.noise_variance = 1e-2 * var;
    return hyper;
}

PosteriorDistribution posterior(const GPModel& model, const Matrix& x_test, PosteriorCache* cache) {
    if (x_test.cols() != model.dims()) fail(ErrorKind::Parameter, "posterior: test input dimension mismatch");
    if (x_test.rows() < 1) fail(ErrorKind::Parameter, "posterior: no test points");
    if (!x_test.allFinite()) fail(ErrorKind::Domain, "posterior: non-finite test input");
    const auto& hyper = model.hyper();
    const auto kind = model.config().kernel;
    Matrix k_star = cross_covariance(kind, hyper, x_test, model.data().inputs);
    Matrix v = solve_lower(model.train_cholesky(), Matrix(k_star.transpose()));
    PosteriorDistribution post;
    post.mean = (k_star * model.alpha()).array() + model.prior_mean();
    Matrix cov = cross_covariance(kind, hyper, x_test, x_test);
    cov.noalias() -= v.transpose() * v;
    post.covariance = 0.5 * (cov + cov.transpose());
    auto chol = cholesky_with_jitter(post.covariance, hyper.signal_variance);
    post.chol_factor = std::move(chol.lower);
    post.jitter = chol.jitter;
    if (cache) {
        cache->x = x_test;
        cache->k_star = std::move(k_star);
        cache->v = std::move(v);
    }
    return post;
}

Matrix posterior_backward(const GPModel& model, const PosteriorCache& cache, const Vector& mean_bar,
                          const Matrix& cov_bar) {
    const auto& hyper = model.hyper();
    const auto kind = model.config().kernel;
    const Matrix& train = model.data().inputs;
    const Index m = cache.x.rows();
    const Index n = train.rows();
    const Index d = cache.x.cols();
    const Matrix cov_sym = cov_bar + cov_bar.transpose();
    // W = A^-1 K(X_n, X*) = L^-T V
    const Matrix w = solve_upper_t(model.train_cholesky(), cache.v);
    Matrix kstar_bar = mean_bar * model.alpha().transpose();
    kstar_bar.noalias() -= cov_sym * w.transpose();

    Matrix grad = Matrix::Zero(m, d);
    for (Index a = 0; a < m; ++a) {
        double* out = grad.row(a).data();
        const double* xa = cache.x.row(a).data();
        for (Index i = 0; i < n; ++i) {
            const double weight = kstar_bar(a, i);
            if (weight != 0.0) add_kernel_input_gradient(kind, hyper, xa, train.row(i).data(), weight, out);
        }
        for (Index b = 0; b < m; ++b) {
            if (b == a) continue;
            const double weight = cov_sym(a, b);
            if (weight != 0.0) add_kernel_input_gradient(kind, hyper, xa, cache.x.row(b).data(), weight, out);
        }
    }
    return grad;
}

double log_marginal_likelihood(const GPModel& model) {
    const Matrix& l = model.train_cholesky();
    const Vector resid = model.data().outputs.array() - model.prior_mean();
    const double n = static_cast<double>(resid.size());
    return -0.5 * resid.dot(model.alpha()) - l.diagonal().array().log().sum() -
           0.5 * n * std::log(2.0 * std::numbers::pi);
}

Index Parameterisation::size() const {
    Index count = 1 + (config.ard ? dims : 1);
    if (config.mean == MeanKind::Constant) ++count;
    if (learn_noise) ++count;
    return count;
}

Vector Parameterisation::pack(const GPHyperparameters& hyper) const {
    Vector theta(size());
    Index k = 0;
    if (config.mean == MeanKind::Constant) theta[k++] = hyper.mean_constant;
    theta[k++] = std::log(hyper.signal_variance);
    if (config.ard) {
        for (Index d = 0; d < dims; ++d) theta[k++] = std::log(hyper.lengthscales[d]);
    } else {
        theta[k++] = std::log(hyper.lengthscales[0]);
    }
    if (learn_noise) theta[k++] = std::log(std::max(hyper.noise_variance - kNoiseFloor, 1e-300));
    return theta;
}

GPHyperparameters Parameterisation::unpack(const Vector& theta, const GPHyperparameters& base) const {
    GPHyperparameters hyper = base;
    Index k = 0;
    if (config.mean == MeanKind::Constant) hyper.mean_constant = theta[k++];
    hyper.signal_variance = std::exp(theta[k++]);
    hyper.lengthscales.resize(dims);
    if (config.ard) {
        for (Index d = 0; d < dims; ++d) hyper.lengthscales[d] = std::exp(theta[k++]);
    } else {
        hyper.lengthscales.setConstant(std::exp(theta[k++]));
    }
    if (learn_noise) hyper.noise_variance = kNoiseFloor + std::exp(theta[k++]);
    return hyper;
}

LmlWithGradient log_marginal_likelihood_with_gradient(const GPModel& model) {
    const auto& hyper = model.hyper();
    const auto& cfg = model.config();
    const Matrix& x = model.data().inputs;
    const Index n = x.rows();
    const Index dims = x.cols();
    const Parameterisation param{cfg, dims, hyper.learn_noise};

    const Matrix& l = model.train_cholesky();
    const Vector& alpha = model.alpha();
    const Matrix a_inv = solve_upper_t(l, solve_lower(l, Matrix(Matrix::Identity(n, n))));
    Matrix q = alpha * alpha.transpose();
    q -= a_inv;

    LmlWithGradient out{log_marginal_likelihood(model), Vector::Zero(param.size())};
    Index k = 0;
    if (cfg.mean == MeanKind::Constant) out.gradient[k++] = alpha.sum();

    double g_signal = 0.0;
    Vector g_length = Vector::Zero(dims);
    const Vector& ls = hyper.lengthscales;
    for (Index i = 0; i < n; ++i) {
        g_signal += 0.5 * q(i, i) * hyper.signal_variance;
        for (Index j = i + 1; j < n; ++j) {
            const double r2 = scaled_sq_distance(ls, x.row(i).data(), x.row(j).data());
            const auto prof = kernel_profile(cfg.kernel, r2);
            g_signal += q(i, j) * hyper.signal_variance * prof.value;
            const double dk_dr2 = hyper.signal_variance * prof.d_value_d_r2;
            for (Index d = 0; d < dims; ++d) {
                const double t = (x(i, d) - x(j, d)) / ls[d];
                g_length[d] += q(i, j) * dk_dr2 * (-2.0 * t * t);
            }
        }
    }
    out.gradient[k++] = g_signal;
    if (cfg.ard) {
        for (Index d = 0; d < dims; ++d) out.gradient[k++] = g_length[d];
    } else {
        out.gradient[k++] = g_length.sum();
    }
    if (hyper.learn_noise) out.gradient[k++] = 0.5 * q.trace() * (hyper.noise_variance - Parameterisation::kNoiseFloor);
    return out;
}

namespace {

double restart_factor(int restart) {
    if (restart == 0) return 1.0;
    const int magnitude = (restart + 1) / 2;
    return restart % 2 == 1 ? std::pow(0.5, magnitude) : std::pow(2.0, magnitude);
}

}  // namespace

GPModel fit(const GPModel& model, const FitOptions& options) {
    if (!(options.lr > 0.0)) fail(ErrorKind::Parameter, "fit: lr must be positive");
    if (options.steps < 1) fail(ErrorKind::Parameter, "fit: steps must be at least 1");
    const auto& cfg = model.config();
    const auto& data = model.data();
    GPHyperparameters start = options.initialise ? default_hyperparameters(cfg, data, options.initial_lengthscales)
                                                 : model.hyper();
    start.learn_noise = model.hyper().learn_noise;
    if (!start.learn_noise) start.noise_variance = model.hyper().noise_variance;
    const Parameterisation param{cfg, data.dims(), start.learn_noise};

    std::optional<GPModel> best;
    double best_lml = -std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < std::max(options.restarts, 1); ++restart) {
        GPHyperparameters init = start;
        init.lengthscales *= restart_factor(restart);
        double init_lml = -std::numeric_limits<double>::infinity();
        std::optional<GPModel> current;
        try {
            current.emplace(cfg, init, data);
            init_lml = log_marginal_likelihood(*current);
        } catch (const Error&) {
        }
        if (!std::isfinite(init_lml)) {
            if (restart == 0)
                fail(ErrorKind::Initialisation,
                     "fit: log-marginal likelihood is not finite at initialisation; consider standardising the outputs");
            continue;
        }
        Vector theta = param.pack(current->hyper());
        Adam adam(theta.size(), options.lr);
        for (int step = 0; step < options.steps; ++step) {
            const auto lml = log_marginal_likelihood_with_gradient(*current);
            if (!std::isfinite(lml.value) || !lml.gradient.allFinite()) break;
            if (lml.value > best_lml) {
                best_lml = lml.value;
                best = *current;
            }
            theta += adam.step(-lml.gradient);
            try {
                current.emplace(cfg, param.unpack(theta, init), data);
            } catch (const Error&) {
                current.reset();
                break;
            }
        }
        if (current) {
            const double last = log_marginal_likelihood(*current);
            if (std::isfinite(last) && last > best_lml) {
                best_lml = last;
                best = *current;
            }
        }
    }
    if (!best) fail(ErrorKind::Initialisation, "fit: no finite log-marginal likelihood found");
    return *best;
}

}  // namespace bopt
