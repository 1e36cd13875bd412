#include "bopt/acquisition.hpp"

#include "bopt/error.hpp"
#include "bopt/linalg.hpp"
#include "bopt/parallel_kernels.hpp"

#include <cmath>
#include <numbers>

namespace bopt {

AcquisitionSpec with_pending(const AcquisitionSpec& spec, const Matrix& x_pending) {
    if (!x_pending.allFinite()) fail(ErrorKind::Parameter, "with_pending: non-finite pending point");
    if (spec.x_pending.rows() > 0 && x_pending.rows() > 0 && x_pending.cols() != spec.x_pending.cols())
        fail(ErrorKind::Parameter, "with_pending: pending points have the wrong dimension");
    AcquisitionSpec out = spec;
    out.x_pending = x_pending;
    out.base_samples.reset();
    return out;
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double ei_from_moments(double mu, double sigma, double y_best, double* d_mu, double* d_sigma) {
    const double delta = mu - y_best;
    if (sigma < kSigmaFloor) {
        if (d_mu) *d_mu = delta > 0.0 ? 1.0 : 0.0;
        if (d_sigma) *d_sigma = 0.0;
        return std::max(delta, 0.0);
    }
    const double z = delta / sigma;
    const double cdf = normal_cdf(z);
    const double pdf = normal_pdf(z);
    if (d_mu) *d_mu = cdf;
    if (d_sigma) *d_sigma = pdf;
    return std::max(delta * cdf + sigma * pdf, 0.0);
}

double ucb_from_moments(double mu, double sigma, double beta, double* d_mu, double* d_sigma) {
    if (!(beta >= 0.0)) fail(ErrorKind::Parameter, "ucb: beta must be non-negative");
    const double root = std::sqrt(beta);
    if (d_mu) *d_mu = 1.0;
    if (d_sigma) *d_sigma = root;
    return mu + root * sigma;
}

Matrix draw_base_samples(std::uint64_t seed, int samples, Index columns) {
    Matrix z(samples, columns);
    for (Index j = 0; j < columns; ++j) {
        Rng rng = make_rng(seed, static_cast<std::uint64_t>(j));
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Index s = 0; s < samples; ++s) z(s, j) = normal(rng);
    }
    return z;
}

Acquisition::Acquisition(std::shared_ptr<const GPModel> model, AcquisitionSpec spec)
    : model_(std::move(model)), spec_(std::move(spec)) {
    if (!model_) fail(ErrorKind::Parameter, "acquisition: model is null");
    const Index d = model_->dims();
    if (spec_.x_pending.rows() == 0) spec_.x_pending.resize(0, d);
    if (spec_.x_pending.cols() != d) fail(ErrorKind::Parameter, "acquisition: pending points have the wrong dimension");
    if (!spec_.x_pending.allFinite()) fail(ErrorKind::Parameter, "acquisition: non-finite pending point");
    if (spec_.variant == AcquisitionVariant::UCB || spec_.variant == AcquisitionVariant::MCUCB) {
        if (!(spec_.beta >= 0.0)) fail(ErrorKind::Parameter, "acquisition: beta must be non-negative");
    }
    if (!spec_.is_mc()) {
        if (spec_.x_pending.rows() > 0)
            fail(ErrorKind::Parameter, "acquisition: pending points require a Monte-Carlo variant");
        return;
    }
    if (spec_.samples < 1) fail(ErrorKind::Parameter, "acquisition: samples must be at least 1");
    if (spec_.batch_size < 1) fail(ErrorKind::Parameter, "acquisition: batch size must be at least 1");
    if (spec_.base_samples) {
        if (spec_.base_samples->rows() != spec_.samples)
            fail(ErrorKind::BaseSamples, "acquisition: base samples row count differs from samples");
        base_ = *spec_.base_samples;
    } else if (spec_.fix_base_samples) {
        base_ = draw_base_samples(spec_.seed, spec_.samples, spec_.x_pending.rows() + spec_.batch_size);
    }
}

double Acquisition::evaluate(const Matrix& x_batch, Matrix* grad, Rng* rng) const {
    if (x_batch.cols() != model_->dims()) fail(ErrorKind::Parameter, "acquisition: batch has the wrong dimension");
    if (x_batch.rows() < 1) fail(ErrorKind::Parameter, "acquisition: empty batch");
    return spec_.is_mc() ? evaluate_mc(x_batch, grad, rng) : evaluate_analytic(x_batch, grad);
}

double Acquisition::evaluate_analytic(const Matrix& x, Matrix* grad) const {
    if (x.rows() != 1) fail(ErrorKind::Parameter, "acquisition: analytic variants take a single point");
    PosteriorCache cache;
    const auto post = posterior(*model_, x, grad ? &cache : nullptr);
    const double mu = post.mean[0];
    const double sigma = std::sqrt(std::max(post.covariance(0, 0), 0.0));
    if (!std::isfinite(mu) || !std::isfinite(sigma)) fail(ErrorKind::Domain, "acquisition: non-finite posterior");
    double d_mu = 0.0;
    double d_sigma = 0.0;
    const double value = spec_.variant == AcquisitionVariant::EI ? ei_from_moments(mu, sigma, spec_.y_best, &d_mu, &d_sigma)
                                                                 : ucb_from_moments(mu, sigma, spec_.beta, &d_mu, &d_sigma);
    if (grad) {
        Vector mean_bar = Vector::Constant(1, d_mu);
        Matrix cov_bar = Matrix::Zero(1, 1);
        if (sigma >= kSigmaFloor) cov_bar(0, 0) = d_sigma / (2.0 * sigma);
        *grad = posterior_backward(*model_, cache, mean_bar, cov_bar);
    }
    return value;
}

double Acquisition::evaluate_mc(const Matrix& x_batch, Matrix* grad, Rng* rng) const {
    const Index p = spec_.x_pending.rows();
    const Index q = x_batch.rows();
    Matrix joint(p + q, x_batch.cols());
    joint.topRows(p) = spec_.x_pending;
    joint.bottomRows(q) = x_batch;

    Matrix drawn;
    const Matrix* base = nullptr;
    if (spec_.fix_base_samples || spec_.base_samples) {
        if (base_.cols() != p + q)
            fail(ErrorKind::BaseSamples, "acquisition: stored base samples have " + std::to_string(base_.cols()) +
                                             " columns but the joint batch has " + std::to_string(p + q) + " points");
        base = &base_;
    } else {
        if (!rng) fail(ErrorKind::BaseSamples, "acquisition: a generator is required without fixed base samples");
        drawn.resize(spec_.samples, p + q);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Index s = 0; s < drawn.rows(); ++s) {
            for (Index j = 0; j < drawn.cols(); ++j) drawn(s, j) = normal(*rng);
        }
        base = &drawn;
    }

    PosteriorCache cache;
    const auto post = posterior(*model_, joint, grad ? &cache : nullptr);
    McReduceInput in{spec_.variant == AcquisitionVariant::MCEI ? McReduction::ExpectedImprovement
                                                               : McReduction::UpperConfidenceBound,
                     &post.mean, &post.chol_factor, base, spec_.y_best,
                     std::sqrt(spec_.beta * std::numbers::pi / 2.0)};
    const auto red = mc_reduce(in, grad != nullptr);
    if (grad) {
        const Matrix cov_bar = cholesky_backward(post.chol_factor, red.lower_bar);
        const Matrix full = posterior_backward(*model_, cache, red.mean_bar, cov_bar);
        *grad = full.bottomRows(q);
    }
    return red.value;
}

namespace {

std::shared_ptr<const GPModel> borrow(const GPModel& model) {
    return std::shared_ptr<const GPModel>(&model, [](const GPModel*) {});
}

double single_point(const GPModel& model, const Vector& x, AcquisitionSpec spec, Vector* grad) {
    Acquisition acq(borrow(model), std::move(spec));
    Matrix g;
    const double v = acq.evaluate(Matrix(x.transpose()), grad ? &g : nullptr);
    if (grad) *grad = g.row(0).transpose();
    return v;
}

}  // namespace

double ei(const GPModel& model, const Vector& x, double y_best, Vector* grad) {
    AcquisitionSpec spec;
    spec.variant = AcquisitionVariant::EI;
    spec.y_best = y_best;
    return single_point(model, x, spec, grad);
}

double ucb(const GPModel& model, const Vector& x, double beta, Vector* grad) {
    AcquisitionSpec spec;
    spec.variant = AcquisitionVariant::UCB;
    spec.beta = beta;
    return single_point(model, x, spec, grad);
}

double mc_ei(const std::shared_ptr<const GPModel>& model, const Matrix& x_batch, const AcquisitionSpec& spec, Rng* rng,
             Matrix* grad) {
    AcquisitionSpec s = spec;
    s.variant = AcquisitionVariant::MCEI;
    if (!s.base_samples) s.batch_size = x_batch.rows();
    return Acquisition(model, s).evaluate(x_batch, grad, rng);
}

double mc_ucb(const std::shared_ptr<const GPModel>& model, const Matrix& x_batch, const AcquisitionSpec& spec, Rng* rng,
              Matrix* grad) {
    AcquisitionSpec s = spec;
    s.variant = AcquisitionVariant::MCUCB;
    if (!s.base_samples) s.batch_size = x_batch.rows();
    return Acquisition(model, s).evaluate(x_batch, grad, rng);
}

}  // namespace bopt
