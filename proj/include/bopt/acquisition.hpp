#pragma once

#include "bopt/random.hpp"
#include "bopt/surrogate.hpp"
#include "bopt/types.hpp"

#include <memory>
#include <optional>

namespace bopt {

enum class AcquisitionVariant { EI, UCB, MCEI, MCUCB };

struct AcquisitionSpec {
    AcquisitionVariant variant = AcquisitionVariant::UCB;
    double beta = 4.0;    // UCB variants
    double y_best = 0.0;  // EI variants
    int samples = 512;    // MC variants
    bool fix_base_samples = false;
    std::optional<Matrix> base_samples;  // S x (p + q); drawn from seed when absent
    Matrix x_pending;                    // p x d; zero rows when nothing is pending
    Index batch_size = 1;                // q, shapes the fixed base samples
    std::uint64_t seed = 0;              // stream for fixed base samples

    [[nodiscard]] bool is_mc() const {
        return variant == AcquisitionVariant::MCEI || variant == AcquisitionVariant::MCUCB;
    }
    [[nodiscard]] Index pending_count() const { return x_pending.rows(); }
};

// Conditions MC evaluations on x_pending (replacing any previous pending
// set). Stored base samples are dropped so that they are re-drawn with the
// new shape; drawn columns are indexed so existing columns are preserved.
AcquisitionSpec with_pending(const AcquisitionSpec& spec, const Matrix& x_pending);

double normal_pdf(double z);
double normal_cdf(double z);

inline constexpr double kSigmaFloor = 1e-10;

// Closed forms on posterior moments. The optional outputs receive the
// partial derivatives with respect to mu and sigma.
double ei_from_moments(double mu, double sigma, double y_best, double* d_mu = nullptr, double* d_sigma = nullptr);
double ucb_from_moments(double mu, double sigma, double beta, double* d_mu = nullptr, double* d_sigma = nullptr);

/// Acquisition function bound to a fitted model.
///
/// Analytic variants accept a single row. Monte-Carlo variants evaluate the
/// joint posterior over [x_pending; x_batch] and average the per-sample
/// maximum over the joint points. Gradients flow to the batch rows only.
/// With fix_base_samples the base draws are created once here and the
/// object is a deterministic function of the batch; otherwise every call
/// draws fresh samples from the caller's generator.
class Acquisition {
public:
    Acquisition(std::shared_ptr<const GPModel> model, AcquisitionSpec spec);

    [[nodiscard]] const AcquisitionSpec& spec() const { return spec_; }
    [[nodiscard]] const GPModel& model() const { return *model_; }
    [[nodiscard]] std::shared_ptr<const GPModel> model_ptr() const { return model_; }
    [[nodiscard]] bool deterministic() const { return !spec_.is_mc() || spec_.fix_base_samples; }
    [[nodiscard]] const Matrix& fixed_base_samples() const { return base_; }

    double evaluate(const Matrix& x_batch, Matrix* grad = nullptr, Rng* rng = nullptr) const;

private:
    double evaluate_analytic(const Matrix& x, Matrix* grad) const;
    double evaluate_mc(const Matrix& x_batch, Matrix* grad, Rng* rng) const;

    std::shared_ptr<const GPModel> model_;
    AcquisitionSpec spec_;
    Matrix base_;
};

// Standard-normal base samples whose column j depends only on (seed, j).
Matrix draw_base_samples(std::uint64_t seed, int samples, Index columns);

double ei(const GPModel& model, const Vector& x, double y_best, Vector* grad = nullptr);
double ucb(const GPModel& model, const Vector& x, double beta, Vector* grad = nullptr);
double mc_ei(const std::shared_ptr<const GPModel>& model, const Matrix& x_batch, const AcquisitionSpec& spec,
             Rng* rng = nullptr, Matrix* grad = nullptr);
double mc_ucb(const std::shared_ptr<const GPModel>& model, const Matrix& x_batch, const AcquisitionSpec& spec,
              Rng* rng = nullptr, Matrix* grad = nullptr);

}  // namespace bopt
