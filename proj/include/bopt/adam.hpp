#pragma once

#include "bopt/types.hpp"

#include <cmath>

namespace bopt {

// First/second moment estimates with bias correction. step() returns the
// increment for a *descent* on the supplied gradient.
class Adam {
public:
    explicit Adam(Index size, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(Vector::Zero(size)), v_(Vector::Zero(size)) {}

    Vector step(const Vector& grad) {
        ++t_;
        m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
        v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
        const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        Vector delta(grad.size());
        for (Index i = 0; i < grad.size(); ++i) {
            delta[i] = -lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
        }
        return delta;
    }

private:
    double lr_;
    double beta1_;
    double beta2_;
    double eps_;
    long t_ = 0;
    Vector m_;
    Vector v_;
};

}  // namespace bopt
