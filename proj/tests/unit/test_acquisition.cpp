#include "bopt/acquisition.hpp"
#include "bopt/error.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <numbers>

using namespace bopt;

namespace {

std::shared_ptr<const GPModel> fitted_model(std::uint64_t seed, Index n = 20, Index d = 2) {
    Rng rng(seed);
    const Matrix x = testutil::uniform_matrix(rng, n, d);
    const auto data = testutil::make_dataset(x, testutil::smooth_response(x));
    return std::make_shared<const GPModel>(fit(GPModel(GPConfig{}, default_hyperparameters(GPConfig{}, data), data)));
}

AcquisitionSpec mc_spec(AcquisitionVariant v, int samples, std::uint64_t seed) {
    AcquisitionSpec s;
    s.variant = v;
    s.samples = samples;
    s.fix_base_samples = true;
    s.seed = seed;
    return s;
}

Matrix row(const Vector& v) { return Matrix(v.transpose()); }

}  // namespace

TEST_SUITE("acquisition") {

TEST_CASE("EI closed-form examples") {
    CHECK(ei_from_moments(2.0, 1.0, 2.0) == doctest::Approx(0.39894).epsilon(1e-5));
    CHECK(ei_from_moments(3.0, 1.0, 2.0) == doctest::Approx(1.08332).epsilon(1e-5));
    CHECK(ei_from_moments(1.0, 0.0, 2.0) == 0.0);
    CHECK(ei_from_moments(2.5, 0.0, 2.0) == 0.5);
}

TEST_CASE("UCB closed-form examples") {
    CHECK(ucb_from_moments(1.0, 0.5, 4.0) == 2.0);
    CHECK(ucb_from_moments(1.3, 0.7, 0.0) == 1.3);
    CHECK(ucb_from_moments(1.3, 0.0, 9.0) == 1.3);
    try {
        ucb_from_moments(0.0, 1.0, -1.0);
        FAIL("expected a parameter error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parameter);
    }
}

TEST_CASE("EI is non-negative and monotone in mu and sigma") {
    for (double mu = -4.0; mu <= 4.0; mu += 0.25) {
        double prev_sigma = -1.0;
        for (double sigma = 0.0; sigma <= 3.0; sigma += 0.125) {
            const double v = ei_from_moments(mu, sigma, 0.0);
            CHECK(v >= 0.0);
            CHECK(v >= prev_sigma);
            prev_sigma = v;
            CHECK(ei_from_moments(mu + 0.1, sigma, 0.0) >= v);
            CHECK(ucb_from_moments(mu, sigma, 2.0) >= mu);
        }
    }
}

TEST_CASE("analytic gradients match central differences") {
    const auto model = fitted_model(1);
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector x = testutil::uniform_matrix(rng, 1, 2).row(0).transpose();
        const double yb = model->data().outputs.maxCoeff();
        Vector g;
        ei(*model, x, yb, &g);
        const Vector fd = testutil::central_difference([&](const Vector& p) { return ei(*model, p, yb); }, x);
        CHECK((g - fd).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, fd.cwiseAbs().maxCoeff()));
        ucb(*model, x, 4.0, &g);
        const Vector fd2 = testutil::central_difference([&](const Vector& p) { return ucb(*model, p, 4.0); }, x);
        CHECK((g - fd2).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, fd2.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("analytic variants reject batches and pending points") {
    const auto model = fitted_model(3);
    AcquisitionSpec s;
    s.variant = AcquisitionVariant::EI;
    CHECK_THROWS_AS(Acquisition(model, s).evaluate(Matrix::Constant(2, 2, 0.5)), Error);
    s.x_pending = Matrix::Constant(1, 2, 0.5);
    CHECK_THROWS_AS(Acquisition(model, s), Error);
}

TEST_CASE("MC estimates converge to the closed forms") {
    const auto model = fitted_model(4);
    Rng rng(5);
    const double yb = model->data().outputs.maxCoeff();
    int ei_checked = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const Vector x = testutil::uniform_matrix(rng, 1, 2).row(0).transpose();
        auto s = mc_spec(AcquisitionVariant::MCEI, 32768, 99);
        s.y_best = model->data().outputs.mean();
        const double exact = ei(*model, x, s.y_best);
        if (exact >= 0.05) {
            CHECK(std::abs(mc_ei(model, row(x), s) - exact) / exact < 0.05);
            ++ei_checked;
        }
        s.beta = 4.0;
        const double u = ucb(*model, x, 4.0);
        CHECK(std::abs(mc_ucb(model, row(x), s) - u) / std::abs(u) < 0.02);
    }
    CHECK(ei_checked > 5);
}

TEST_CASE("deep-tail points give vanishing MC-EI") {
    const auto model = fitted_model(6);
    Rng rng(7);
    const Matrix batch = testutil::uniform_matrix(rng, 3, 2);
    const auto post = posterior(*model, batch);
    double bar = -1e300;
    for (Index i = 0; i < 3; ++i) bar = std::max(bar, post.mean[i] + 5.0 * std::sqrt(post.covariance(i, i) + post.jitter));
    auto s = mc_spec(AcquisitionVariant::MCEI, 4096, 8);
    s.y_best = bar + 1e-9;
    CHECK(mc_ei(model, batch, s) <= 1e-6);
}

TEST_CASE("beta zero collapses MC-UCB to the largest mean") {
    const auto model = fitted_model(9);
    Rng rng(10);
    const Matrix batch = testutil::uniform_matrix(rng, 3, 2);
    auto s = mc_spec(AcquisitionVariant::MCUCB, 64, 1);
    s.beta = 0.0;
    const auto post = posterior(*model, batch);
    CHECK(mc_ucb(model, batch, s) == doctest::Approx(post.mean.maxCoeff()).epsilon(1e-12));
}

TEST_CASE("fixed base samples make MC acquisitions repeatable") {
    const auto model = fitted_model(11);
    Rng rng(12);
    const Matrix batch = testutil::uniform_matrix(rng, 2, 2);
    for (auto v : {AcquisitionVariant::MCEI, AcquisitionVariant::MCUCB}) {
        auto s = mc_spec(v, 256, 5);
        s.batch_size = 2;
        s.y_best = 0.5;
        const Acquisition a(model, s);
        const Acquisition b(model, s);
        CHECK(a.deterministic());
        CHECK(a.evaluate(batch) == a.evaluate(batch));
        CHECK(a.evaluate(batch) == b.evaluate(batch));
    }
}

TEST_CASE("fresh draws need a generator; stored samples need the right shape") {
    const auto model = fitted_model(13);
    AcquisitionSpec s;
    s.variant = AcquisitionVariant::MCEI;
    s.samples = 16;
    const Acquisition fresh(model, s);
    CHECK_FALSE(fresh.deterministic());
    try {
        fresh.evaluate(Matrix::Constant(1, 2, 0.5));
        FAIL("expected base-sample error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::BaseSamples);
    }
    Rng rng(1);
    CHECK(fresh.evaluate(Matrix::Constant(1, 2, 0.5), nullptr, &rng) >= 0.0);
    s.base_samples = Matrix::Zero(16, 3);
    try {
        Acquisition(model, s).evaluate(Matrix::Constant(2, 2, 0.5));
        FAIL("expected base-sample error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::BaseSamples);
    }
}

TEST_CASE("appended base-sample columns keep earlier columns") {
    const Matrix two = draw_base_samples(42, 100, 2);
    const Matrix five = draw_base_samples(42, 100, 5);
    CHECK(five.leftCols(2) == two);
    CHECK(std::abs(five.mean()) < 0.2);
}

TEST_CASE("MC gradients match central differences and cover batch rows only") {
    const auto model = fitted_model(14);
    Rng rng(15);
    for (auto v : {AcquisitionVariant::MCEI, AcquisitionVariant::MCUCB}) {
        for (int trial = 0; trial < 5; ++trial) {
            auto s = mc_spec(v, 128, 20 + trial);
            s.batch_size = 2;
            s.y_best = model->data().outputs.maxCoeff() - 0.3;
            s.x_pending = testutil::uniform_matrix(rng, 1, 2);
            const Acquisition acq(model, s);
            const Matrix batch = testutil::uniform_matrix(rng, 2, 2);
            Matrix g;
            acq.evaluate(batch, &g);
            CHECK(g.rows() == 2);
            CHECK(g.cols() == 2);
            const Vector flat = Eigen::Map<const Vector>(batch.data(), 4);
            const Vector fd = testutil::central_difference(
                [&](const Vector& p) { return acq.evaluate(Eigen::Map<const Matrix>(p.data(), 2, 2)); }, flat, 1e-6);
            for (Index i = 0; i < 4; ++i) CHECK(std::abs(g.data()[i] - fd[i]) <= 1e-4 * std::max(1.0, std::abs(fd[i])));
        }
    }
}

TEST_CASE("empty pending set is an identity") {
    const auto model = fitted_model(16);
    Rng rng(17);
    const Matrix batch = testutil::uniform_matrix(rng, 2, 2);
    auto s = mc_spec(AcquisitionVariant::MCEI, 512, 3);
    s.batch_size = 2;
    const auto with = with_pending(s, Matrix(0, 2));
    CHECK(Acquisition(model, s).evaluate(batch) == Acquisition(model, with).evaluate(batch));
}

TEST_CASE("pending duplicate of the batch point leaves the value unchanged") {
    const auto model = fitted_model(18);
    Rng rng(19);
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix x = testutil::uniform_matrix(rng, 1, 2);
        for (auto v : {AcquisitionVariant::MCEI, AcquisitionVariant::MCUCB}) {
            auto s = mc_spec(v, 1024, 4);
            s.y_best = model->data().outputs.mean();
            const double alone = Acquisition(model, s).evaluate(x);
            const double dup = Acquisition(model, with_pending(s, x)).evaluate(x);
            CHECK(std::abs(alone - dup) <= 1e-3 * std::max(1.0, std::abs(alone)));
        }
    }
}

TEST_CASE("MC acquisitions are invariant to batch row order") {
    const auto model = fitted_model(20);
    Rng rng(21);
    const Matrix batch = testutil::uniform_matrix(rng, 3, 2);
    Matrix swapped = batch;
    swapped.row(0).swap(swapped.row(2));
    for (auto v : {AcquisitionVariant::MCEI, AcquisitionVariant::MCUCB}) {
        auto s = mc_spec(v, 32768, 6);
        s.batch_size = 3;
        s.y_best = model->data().outputs.maxCoeff() - 0.5;
        const double a = Acquisition(model, s).evaluate(batch);
        const double b = Acquisition(model, s).evaluate(swapped);
        CHECK(std::abs(a - b) / std::abs(a) < 0.02);
    }
}

TEST_CASE("a pending point at the posterior maximiser lowers the marginal gain elsewhere") {
    // brute-force MC over shared joint samples of [pending; far]
    int reduced = 0;
    for (int seed = 0; seed < 10; ++seed) {
        // two peaks of nearly equal height
        Rng rng(100 + seed);
        const Matrix x = testutil::uniform_matrix(rng, 12, 1);
        Vector y(12);
        for (Index i = 0; i < 12; ++i) {
            const double a = (x(i, 0) - 0.25) / 0.12;
            const double b = (x(i, 0) - 0.75) / 0.12;
            y[i] = std::exp(-a * a) + 0.95 * std::exp(-b * b);
        }
        const auto data = testutil::make_dataset(x, y);
        const auto model =
            std::make_shared<const GPModel>(fit(GPModel(GPConfig{}, default_hyperparameters(GPConfig{}, data), data)));
        Matrix grid(201, 1);
        for (Index i = 0; i < 201; ++i) grid(i, 0) = i / 200.0;
        const auto scan = posterior(*model, grid);
        Index best = 0;
        scan.mean.maxCoeff(&best);
        const double xm = grid(best, 0);
        const double yb = model->data().outputs.maxCoeff();
        // most promising grid point at least 0.25 away from the maximiser
        double far = -1.0;
        double far_ei = -1.0;
        for (Index i = 0; i < 201; ++i) {
            if (std::abs(grid(i, 0) - xm) < 0.25) continue;
            const double v = ei(*model, grid.row(i).transpose(), yb);
            if (v > far_ei) {
                far_ei = v;
                far = grid(i, 0);
            }
        }
        Matrix joint(2, 1);
        joint << xm, far;
        auto s = mc_spec(AcquisitionVariant::MCEI, 4096, 7 + seed);
        s.y_best = yb;
        const Matrix z = draw_base_samples(s.seed, s.samples, 2);
        const auto post = posterior(*model, joint);
        double sum_a = 0.0;
        double sum_b = 0.0;
        double sum_max = 0.0;
        for (Index k = 0; k < z.rows(); ++k) {
            const Vector f = post.mean + post.chol_factor * z.row(k).transpose();
            const double a = std::max(f[0] - s.y_best, 0.0);
            const double b = std::max(f[1] - s.y_best, 0.0);
            sum_a += a;
            sum_b += b;
            sum_max += std::max(a, b);
        }
        const double n = static_cast<double>(z.rows());
        const double library = Acquisition(model, with_pending(s, joint.topRows(1))).evaluate(joint.bottomRows(1));
        CHECK(library == doctest::Approx(sum_max / n).epsilon(1e-12));
        if (sum_max / n - sum_a / n < sum_b / n) ++reduced;
    }
    CHECK(reduced >= 9);
}

TEST_CASE("negative beta is rejected for MC-UCB") {
    const auto model = fitted_model(22);
    auto s = mc_spec(AcquisitionVariant::MCUCB, 8, 1);
    s.beta = -0.5;
    CHECK_THROWS_AS(Acquisition(model, s), Error);
}

}
