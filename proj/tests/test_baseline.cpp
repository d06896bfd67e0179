#include <doctest.h>

#include <cmath>
#include <memory>

#include "dlgp/baseline.hpp"
#include "dlgp/errors.hpp"
#include "dlgp/local_gp.hpp"
#include "helpers.hpp"

using dlgp::ExactGp;
using dlgp::Index;
using dlgp::RowMatrix;
using testutil::close;

TEST_CASE("zero targets give zero weights") {
    const auto hp = testutil::simple_hp(2, 1.0, 1.0, 0.3);
    dlgp::Rng rng(3);
    const RowMatrix X = testutil::uniform_matrix(rng, 10, 2);
    const auto gp = ExactGp::fit_batch(X, Eigen::VectorXd::Zero(10), hp);
    CHECK(gp.alpha().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("shares the local model contract") {
    dlgp::Rng rng(4);
    const auto hp = testutil::simple_hp(3, 1.4, 0.7, 0.1);
    const RowMatrix X = testutil::uniform_matrix(rng, 40, 3);
    const Eigen::VectorXd y = testutil::normal_vector(rng, 40);

    const auto gp = ExactGp::fit_batch(X, y, hp);
    dlgp::LocalModel local(std::make_shared<const dlgp::Hyperparameters>(hp), 40);
    local.fit(X, y);

    for (int q = 0; q < 50; ++q) {
        const Eigen::VectorXd x = testutil::normal_vector(rng, 3) * 0.4;
        const auto a = gp.predict(x);
        const auto b = local.predict(x);
        CHECK(close(a.mean, b.mean, 1e-10));
        CHECK(close(a.variance, b.variance, 1e-10));
    }
}

TEST_CASE("large fit reconstructs the covariance") {
    dlgp::Rng rng(5);
    const auto hp = testutil::simple_hp(5, 1.0, 1.0, 0.1);
    const Index n = 1000;
    const RowMatrix X = testutil::uniform_matrix(rng, n, 5);
    const Eigen::VectorXd y = testutil::normal_vector(rng, n);
    const auto gp = ExactGp::fit_batch(X, y, hp);

    Eigen::MatrixXd target = dlgp::kernel_matrix(X, hp);
    target.diagonal().array() += hp.noise_variance + gp.jitter_used();
    const Eigen::MatrixXd recon = gp.chol() * gp.chol().transpose();
    CHECK((recon - target).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("noise-free predictions interpolate") {
    dlgp::Rng rng(6);
    const auto hp = testutil::simple_hp(2, 1.0, 1.0, 0.0);
    const RowMatrix X = testutil::uniform_matrix(rng, 12, 2, 0.0, 3.0);
    const Eigen::VectorXd y = testutil::normal_vector(rng, 12);
    const auto gp = ExactGp::fit_batch(X, y, hp);
    const auto predictions = gp.predict_batch(X);
    for (Index i = 0; i < 12; ++i)
        CHECK(std::abs(predictions[static_cast<std::size_t>(i)].mean - y[i]) < 1e-7);
}

TEST_CASE("far-field rows recover the prior variance") {
    dlgp::Rng rng(7);
    const auto hp = testutil::simple_hp(1, 2.5, 1.0, 0.2);
    const RowMatrix X = testutil::uniform_matrix(rng, 6, 1);
    const auto gp = ExactGp::fit_batch(X, testutil::normal_vector(rng, 6), hp);
    RowMatrix far(2, 1);
    far << 50.0, -40.0;
    for (const auto& p : gp.predict_batch(far))
        CHECK(std::abs(p.variance - hp.signal_variance) < 1e-6 * hp.signal_variance);
}

TEST_CASE("single-row batch equals the scalar predict") {
    dlgp::Rng rng(8);
    const auto hp = testutil::simple_hp(2, 1.0, 0.9, 0.05);
    const RowMatrix X = testutil::uniform_matrix(rng, 15, 2);
    const auto gp = ExactGp::fit_batch(X, testutil::normal_vector(rng, 15), hp);
    RowMatrix q(1, 2);
    q << 0.3, 0.4;
    const auto batch = gp.predict_batch(q);
    const auto single = gp.predict(q.row(0).transpose());
    REQUIRE(batch.size() == 1);
    CHECK(batch[0].mean == single.mean);
    CHECK(batch[0].variance == single.variance);
}

TEST_CASE("rejects degenerate shapes") {
    const auto hp = testutil::simple_hp(2);
    CHECK_THROWS_AS(ExactGp::fit_batch(RowMatrix(0, 2), Eigen::VectorXd(0), hp),
                    dlgp::DimensionError);
    CHECK_THROWS_AS(ExactGp::fit_batch(RowMatrix::Zero(2, 3), Eigen::VectorXd::Zero(2), hp),
                    dlgp::DimensionError);
}
