#include "dlgp/baseline.hpp"

#include <Eigen/Cholesky>

#include "dlgp/errors.hpp"

namespace dlgp {

ExactGp ExactGp::fit_batch(const Eigen::Ref<const RowMatrix>& X,
                           const Eigen::Ref<const Eigen::VectorXd>& y,
                           const Hyperparameters& hp) {
    hp.validate();
    const Index n = X.rows();
    if (n < 1) throw DimensionError("fit_batch requires at least one point");
    if (X.cols() != hp.input_dim()) throw DimensionError("fit_batch input dimension mismatch");
    if (y.size() != n) throw DimensionError("fit_batch target count mismatch");

    const RowMatrix K = kernel_matrix(X, hp);

    ExactGp gp;
    gp.hp_ = hp;
    gp.X_ = X;

    Eigen::MatrixXd A = K;  // column-major copy for LLT
    A.diagonal().array() += hp.noise_variance;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    double jitter = 0.0;
    while (llt.info() != Eigen::Success) {
        jitter = jitter == 0.0 ? 1e-10 * hp.signal_variance : jitter * 10.0;
        if (jitter > 1e-4 * hp.signal_variance * (1.0 + 1e-9))
            throw NotPositiveDefiniteError("fit_batch: Cholesky failed after maximum jitter");
        Eigen::MatrixXd Aj = A;
        Aj.diagonal().array() += jitter;
        llt.compute(Aj);
    }
    gp.jitter_ = jitter;
    gp.L_ = llt.matrixL();
    gp.alpha_ = gp.L_.transpose()
                    .triangularView<Eigen::Upper>()
                    .solve(gp.L_.triangularView<Eigen::Lower>().solve(y));
    return gp;
}

ExactGp::Prediction ExactGp::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (X_.rows() == 0) throw ModelEmptyError("predict on an empty exact GP");
    const Eigen::VectorXd k = kernel_vector(X_, x, hp_);
    const Eigen::VectorXd v = L_.triangularView<Eigen::Lower>().solve(k);
    Prediction out;
    out.mean = k.dot(alpha_);
    out.variance = std::max(hp_.signal_variance - v.squaredNorm(), 0.0);
    return out;
}

double ExactGp::predict_mean(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (X_.rows() == 0) throw ModelEmptyError("predict on an empty exact GP");
    return kernel_vector(X_, x, hp_).dot(alpha_);
}

std::vector<ExactGp::Prediction> ExactGp::predict_batch(
    const Eigen::Ref<const RowMatrix>& Xq) const {
    if (Xq.cols() != hp_.input_dim() && Xq.rows() > 0)
        throw DimensionError("predict_batch input dimension mismatch");
    std::vector<Prediction> out;
    out.reserve(static_cast<std::size_t>(Xq.rows()));
    for (Index i = 0; i < Xq.rows(); ++i) out.push_back(predict(Xq.row(i).transpose()));
    return out;
}

}  // namespace dlgp
