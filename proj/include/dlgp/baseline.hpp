#pragma once

#include <vector>

#include "dlgp/kernel.hpp"
#include "dlgp/types.hpp"

namespace dlgp {

// Dense exact GP used as the correctness oracle and small-scale baseline.
// Deliberately backed by Eigen's LLT so it shares no factorization code with
// the incremental local models it is checked against.
class ExactGp {
public:
    struct Prediction {
        double mean = 0.0;
        double variance = 0.0;
    };

    static ExactGp fit_batch(const Eigen::Ref<const RowMatrix>& X,
                             const Eigen::Ref<const Eigen::VectorXd>& y,
                             const Hyperparameters& hp);

    Prediction predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    double predict_mean(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    std::vector<Prediction> predict_batch(const Eigen::Ref<const RowMatrix>& Xq) const;

    Index size() const { return X_.rows(); }
    double jitter_used() const { return jitter_; }
    const Eigen::MatrixXd& chol() const { return L_; }
    const Eigen::VectorXd& alpha() const { return alpha_; }
    const Hyperparameters& hyperparameters() const { return hp_; }

private:
    ExactGp() = default;

    Hyperparameters hp_;
    RowMatrix X_;
    Eigen::MatrixXd L_;
    Eigen::VectorXd alpha_;
    double jitter_ = 0.0;
};

}  // namespace dlgp
