#pragma once

#include <memory>

#include "dlgp/kernel.hpp"
#include "dlgp/types.hpp"

namespace dlgp {

// Exact GP over one leaf's data, capped at the owning tree's capacity.
//
// The model keeps the Cholesky factor L of K(X,X) + (noise + jitter) I and the
// weight vector alpha with L (L^T alpha) = y. Storage is dense row-major with
// the full capacity preallocated, so growth never reallocates. New points are
// appended with a rank-one Cholesky extension: one forward substitution for
// the new row plus two triangular solves for alpha, O(n^2) total. The append
// runs the same per-row elimination as the batch fit, so a model grown
// incrementally matches a model fitted from scratch on the same data.
class LocalModel {
public:
    struct Prediction {
        double mean = 0.0;
        double variance = 0.0;
    };

    LocalModel(std::shared_ptr<const Hyperparameters> hp, Index capacity);

    // Batch fit, replacing any previous content. n must be in [1, capacity].
    void fit(const Eigen::Ref<const RowMatrix>& X, const Eigen::Ref<const Eigen::VectorXd>& y);

    // Rank-one insertion of a single point.
    void insert(const Eigen::Ref<const Eigen::VectorXd>& x, double y);

    Prediction predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    double predict_mean(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    Index size() const { return n_; }
    Index capacity() const { return cap_; }
    Index input_dim() const { return dim_; }
    double jitter_used() const { return jitter_; }
    const Hyperparameters& hyperparameters() const { return *hp_; }
    std::shared_ptr<const Hyperparameters> shared_hyperparameters() const { return hp_; }

    using MatrixView = Eigen::Map<const RowMatrix, Eigen::Unaligned, Eigen::OuterStride<>>;
    using VectorView = Eigen::Map<const Eigen::VectorXd>;

    MatrixView inputs() const {
        return MatrixView(X_.data(), n_, dim_, Eigen::OuterStride<>(dim_));
    }
    VectorView targets() const { return VectorView(y_.data(), n_); }
    MatrixView chol() const {
        return MatrixView(L_.data(), n_, n_, Eigen::OuterStride<>(cap_));
    }
    VectorView alpha() const { return VectorView(alpha_.data(), n_); }

    // Rebuilds a model from a snapshot; chol_lower is the packed lower
    // triangle of L in row-major order.
    static LocalModel restore(std::shared_ptr<const Hyperparameters> hp, Index capacity,
                              const Eigen::Ref<const RowMatrix>& X,
                              const Eigen::Ref<const Eigen::VectorXd>& y,
                              const Eigen::Ref<const Eigen::VectorXd>& chol_lower,
                              const Eigen::Ref<const Eigen::VectorXd>& alpha, double jitter);

private:
    // Fills and eliminates row i of L at the given jitter level. Returns
    // false when the pivot falls at or below the jitter floor.
    bool factor_row(Index i, double jitter);
    bool factor_rows(Index begin, Index end, double jitter);
    void refactor_with_escalation(const char* context);
    void solve_alpha();

    double pivot_floor() const { return 1e-10 * hp_->signal_variance; }
    double max_jitter() const { return 1e-4 * hp_->signal_variance; }

    std::shared_ptr<const Hyperparameters> hp_;
    Eigen::VectorXd inv_len_sq_;
    Index cap_ = 0;
    Index dim_ = 0;
    Index n_ = 0;
    double jitter_ = 0.0;
    RowMatrix X_;
    Eigen::VectorXd y_;
    RowMatrix L_;
    Eigen::VectorXd alpha_;
    Eigen::VectorXd scratch_;
};

}  // namespace dlgp
