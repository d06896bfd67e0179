#include "dlgp/local_gp.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "dlgp/errors.hpp"

namespace dlgp {

namespace {

double dot(const double* a, const double* b, Index k) {
    if (k == 0) return 0.0;
    return Eigen::Map<const Eigen::VectorXd>(a, k).dot(Eigen::Map<const Eigen::VectorXd>(b, k));
}

}  // namespace

LocalModel::LocalModel(std::shared_ptr<const Hyperparameters> hp, Index capacity)
    : hp_(std::move(hp)),
      inv_len_sq_(hp_->inverse_squared_lengthscales()),
      cap_(capacity),
      dim_(hp_->input_dim()) {
    hp_->validate();
    if (cap_ < 1) throw ConfigError("capacity must be >= 1");
    X_.setZero(cap_, dim_);
    y_.setZero(cap_);
    L_.setZero(cap_, cap_);
    alpha_.setZero(cap_);
    scratch_.setZero(cap_);
}

bool LocalModel::factor_row(Index i, double jitter) {
    double* row = L_.row(i).data();
    const double* xi = X_.row(i).data();
    for (Index j = 0; j < i; ++j)
        row[j] = se_ard(xi, X_.row(j).data(), dim_, inv_len_sq_.data(), hp_->signal_variance);
    const double diag = hp_->signal_variance + hp_->noise_variance + jitter;

    for (Index j = 0; j < i; ++j)
        row[j] = (row[j] - dot(row, L_.row(j).data(), j)) / L_(j, j);
    const double pivot = diag - dot(row, row, i);
    // Written so a NaN pivot also fails.
    if (!(pivot > pivot_floor())) return false;
    row[i] = std::sqrt(pivot);
    return true;
}

bool LocalModel::factor_rows(Index begin, Index end, double jitter) {
    for (Index i = begin; i < end; ++i)
        if (!factor_row(i, jitter)) return false;
    return true;
}

void LocalModel::refactor_with_escalation(const char* context) {
    double jitter = jitter_ == 0.0 ? pivot_floor() : jitter_ * 10.0;
    for (; jitter <= max_jitter() * (1.0 + 1e-9); jitter *= 10.0) {
        if (factor_rows(0, n_, jitter)) {
            jitter_ = jitter;
            return;
        }
    }
    throw NotPositiveDefiniteError(std::string(context) +
                                   ": Cholesky failed after maximum jitter escalation");
}

void LocalModel::fit(const Eigen::Ref<const RowMatrix>& X,
                     const Eigen::Ref<const Eigen::VectorXd>& y) {
    const Index n = X.rows();
    if (n < 1) throw DimensionError("fit requires at least one point");
    if (n > cap_) throw DimensionError("fit exceeds capacity " + std::to_string(cap_));
    if (X.cols() != dim_) throw DimensionError("fit input dimension mismatch");
    if (y.size() != n) throw DimensionError("fit target count mismatch");

    X_.topRows(n) = X;
    y_.head(n) = y;
    n_ = n;
    jitter_ = 0.0;
    try {
        if (!factor_rows(0, n_, 0.0)) refactor_with_escalation("fit");
    } catch (const NotPositiveDefiniteError&) {
        n_ = 0;
        throw;
    }
    solve_alpha();
}

void LocalModel::insert(const Eigen::Ref<const Eigen::VectorXd>& x, double y) {
    if (n_ == cap_) throw Error("insert: model is at capacity");
    if (x.size() != dim_) throw DimensionError("insert input dimension mismatch");

    X_.row(n_) = x;
    y_[n_] = y;
    ++n_;
    if (!factor_row(n_ - 1, jitter_)) {
        // The appended pivot fell below the floor: keep the uniform-jitter
        // invariant by refactoring everything at the next escalation level.
        try {
            refactor_with_escalation("insert");
        } catch (const NotPositiveDefiniteError&) {
            // Roll back to the previous (factorizable) state.
            --n_;
            factor_rows(0, n_, jitter_);
            throw;
        }
    }
    solve_alpha();
}

void LocalModel::solve_alpha() {
    double* z = scratch_.data();
    for (Index i = 0; i < n_; ++i)
        z[i] = (y_[i] - dot(L_.row(i).data(), z, i)) / L_(i, i);
    for (Index i = n_ - 1; i >= 0; --i) {
        double s = z[i];
        for (Index j = i + 1; j < n_; ++j) s -= L_(j, i) * alpha_[j];
        alpha_[i] = s / L_(i, i);
    }
}

double LocalModel::predict_mean(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (n_ == 0) throw ModelEmptyError("predict on empty local model");
    if (x.size() != dim_) throw DimensionError("predict input dimension mismatch");

    // Same kernel-vector-plus-dot path as predict, so both agree bitwise.
    thread_local std::vector<double> kv;
    if (static_cast<Index>(kv.size()) < n_) kv.resize(n_);
    const double* xq = x.data();
    for (Index i = 0; i < n_; ++i)
        kv[i] = se_ard(xq, X_.row(i).data(), dim_, inv_len_sq_.data(), hp_->signal_variance);
    return dot(kv.data(), alpha_.data(), n_);
}

LocalModel::Prediction LocalModel::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (n_ == 0) throw ModelEmptyError("predict on empty local model");
    if (x.size() != dim_) throw DimensionError("predict input dimension mismatch");

    thread_local std::vector<double> kv;
    if (static_cast<Index>(kv.size()) < n_) kv.resize(n_);
    const double* xq = x.data();
    for (Index i = 0; i < n_; ++i)
        kv[i] = se_ard(xq, X_.row(i).data(), dim_, inv_len_sq_.data(), hp_->signal_variance);

    Prediction out;
    out.mean = dot(kv.data(), alpha_.data(), n_);
    // v = L \ k(X, x), in place.
    for (Index i = 0; i < n_; ++i)
        kv[i] = (kv[i] - dot(L_.row(i).data(), kv.data(), i)) / L_(i, i);
    const double q = dot(kv.data(), kv.data(), n_);
    out.variance = std::max(hp_->signal_variance - q, 0.0);
    return out;
}

LocalModel LocalModel::restore(std::shared_ptr<const Hyperparameters> hp, Index capacity,
                               const Eigen::Ref<const RowMatrix>& X,
                               const Eigen::Ref<const Eigen::VectorXd>& y,
                               const Eigen::Ref<const Eigen::VectorXd>& chol_lower,
                               const Eigen::Ref<const Eigen::VectorXd>& alpha, double jitter) {
    LocalModel m(std::move(hp), capacity);
    const Index n = X.rows();
    if (n < 1 || n > capacity) throw Error("restore: invalid point count");
    if (X.cols() != m.dim_) throw DimensionError("restore input dimension mismatch");
    if (y.size() != n || alpha.size() != n) throw DimensionError("restore vector size mismatch");
    if (chol_lower.size() != n * (n + 1) / 2)
        throw DimensionError("restore Cholesky size mismatch");

    m.X_.topRows(n) = X;
    m.y_.head(n) = y;
    m.alpha_.head(n) = alpha;
    Index k = 0;
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j <= i; ++j) m.L_(i, j) = chol_lower[k++];
    for (Index i = 0; i < n; ++i)
        if (!(m.L_(i, i) > 0.0)) throw Error("restore: non-positive Cholesky diagonal");
    m.n_ = n;
    m.jitter_ = jitter;
    return m;
}

}  // namespace dlgp
