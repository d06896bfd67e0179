#include "dlgp/kernel.hpp"

#include <string>

#include "dlgp/errors.hpp"

namespace dlgp {

void Hyperparameters::validate() const {
    if (!(signal_variance > 0.0) || !std::isfinite(signal_variance))
        throw ConfigError("signal_variance must be a positive finite real");
    if (lengthscales.size() == 0) throw ConfigError("lengthscales must be non-empty");
    for (Index j = 0; j < lengthscales.size(); ++j) {
        if (!(lengthscales[j] > 0.0) || !std::isfinite(lengthscales[j]))
            throw ConfigError("lengthscales[" + std::to_string(j) +
                              "] must be a positive finite real");
    }
    if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance))
        throw ConfigError("noise_variance must be a non-negative finite real");
}

Eigen::VectorXd Hyperparameters::inverse_squared_lengthscales() const {
    Eigen::VectorXd inv(lengthscales.size());
    for (Index j = 0; j < lengthscales.size(); ++j)
        inv[j] = 1.0 / (lengthscales[j] * lengthscales[j]);
    return inv;
}

namespace {

void check_dim(Index got, Index expected, const char* what) {
    if (got != expected)
        throw DimensionError(std::string(what) + ": dimension " + std::to_string(got) +
                             " does not match " + std::to_string(expected));
}

}  // namespace

double kernel_eval(const Eigen::Ref<const Eigen::VectorXd>& a,
                   const Eigen::Ref<const Eigen::VectorXd>& b, const Hyperparameters& hp) {
    check_dim(a.size(), hp.input_dim(), "kernel_eval lhs");
    check_dim(b.size(), hp.input_dim(), "kernel_eval rhs");
    const Eigen::VectorXd inv = hp.inverse_squared_lengthscales();
    return se_ard(a.data(), b.data(), hp.input_dim(), inv.data(), hp.signal_variance);
}

Eigen::VectorXd kernel_vector(const Eigen::Ref<const RowMatrix>& X,
                              const Eigen::Ref<const Eigen::VectorXd>& x,
                              const Hyperparameters& hp) {
    if (X.rows() > 0) check_dim(X.cols(), hp.input_dim(), "kernel_vector inputs");
    check_dim(x.size(), hp.input_dim(), "kernel_vector query");
    const Eigen::VectorXd inv = hp.inverse_squared_lengthscales();
    Eigen::VectorXd out(X.rows());
    for (Index i = 0; i < X.rows(); ++i)
        out[i] = se_ard(X.row(i).data(), x.data(), hp.input_dim(), inv.data(),
                        hp.signal_variance);
    return out;
}

RowMatrix kernel_matrix(const Eigen::Ref<const RowMatrix>& X, const Hyperparameters& hp) {
    if (X.rows() > 0) check_dim(X.cols(), hp.input_dim(), "kernel_matrix inputs");
    const Eigen::VectorXd inv = hp.inverse_squared_lengthscales();
    RowMatrix K(X.rows(), X.rows());
    for (Index i = 0; i < X.rows(); ++i) {
        K(i, i) = hp.signal_variance;
        for (Index j = 0; j < i; ++j) {
            const double k = se_ard(X.row(i).data(), X.row(j).data(), hp.input_dim(),
                                    inv.data(), hp.signal_variance);
            K(i, j) = k;
            K(j, i) = k;
        }
    }
    return K;
}

}  // namespace dlgp
