#pragma once

#include <cmath>

#include "dlgp/types.hpp"

namespace dlgp {

// Squared-exponential ARD kernel parameters for a single output target.
struct Hyperparameters {
    double signal_variance = 1.0;
    Eigen::VectorXd lengthscales;
    double noise_variance = 0.0;

    Index input_dim() const { return lengthscales.size(); }

    // Throws ConfigError naming the offending field.
    void validate() const;

    // Precomputed 1/l_j^2, the form used by the evaluation hot paths.
    Eigen::VectorXd inverse_squared_lengthscales() const;
};

// k(a, b) = sf2 * exp(-0.5 * sum_j (a_j - b_j)^2 * inv_len_sq_j).
// The squared scaled distance is accumulated in one pass before a single exp.
inline double se_ard(const double* a, const double* b, Index dim, const double* inv_len_sq,
                     double signal_variance) {
    double z = 0.0;
    for (Index j = 0; j < dim; ++j) {
        const double diff = a[j] - b[j];
        z += diff * diff * inv_len_sq[j];
    }
    return signal_variance * std::exp(-0.5 * z);
}

double kernel_eval(const Eigen::Ref<const Eigen::VectorXd>& a,
                   const Eigen::Ref<const Eigen::VectorXd>& b, const Hyperparameters& hp);

// Element i is kernel_eval(X.row(i), x, hp).
Eigen::VectorXd kernel_vector(const Eigen::Ref<const RowMatrix>& X,
                              const Eigen::Ref<const Eigen::VectorXd>& x,
                              const Hyperparameters& hp);

RowMatrix kernel_matrix(const Eigen::Ref<const RowMatrix>& X, const Hyperparameters& hp);

}  // namespace dlgp
