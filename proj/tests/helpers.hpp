#pragma once

#include <algorithm>
#include <cmath>

#include "dlgp/kernel.hpp"
#include "dlgp/rng.hpp"
#include "dlgp/types.hpp"

namespace testutil {

// |a - b| <= tol * max(1, |a|, |b|)
inline bool close(double a, double b, double tol = 1e-12) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

inline dlgp::RowMatrix uniform_matrix(dlgp::Rng& rng, dlgp::Index rows, dlgp::Index cols,
                                      double lo = 0.0, double hi = 1.0) {
    dlgp::RowMatrix m(rows, cols);
    for (dlgp::Index i = 0; i < rows; ++i)
        for (dlgp::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
    return m;
}

inline Eigen::VectorXd normal_vector(dlgp::Rng& rng, dlgp::Index n) {
    Eigen::VectorXd v(n);
    for (dlgp::Index i = 0; i < n; ++i) v[i] = rng.normal();
    return v;
}

inline dlgp::Hyperparameters simple_hp(dlgp::Index dim, double signal_variance = 1.0,
                                       double lengthscale = 1.0,
                                       double noise_variance = 0.1) {
    dlgp::Hyperparameters hp;
    hp.signal_variance = signal_variance;
    hp.lengthscales = Eigen::VectorXd::Constant(dim, lengthscale);
    hp.noise_variance = noise_variance;
    return hp;
}

}  // namespace testutil
