#include "dlgp/selfcheck.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <sstream>
#include <vector>

#include "dlgp/baseline.hpp"
#include "dlgp/local_gp.hpp"
#include "dlgp/rng.hpp"
#include "dlgp/tree.hpp"

namespace dlgp {

namespace {

double deviation(double a, double b, double rel, double abs) {
    return std::abs(a - b) / (abs + rel * std::max(std::abs(a), std::abs(b)));
}

RowMatrix uniform_matrix(Rng& rng, Index rows, Index cols, double lo, double hi) {
    RowMatrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
    return m;
}

Eigen::VectorXd normal_vector(Rng& rng, Index n) {
    Eigen::VectorXd v(n);
    for (Index i = 0; i < n; ++i) v[i] = rng.normal();
    return v;
}

// Grows a uniform-data d=2 tree by `count` points.
void grow_uniform(DlgpTree& tree, Rng& rng, Index count) {
    Eigen::VectorXd x(2);
    for (Index i = 0; i < count; ++i) {
        x[0] = rng.uniform();
        x[1] = rng.uniform();
        tree.update(x, std::sin(6.0 * x[0]) + std::cos(4.0 * x[1]) + 0.1 * rng.normal());
    }
}

std::string format_ratio(double v) {
    std::ostringstream out;
    out.precision(3);
    out << v;
    return out.str();
}

}  // namespace

CheckResult check_oracle_equivalence(std::uint64_t seed) {
    Rng rng(seed);
    constexpr Index kCapacity = 100;
    constexpr double kRel = 1e-8;
    constexpr double kAbs = 1e-12;

    double worst = 0.0;
    for (int round = 0; round < 50; ++round) {
        const Index d = std::array<Index, 3>{1, 2, 5}[round % 3];
        const Index n = 1 + static_cast<Index>(rng.next() % kCapacity);

        Hyperparameters hp;
        hp.signal_variance = 0.5 + rng.uniform();
        hp.lengthscales = Eigen::VectorXd::Constant(d, 0.0);
        for (Index j = 0; j < d; ++j) hp.lengthscales[j] = 0.5 + rng.uniform();
        hp.noise_variance = 0.05 + 0.1 * rng.uniform();

        const RowMatrix X = uniform_matrix(rng, n, d, 0.0, 2.0);
        const Eigen::VectorXd y = normal_vector(rng, n);

        DlgpTree tree(hp, TreeSettings{kCapacity, 0.05, DivisionStrategy::Mean, seed,
                                       static_cast<std::uint64_t>(round)});
        for (Index i = 0; i < n; ++i) tree.update(X.row(i).transpose(), y[i]);

        const ExactGp exact = ExactGp::fit_batch(X, y, hp);
        for (int q = 0; q < 100; ++q) {
            Eigen::VectorXd xq(d);
            for (Index j = 0; j < d; ++j) xq[j] = rng.uniform(-0.5, 2.5);
            const auto tp = tree.predict(xq);
            const auto ep = exact.predict(xq);
            worst = std::max(worst, deviation(tp.mean, ep.mean, kRel, kAbs));
            worst = std::max(worst, deviation(tp.variance, ep.variance, kRel, kAbs));
        }
    }
    return {"oracle_equivalence", worst <= 1.0,
            "worst deviation " + format_ratio(worst) + "x of the 1e-8 relative budget"};
}

CheckResult check_rank_one_consistency(std::uint64_t seed) {
    Rng rng(seed);
    constexpr Index kPoints = 200;
    constexpr Index kDim = 5;
    constexpr double kTol = 1e-9;

    std::vector<Hyperparameters> settings(3);
    settings[0].signal_variance = 1.0;
    settings[0].lengthscales = Eigen::VectorXd::Constant(kDim, 1.0);
    settings[0].noise_variance = 0.1;
    settings[1].signal_variance = 2.0;
    settings[1].lengthscales =
        (Eigen::VectorXd::Constant(kDim, 0.6) + 0.4 * normal_vector(rng, kDim).cwiseAbs());
    settings[1].noise_variance = 0.01;
    settings[2].signal_variance = 0.5;
    settings[2].lengthscales = Eigen::VectorXd::Constant(kDim, 2.0);
    settings[2].noise_variance = 1.0;

    double worst = 0.0;
    for (const auto& hp : settings) {
        const RowMatrix X = uniform_matrix(rng, kPoints, kDim, 0.0, 1.0);
        const Eigen::VectorXd y = normal_vector(rng, kPoints);

        auto hp_ptr = std::make_shared<const Hyperparameters>(hp);
        LocalModel incremental(hp_ptr, kPoints);
        for (Index i = 0; i < kPoints; ++i) incremental.insert(X.row(i).transpose(), y[i]);

        LocalModel batch(hp_ptr, kPoints);
        batch.fit(X, y);

        for (Index i = 0; i < kPoints; ++i)
            for (Index j = 0; j <= i; ++j)
                worst = std::max(worst,
                                 std::abs(incremental.chol()(i, j) - batch.chol()(i, j)));
        for (Index i = 0; i < kPoints; ++i)
            worst = std::max(worst, std::abs(incremental.alpha()[i] - batch.alpha()[i]));
        if (incremental.jitter_used() != batch.jitter_used())
            return {"rank_one_consistency", false, "jitter levels diverged"};
    }
    return {"rank_one_consistency", worst < kTol,
            "max |incremental - batch| = " + format_ratio(worst)};
}

CheckResult check_probability_normalization(std::uint64_t seed) {
    Hyperparameters hp;
    hp.signal_variance = 1.0;
    hp.lengthscales = Eigen::VectorXd::Constant(2, 0.3);
    hp.noise_variance = 0.05;
    DlgpTree tree(hp, TreeSettings{100, 0.05, DivisionStrategy::Mean, seed, 0});

    Rng rng(seed + 1);
    Index streamed = 0;
    while (tree.leaf_count() < 63 && streamed < 20000) {
        grow_uniform(tree, rng, 500);
        streamed += 500;
    }
    if (tree.leaf_count() < 63)
        return {"probability_normalization", false, "tree failed to reach 63 leaves"};

    double worst = 0.0;
    Eigen::VectorXd x(2);
    for (int q = 0; q < 1000; ++q) {
        x[0] = rng.uniform();
        x[1] = rng.uniform();
        double sum = 0.0;
        for (const auto& c : tree.leaf_predictions(x, /*prune=*/false)) sum += c.weight;
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return {"probability_normalization", worst <= 1e-12,
            "max |sum - 1| = " + format_ratio(worst) + " over " +
                std::to_string(tree.leaf_count()) + " leaves"};
}

CheckResult check_pruning_soundness(std::uint64_t seed) {
    Hyperparameters hp;
    hp.signal_variance = 1.0;
    hp.lengthscales = Eigen::VectorXd::Constant(2, 0.3);
    hp.noise_variance = 0.05;
    DlgpTree tree(hp, TreeSettings{100, 0.05, DivisionStrategy::Mean, seed, 0});

    Rng rng(seed + 2);
    double worst = 0.0;
    Eigen::VectorXd x(2);
    for (int state = 0; state < 10; ++state) {
        grow_uniform(tree, rng, 500);
        for (int q = 0; q < 1000; ++q) {
            x[0] = rng.uniform(-0.1, 1.1);
            x[1] = rng.uniform(-0.1, 1.1);
            const auto pruned = tree.predict(x);
            const auto full = tree.predict_full(x);
            worst = std::max(worst, deviation(pruned.mean, full.mean, 1e-12, 1e-12));
            worst = std::max(worst, deviation(pruned.variance, full.variance, 1e-12, 1e-12));
        }
    }
    return {"pruning_soundness", worst <= 1.0,
            "worst deviation " + format_ratio(worst) + "x of the 1e-12 budget"};
}

CheckResult check_mixture_algebra(std::uint64_t seed) {
    Hyperparameters hp;
    hp.signal_variance = 1.0;
    hp.lengthscales = Eigen::VectorXd::Constant(2, 0.3);
    hp.noise_variance = 0.05;
    DlgpTree tree(hp, TreeSettings{100, 0.1, DivisionStrategy::Mean, seed, 0});

    Rng rng(seed + 3);
    grow_uniform(tree, rng, 3000);

    double worst = 0.0;
    bool variance_ok = true;
    Eigen::VectorXd x(2);
    for (int q = 0; q < 2000; ++q) {
        x[0] = rng.uniform(-0.1, 1.1);
        x[1] = rng.uniform(-0.1, 1.1);
        const auto contributions = tree.leaf_predictions(x);
        double mean = 0.0;
        for (const auto& c : contributions) mean += c.weight * c.mean;
        double second = 0.0;
        double spread = 0.0;
        for (const auto& c : contributions) {
            second += c.weight * (c.variance + c.mean * c.mean);
            const double centered = c.mean - mean;
            spread += c.weight * c.variance + c.weight * centered * centered;
        }
        const double direct = second - mean * mean;
        worst = std::max(worst, std::abs(direct - spread));
        variance_ok = variance_ok && tree.predict(x).variance >= 0.0;
    }
    return {"mixture_algebra", worst <= 1e-10 && variance_ok,
            "max |direct - spread| = " + format_ratio(worst) +
                (variance_ok ? "" : "; negative mixture variance")};
}

std::vector<CheckResult> run_selfcheck(std::uint64_t seed) {
    return {check_oracle_equivalence(seed), check_rank_one_consistency(seed),
            check_probability_normalization(seed), check_pruning_soundness(seed),
            check_mixture_algebra(seed)};
}

}  // namespace dlgp
