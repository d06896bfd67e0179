#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "dlgp/baseline.hpp"
#include "dlgp/errors.hpp"
#include "dlgp/tree.hpp"
#include "helpers.hpp"

using dlgp::DivisionStrategy;
using dlgp::DlgpTree;
using dlgp::Index;
using dlgp::RowMatrix;
using dlgp::TreeSettings;
using testutil::close;

namespace {

Eigen::VectorXd vec1(double a) { return Eigen::VectorXd::Constant(1, a); }

dlgp::TreeSettings settings_1d(Index capacity, double theta, std::uint64_t seed = 1) {
    return TreeSettings{capacity, theta, DivisionStrategy::Mean, seed, 0};
}

DlgpTree uniform_tree(Index n, Index capacity, double theta, std::uint64_t seed) {
    auto hp = testutil::simple_hp(2, 1.0, 0.3, 0.05);
    DlgpTree tree(hp, TreeSettings{capacity, theta, DivisionStrategy::Mean, seed, 0});
    dlgp::Rng rng(seed + 1000);
    Eigen::VectorXd x(2);
    for (Index i = 0; i < n; ++i) {
        x[0] = rng.uniform();
        x[1] = rng.uniform();
        tree.update(x, std::sin(5.0 * x[0]) * x[1] + 0.1 * rng.normal());
    }
    return tree;
}

// Builds a deterministic depth-2 tree with capacity 2 and hard splits:
// internal nodes 0 and 1, leaves 2, 3, 4.
DlgpTree crafted_tree() {
    auto hp = testutil::simple_hp(1, 1.0, 1.0, 0.1);
    DlgpTree tree(hp, settings_1d(2, 0.0));
    tree.update(vec1(0.0), 0.5);
    tree.update(vec1(1.0), -0.5);
    tree.update(vec1(0.1), 0.25);  // divides the root at s = 0.5
    tree.update(vec1(0.2), 0.1);   // divides node 1 at s = 0.05
    return tree;
}

}  // namespace

TEST_CASE("first point makes the tree an exact one-point GP") {
    auto hp = testutil::simple_hp(1, 1.0, 1.0, 1.0);
    DlgpTree tree(hp, settings_1d(4, 0.05));
    CHECK_THROWS_AS(tree.predict(vec1(0.0)), dlgp::ModelEmptyError);

    tree.update(vec1(0.0), 2.0);
    CHECK(tree.total_points() == 1);
    CHECK(tree.leaf_count() == 1);
    const auto p = tree.predict(vec1(0.0));
    CHECK(close(p.mean, 1.0, 1e-15));
    CHECK(close(p.variance, 0.5, 1e-15));

    // Degenerate mixture: exactly the leaf's own prediction.
    const auto local = tree.leaf_at(0).predict(vec1(0.0));
    CHECK(p.mean == local.mean);
    CHECK(p.variance == local.variance);
}

TEST_CASE("division triggers when an update reaches a full leaf") {
    auto hp = testutil::simple_hp(1, 1.0, 1.0, 0.5);
    DlgpTree tree(hp, settings_1d(4, 0.05, 3));
    for (int i = 0; i < 4; ++i) tree.update(vec1(1.0), 1.0);
    CHECK(tree.division_count() == 0);
    CHECK(tree.leaf_count() == 1);

    tree.update(vec1(1.0), 1.0);  // identical points: the o = 0 rule splits at 0.5
    CHECK(tree.division_count() == 1);
    CHECK(tree.leaf_count() == 2);
    CHECK(tree.total_points() == 5);
    tree.validate_structure();

    std::int64_t points = 0;
    for (const auto leaf : tree.leaf_indices()) {
        CHECK(tree.leaf_at(leaf).size() >= 1);
        points += tree.leaf_at(leaf).size();
    }
    CHECK(points == 5);
}

TEST_CASE("a grown tree is a full binary tree holding every point") {
    const auto tree = uniform_tree(1000, 100, 0.05, 7);
    CHECK(tree.total_points() == 1000);
    CHECK(tree.division_count() == tree.leaf_count() - 1);
    tree.validate_structure();

    // Every inserted target is recoverable from exactly one leaf.
    std::vector<double> targets;
    for (const auto leaf : tree.leaf_indices()) {
        const auto& model = tree.leaf_at(leaf);
        for (Index i = 0; i < model.size(); ++i) targets.push_back(model.targets()[i]);
    }
    CHECK(targets.size() == 1000);
    dlgp::Rng rng(7 + 1000);
    std::vector<double> expected;
    Eigen::VectorXd x(2);
    for (Index i = 0; i < 1000; ++i) {
        x[0] = rng.uniform();
        x[1] = rng.uniform();
        expected.push_back(std::sin(5.0 * x[0]) * x[1] + 0.1 * rng.normal());
    }
    std::sort(targets.begin(), targets.end());
    std::sort(expected.begin(), expected.end());
    CHECK(targets == expected);
}

TEST_CASE("hard splits assign points deterministically by side") {
    auto hp = testutil::simple_hp(1, 1.0, 1.0, 0.1);
    DlgpTree tree(hp, settings_1d(4, 0.0, 99));
    const double coords[4] = {0.0, 1.0, 2.0, 3.0};
    for (const double c : coords) tree.update(vec1(c), c);
    tree.divide_leaf(0);

    const auto& rule = tree.rule_at(0);
    CHECK(rule.position() == 1.5);
    CHECK(rule.overlap() == 0.0);
    const auto& low = tree.leaf_at(1);
    const auto& high = tree.leaf_at(2);
    CHECK(low.size() == 2);
    CHECK(high.size() == 2);
    for (Index i = 0; i < 2; ++i) {
        CHECK(low.inputs()(i, 0) < 1.5);
        CHECK(high.inputs()(i, 0) > 1.5);
    }
    CHECK(tree.overlap_point_count() == 0);
}

TEST_CASE("divide_leaf preconditions") {
    auto hp = testutil::simple_hp(1, 1.0, 1.0, 0.1);
    DlgpTree tree(hp, settings_1d(4, 0.0));
    tree.update(vec1(0.0), 0.0);
    CHECK_THROWS_AS(tree.divide_leaf(0), dlgp::Error);   // not full
    CHECK_THROWS_AS(tree.divide_leaf(5), dlgp::Error);   // absent
}

TEST_CASE("overlap instrumentation matches theta on uniform data") {
    double total_increment = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto hp = testutil::simple_hp(1, 1.0, 0.5, 0.1);
        DlgpTree tree(hp, settings_1d(100, 0.05, seed));
        dlgp::Rng rng(seed * 31 + 5);
        for (int i = 0; i < 101; ++i) tree.update(vec1(rng.uniform()), rng.normal());
        CHECK(tree.division_count() == 1);
        total_increment += static_cast<double>(tree.overlap_point_count());
    }
    const double mean_increment = total_increment / 100.0;
    CHECK(mean_increment > 3.0);
    CHECK(mean_increment < 7.0);
}

TEST_CASE("depth-1 leaf probabilities are the complementary pair") {
    auto hp = testutil::simple_hp(1, 1.0, 1.0, 0.1);
    DlgpTree tree(hp, settings_1d(2, 0.4, 11));
    tree.update(vec1(0.0), 0.0);
    tree.update(vec1(1.0), 1.0);
    tree.update(vec1(0.5), 0.5);
    REQUIRE(tree.division_count() == 1);

    const auto& rule = tree.rule_at(0);
    for (const double c : {0.1, 0.45, 0.5, 0.62, 0.9}) {
        const double p = rule.probability(c);
        CHECK(tree.leaf_probability(1, vec1(c)) == 1.0 - p);
        CHECK(tree.leaf_probability(2, vec1(c)) == p);
    }
}

TEST_CASE("crafted depth-2 tree follows the branch product") {
    const auto tree = crafted_tree();
    REQUIRE(tree.division_count() == 2);
    REQUIRE(tree.is_leaf(4));

    const auto& root_rule = tree.rule_at(0);
    const auto& left_rule = tree.rule_at(1);
    CHECK(root_rule.position() == 0.5);
    CHECK(left_rule.position() == doctest::Approx(0.05).epsilon(1e-12));

    for (const double c : {0.03, 0.07, 0.3, 0.7}) {
        const double p0 = root_rule.probability(c);
        const double p1 = left_rule.probability(c);
        CHECK(tree.leaf_probability(4, vec1(c)) == (1.0 - p0) * p1);
        CHECK(tree.leaf_probability(3, vec1(c)) == (1.0 - p0) * (1.0 - p1));
        CHECK(tree.leaf_probability(2, vec1(c)) == p0);
    }
}

TEST_CASE("leaf probabilities agree with the ancestor index formula") {
    const auto tree = uniform_tree(900, 50, 0.1, 21);
    dlgp::Rng rng(77);
    Eigen::VectorXd x(2);
    x << rng.uniform(), rng.uniform();

    for (const auto leaf : tree.leaf_indices()) {
        // Ancestor of leaf j at height i is floor((j+1) / 2^i) - 1; the step
        // factor is the rule's probability when the path continues into the
        // high child (even index) and its complement otherwise.
        double expected = 1.0;
        std::vector<double> factors;
        DlgpTree::NodeIndex node = leaf;
        for (int height = 1; node > 0; ++height) {
            const DlgpTree::NodeIndex ancestor = (leaf + 1) / (1ULL << height) - 1;
            const auto& rule = tree.rule_at(ancestor);
            const double step = rule.probability(x[rule.split_dim()]);
            factors.push_back(node % 2 == 0 ? step : 1.0 - step);
            node = ancestor;
        }
        for (auto it = factors.rbegin(); it != factors.rend(); ++it) expected *= *it;
        CHECK(tree.leaf_probability(leaf, x) == expected);
    }
}

TEST_CASE("outside the root band one side has probability exactly zero") {
    auto hp = testutil::simple_hp(1, 1.0, 1.0, 0.1);
    DlgpTree tree(hp, settings_1d(2, 0.1, 5));
    tree.update(vec1(0.0), 0.0);
    tree.update(vec1(1.0), 1.0);
    tree.update(vec1(0.2), 0.2);
    REQUIRE(tree.division_count() == 1);
    const auto& rule = tree.rule_at(0);

    const double below = rule.low_edge() - 0.01;
    CHECK(tree.leaf_probability(2, vec1(below)) == 0.0);
    CHECK(tree.leaf_probability(1, vec1(below)) == 1.0);
    const double above = rule.high_edge() + 0.01;
    CHECK(tree.leaf_probability(1, vec1(above)) == 0.0);
    CHECK(tree.leaf_probability(2, vec1(above)) == 1.0);
}

TEST_CASE("pruned and full predictions agree and probabilities normalize") {
    const auto tree = uniform_tree(2000, 100, 0.05, 13);
    dlgp::Rng rng(99);
    Eigen::VectorXd x(2);
    for (int q = 0; q < 300; ++q) {
        x << rng.uniform(-0.1, 1.1), rng.uniform(-0.1, 1.1);
        const auto pruned = tree.predict(x);
        const auto full = tree.predict_full(x);
        CHECK(close(pruned.mean, full.mean, 1e-12));
        CHECK(close(pruned.variance, full.variance, 1e-12));
        CHECK(pruned.variance >= 0.0);

        double sum = 0.0;
        for (const auto& c : tree.leaf_predictions(x, /*prune=*/false)) sum += c.weight;
        CHECK(std::abs(sum - 1.0) <= 1e-12);

        const double mean_only = tree.predict_mean(x);
        CHECK(mean_only == pruned.mean);
    }
}

TEST_CASE("with hard splits exactly one leaf is active") {
    const auto tree = uniform_tree(1500, 100, 0.0, 29);
    dlgp::Rng rng(123);
    Eigen::VectorXd x(2);
    for (int q = 0; q < 200; ++q) {
        x << rng.uniform(), rng.uniform();
        CHECK(tree.active_leaf_count(x) == 1);
        int active = 0;
        double top = 0.0;
        for (const auto& c : tree.leaf_predictions(x, /*prune=*/false)) {
            active += c.weight > 0.0;
            top = std::max(top, c.weight);
        }
        CHECK(active == 1);
        CHECK(top == 1.0);
    }
}

TEST_CASE("active leaf count inside the root band is two") {
    auto hp = testutil::simple_hp(1, 1.0, 1.0, 0.1);
    DlgpTree tree(hp, settings_1d(2, 0.5, 31));
    tree.update(vec1(0.0), 0.0);
    tree.update(vec1(1.0), 1.0);
    tree.update(vec1(0.5), 0.5);
    REQUIRE(tree.division_count() == 1);
    const auto& rule = tree.rule_at(0);
    CHECK(tree.active_leaf_count(vec1(rule.position())) == 2);
    CHECK(tree.active_leaf_count(vec1(rule.low_edge() - 0.05)) == 1);
}

TEST_CASE("mixture variance matches its spread form") {
    const auto tree = uniform_tree(1200, 80, 0.1, 37);
    dlgp::Rng rng(41);
    Eigen::VectorXd x(2);
    for (int q = 0; q < 200; ++q) {
        x << rng.uniform(), rng.uniform();
        const auto contributions = tree.leaf_predictions(x);
        double mean = 0.0;
        for (const auto& c : contributions) mean += c.weight * c.mean;
        double spread = 0.0;
        for (const auto& c : contributions)
            spread += c.weight * c.variance + c.weight * (c.mean - mean) * (c.mean - mean);
        const auto p = tree.predict(x);
        CHECK(std::abs(p.variance - spread) <= 1e-10);
    }
}

TEST_CASE("mixture moments frozen example") {
    // Two active leaves: weights (1/4, 3/4), means (2, -2), variances (1, 1).
    const double mean = 0.25 * 2.0 + 0.75 * -2.0;
    const double second = 0.25 * (1.0 + 4.0) + 0.75 * (1.0 + 4.0);
    CHECK(mean == -1.0);
    CHECK(second - mean * mean == 4.0);
}

TEST_CASE("pre-division tree matches the dense baseline") {
    dlgp::Rng rng(51);
    auto hp = testutil::simple_hp(2, 1.2, 0.8, 0.05);
    DlgpTree tree(hp, TreeSettings{64, 0.05, DivisionStrategy::Mean, 51, 0});
    const RowMatrix X = testutil::uniform_matrix(rng, 40, 2);
    const Eigen::VectorXd y = testutil::normal_vector(rng, 40);
    for (Index i = 0; i < 40; ++i) tree.update(X.row(i).transpose(), y[i]);
    const auto exact = dlgp::ExactGp::fit_batch(X, y, hp);

    Eigen::VectorXd x(2);
    for (int q = 0; q < 100; ++q) {
        x << rng.uniform(-0.2, 1.2), rng.uniform(-0.2, 1.2);
        const auto tp = tree.predict(x);
        const auto ep = exact.predict(x);
        CHECK(std::abs(tp.mean - ep.mean) <=
              1e-8 * std::max({1e-3, std::abs(tp.mean), std::abs(ep.mean)}));
        CHECK(std::abs(tp.variance - ep.variance) <= 1e-8 * ep.variance);
    }
}

TEST_CASE("identical seeds reproduce the tree bit for bit") {
    const auto a = uniform_tree(1500, 100, 0.05, 61);
    const auto b = uniform_tree(1500, 100, 0.05, 61);
    CHECK(a.leaf_indices() == b.leaf_indices());
    CHECK(a.division_count() == b.division_count());
    CHECK(a.overlap_point_count() == b.overlap_point_count());
    CHECK(a.rng_state() == b.rng_state());

    dlgp::Rng rng(71);
    Eigen::VectorXd x(2);
    for (int q = 0; q < 100; ++q) {
        x << rng.uniform(), rng.uniform();
        const auto pa = a.predict(x);
        const auto pb = b.predict(x);
        CHECK(pa.mean == pb.mean);
        CHECK(pa.variance == pb.variance);
    }
}

TEST_CASE("update propagates input dimension errors") {
    auto hp = testutil::simple_hp(2);
    DlgpTree tree(hp, TreeSettings{4, 0.05, DivisionStrategy::Mean, 1, 0});
    CHECK_THROWS_AS(tree.update(vec1(0.0), 0.0), dlgp::DimensionError);
    CHECK_THROWS_AS(DlgpTree(hp, TreeSettings{1, 0.05, DivisionStrategy::Mean, 1, 0}),
                    dlgp::ConfigError);
    CHECK_THROWS_AS(DlgpTree(hp, TreeSettings{4, -0.1, DivisionStrategy::Mean, 1, 0}),
                    dlgp::ConfigError);
}
