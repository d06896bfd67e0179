#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <unordered_map>
#include <variant>
#include <vector>

#include "dlgp/kernel.hpp"
#include "dlgp/local_gp.hpp"
#include "dlgp/partition.hpp"
#include "dlgp/rng.hpp"
#include "dlgp/types.hpp"

namespace dlgp {

struct TreeSettings {
    Index capacity = 100;
    double theta = 0.05;
    DivisionStrategy strategy = DivisionStrategy::Mean;
    std::uint64_t seed = 0;
    // Stream index for deterministic RNG splitting across trees (one per target).
    std::uint64_t stream = 0;
};

// Online-constructed binary partition tree of local GP models.
//
// Nodes are heap-indexed: the children of node i are 2i+1 (low side of the
// hyperplane) and 2i+2 (high side), stored sparsely so unbalanced trees do not
// blow up memory. Leaves hold local models with at most `capacity` points;
// internal nodes hold division rules. Updates descend by sampling each step
// from a Bernoulli with the rule's routing probability, divide any full leaf
// they reach, and insert with a rank-one model extension. Predictions combine
// the active leaves' posteriors into an exact mixture, pruning subtrees whose
// step probability is exactly zero.
//
// Concurrency: update requires exclusive access; any number of predictions may
// run concurrently with each other (but not with an update).
class DlgpTree {
public:
    using NodeIndex = std::uint64_t;

    struct LeafContribution {
        NodeIndex index = 0;
        double weight = 0.0;
        double mean = 0.0;
        double variance = 0.0;
    };

    DlgpTree(Hyperparameters hp, TreeSettings settings);

    void update(const Eigen::Ref<const Eigen::VectorXd>& x, double y);

    PredictiveDistribution predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    double predict_mean(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    // Unpruned oracle visiting every leaf; for tests and verification.
    PredictiveDistribution predict_full(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    std::int64_t active_leaf_count(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    // Marginal probability of one leaf, multiplied along its branch.
    double leaf_probability(NodeIndex leaf, const Eigen::Ref<const Eigen::VectorXd>& x) const;
    // Per-leaf mixture terms; prune=false enumerates zero-weight leaves too.
    std::vector<LeafContribution> leaf_predictions(const Eigen::Ref<const Eigen::VectorXd>& x,
                                                   bool prune = true) const;

    // Splits a full leaf in place: assigns its points to the two children by
    // sampling the new rule, and fits both child models from scratch.
    void divide_leaf(NodeIndex index);

    std::int64_t total_points() const { return n_total_; }
    std::int64_t leaf_count() const { return leaf_count_; }
    std::int64_t division_count() const { return division_count_; }
    std::int64_t overlap_point_count() const { return overlap_point_count_; }

    Index input_dim() const { return hp_->input_dim(); }
    const Hyperparameters& hyperparameters() const { return *hp_; }
    std::shared_ptr<const Hyperparameters> shared_hyperparameters() const { return hp_; }
    const TreeSettings& settings() const { return settings_; }

    bool contains(NodeIndex index) const { return nodes_.count(index) > 0; }
    bool is_leaf(NodeIndex index) const;
    const DivisionRule& rule_at(NodeIndex index) const;
    const LocalModel& leaf_at(NodeIndex index) const;
    std::vector<NodeIndex> leaf_indices() const;
    std::vector<NodeIndex> node_indices() const;

    const std::array<std::uint64_t, 4>& rng_state() const { return rng_.state(); }

    // Snapshot support: install nodes into a freshly constructed tree, then
    // finalize_restore() validates the structure and counters.
    void restore_rule(NodeIndex index, const DivisionRule& rule);
    void restore_leaf(NodeIndex index, LocalModel&& model);
    void restore_counters(std::int64_t n_total, std::int64_t division_count,
                          std::int64_t overlap_point_count);
    void restore_rng_state(const std::array<std::uint64_t, 4>& state);
    void finalize_restore();

    // Walks the whole tree and throws Error on any structural violation.
    void validate_structure() const;

    static constexpr NodeIndex low_child(NodeIndex i) { return 2 * i + 1; }
    static constexpr NodeIndex high_child(NodeIndex i) { return 2 * i + 2; }
    static constexpr NodeIndex parent(NodeIndex i) { return (i - 1) / 2; }

private:
    struct Node {
        std::variant<DivisionRule, std::unique_ptr<LocalModel>> payload;
        bool leaf() const { return payload.index() == 1; }
    };

    static constexpr int kMaxConsecutiveDivisions = 64;
    static constexpr int kMaxAssignmentRetries = 16;

    const Node& node_at(NodeIndex index) const;
    NodeIndex descend_step(NodeIndex i, const DivisionRule& rule,
                           const Eigen::Ref<const Eigen::VectorXd>& x);
    void check_input(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    PredictiveDistribution mix(const Eigen::Ref<const Eigen::VectorXd>& x, bool prune) const;

    template <typename LeafFn>
    void traverse(const Eigen::Ref<const Eigen::VectorXd>& x, bool prune, LeafFn&& fn) const;

    std::shared_ptr<const Hyperparameters> hp_;
    TreeSettings settings_;
    std::unordered_map<NodeIndex, Node> nodes_;
    Rng rng_;
    std::int64_t n_total_ = 0;
    std::int64_t leaf_count_ = 0;
    std::int64_t division_count_ = 0;
    std::int64_t overlap_point_count_ = 0;
};

}  // namespace dlgp
