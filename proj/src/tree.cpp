#include "dlgp/tree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "dlgp/errors.hpp"

namespace dlgp {

DlgpTree::DlgpTree(Hyperparameters hp, TreeSettings settings)
    : hp_(std::make_shared<const Hyperparameters>(std::move(hp))),
      settings_(settings),
      rng_(Rng::for_stream(settings.seed, settings.stream)) {
    hp_->validate();
    if (settings_.capacity < 2) throw ConfigError("capacity must be >= 2");
    if (!(settings_.theta >= 0.0)) throw ConfigError("theta must be non-negative");
}

void DlgpTree::check_input(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != input_dim())
        throw DimensionError("input dimension " + std::to_string(x.size()) +
                             " does not match model dimension " + std::to_string(input_dim()));
}

const DlgpTree::Node& DlgpTree::node_at(NodeIndex index) const {
    const auto it = nodes_.find(index);
    if (it == nodes_.end()) throw Error("no node at index " + std::to_string(index));
    return it->second;
}

bool DlgpTree::is_leaf(NodeIndex index) const { return node_at(index).leaf(); }

const DivisionRule& DlgpTree::rule_at(NodeIndex index) const {
    const Node& node = node_at(index);
    if (node.leaf()) throw Error("node " + std::to_string(index) + " is a leaf");
    return std::get<DivisionRule>(node.payload);
}

const LocalModel& DlgpTree::leaf_at(NodeIndex index) const {
    const Node& node = node_at(index);
    if (!node.leaf()) throw Error("node " + std::to_string(index) + " is not a leaf");
    return *std::get<std::unique_ptr<LocalModel>>(node.payload);
}

std::vector<DlgpTree::NodeIndex> DlgpTree::leaf_indices() const {
    std::vector<NodeIndex> out;
    out.reserve(static_cast<std::size_t>(leaf_count_));
    for (const auto& [index, node] : nodes_)
        if (node.leaf()) out.push_back(index);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<DlgpTree::NodeIndex> DlgpTree::node_indices() const {
    std::vector<NodeIndex> out;
    out.reserve(nodes_.size());
    for (const auto& [index, node] : nodes_) out.push_back(index);
    std::sort(out.begin(), out.end());
    return out;
}

DlgpTree::NodeIndex DlgpTree::descend_step(NodeIndex i, const DivisionRule& rule,
                                           const Eigen::Ref<const Eigen::VectorXd>& x) {
    const double p = rule.probability(x[rule.split_dim()]);
    return rng_.bernoulli(p) ? high_child(i) : low_child(i);
}

void DlgpTree::update(const Eigen::Ref<const Eigen::VectorXd>& x, double y) {
    check_input(x);

    if (nodes_.empty()) {
        auto model = std::make_unique<LocalModel>(hp_, settings_.capacity);
        model->insert(x, y);
        nodes_.emplace(0, Node{std::move(model)});
        leaf_count_ = 1;
        n_total_ = 1;
        return;
    }

    NodeIndex i = 0;
    while (!node_at(i).leaf()) i = descend_step(i, rule_at(i), x);

    int consecutive = 0;
    while (leaf_at(i).size() == settings_.capacity) {
        if (++consecutive > kMaxConsecutiveDivisions)
            throw DegenerateDivisionError("update exceeded the consecutive division limit");
        divide_leaf(i);
        i = descend_step(i, rule_at(i), x);
    }

    auto& model = *std::get<std::unique_ptr<LocalModel>>(nodes_.at(i).payload);
    model.insert(x, y);
    ++n_total_;
}

void DlgpTree::divide_leaf(NodeIndex index) {
    const auto it = nodes_.find(index);
    if (it == nodes_.end() || !it->second.leaf())
        throw Error("divide_leaf: node " + std::to_string(index) + " is not a leaf");
    if (index > (std::numeric_limits<NodeIndex>::max() - 2) / 2)
        throw DegenerateDivisionError("tree depth exceeds the heap index range");

    LocalModel& model = *std::get<std::unique_ptr<LocalModel>>(it->second.payload);
    const Index n = model.size();
    if (n != settings_.capacity)
        throw Error("divide_leaf: leaf holds " + std::to_string(n) + " of " +
                    std::to_string(settings_.capacity) + " points");

    const auto points = model.inputs();
    const DivisionRule rule = compute_rule(points, settings_.theta, settings_.strategy);

    std::vector<std::uint8_t> high_side(static_cast<std::size_t>(n), 0);
    Index n_high = 0;
    bool split_ok = false;
    for (int attempt = 0; attempt < kMaxAssignmentRetries; ++attempt) {
        n_high = 0;
        for (Index r = 0; r < n; ++r) {
            const bool high = rng_.bernoulli(rule.probability(points(r, rule.split_dim())));
            high_side[static_cast<std::size_t>(r)] = high;
            n_high += high;
        }
        if (n_high > 0 && n_high < n) {
            split_ok = true;
            break;
        }
    }
    if (!split_ok) {
        // Deterministic fallback: lower half by coordinate goes to the low child.
        std::vector<Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Index{0});
        std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
            return points(a, rule.split_dim()) < points(b, rule.split_dim());
        });
        const Index n_low = n / 2;
        for (Index k = 0; k < n; ++k)
            high_side[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] =
                k >= n_low;
        n_high = n - n_low;
    }

    const Index d = input_dim();
    RowMatrix x_low(n - n_high, d);
    RowMatrix x_high(n_high, d);
    Eigen::VectorXd y_low(n - n_high);
    Eigen::VectorXd y_high(n_high);
    const auto targets = model.targets();
    std::int64_t in_band = 0;
    Index lo = 0;
    Index hi = 0;
    for (Index r = 0; r < n; ++r) {
        in_band += rule.in_band(points(r, rule.split_dim()));
        if (high_side[static_cast<std::size_t>(r)]) {
            x_high.row(hi) = points.row(r);
            y_high[hi++] = targets[r];
        } else {
            x_low.row(lo) = points.row(r);
            y_low[lo++] = targets[r];
        }
    }

    auto low_model = std::make_unique<LocalModel>(hp_, settings_.capacity);
    low_model->fit(x_low, y_low);
    auto high_model = std::make_unique<LocalModel>(hp_, settings_.capacity);
    high_model->fit(x_high, y_high);

    nodes_.insert_or_assign(low_child(index), Node{std::move(low_model)});
    nodes_.insert_or_assign(high_child(index), Node{std::move(high_model)});
    nodes_.at(index).payload = rule;

    overlap_point_count_ += in_band;
    ++division_count_;
    ++leaf_count_;
}

template <typename LeafFn>
void DlgpTree::traverse(const Eigen::Ref<const Eigen::VectorXd>& x, bool prune,
                        LeafFn&& fn) const {
    thread_local std::vector<std::pair<NodeIndex, double>> stack;
    stack.clear();
    stack.emplace_back(0, 1.0);
    while (!stack.empty()) {
        const auto [i, w] = stack.back();
        stack.pop_back();
        const Node& node = node_at(i);
        if (node.leaf()) {
            fn(i, w, *std::get<std::unique_ptr<LocalModel>>(node.payload));
            continue;
        }
        const DivisionRule& rule = std::get<DivisionRule>(node.payload);
        const double p = rule.probability(x[rule.split_dim()]);
        // Low child is pushed last so it is visited first; the reduction order
        // over leaves is fixed regardless of pruning.
        if (!prune || p > 0.0) stack.emplace_back(high_child(i), w * p);
        if (!prune || p < 1.0) stack.emplace_back(low_child(i), w * (1.0 - p));
    }
}

PredictiveDistribution DlgpTree::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (n_total_ == 0) throw ModelEmptyError("predict on an empty tree");
    check_input(x);
    return mix(x, /*prune=*/true);
}

PredictiveDistribution DlgpTree::predict_full(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (n_total_ == 0) throw ModelEmptyError("predict_full on an empty tree");
    check_input(x);
    return mix(x, /*prune=*/false);
}

// Mixture moments over the leaves: E = sum w mu, V = sum w (sigma^2 + mu^2) - E^2,
// grouped so a single-leaf mixture reproduces the leaf prediction exactly.
PredictiveDistribution DlgpTree::mix(const Eigen::Ref<const Eigen::VectorXd>& x,
                                     bool prune) const {
    double mean = 0.0;
    double variance_part = 0.0;
    double square_part = 0.0;
    traverse(x, prune, [&](NodeIndex, double w, const LocalModel& model) {
        const auto p = model.predict(x);
        mean += w * p.mean;
        variance_part += w * p.variance;
        square_part += w * p.mean * p.mean;
    });
    return {mean, std::max(variance_part + (square_part - mean * mean), 0.0)};
}

double DlgpTree::predict_mean(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (n_total_ == 0) throw ModelEmptyError("predict_mean on an empty tree");
    check_input(x);
    double mean = 0.0;
    traverse(x, true, [&](NodeIndex, double w, const LocalModel& model) {
        mean += w * model.predict_mean(x);
    });
    return mean;
}

std::int64_t DlgpTree::active_leaf_count(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (nodes_.empty()) return 0;
    check_input(x);
    std::int64_t count = 0;
    traverse(x, true, [&](NodeIndex, double w, const LocalModel&) { count += w > 0.0; });
    return count;
}

double DlgpTree::leaf_probability(NodeIndex leaf,
                                  const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (!node_at(leaf).leaf()) throw Error("leaf_probability: node is not a leaf");
    check_input(x);
    std::vector<double> factors;
    NodeIndex i = leaf;
    while (i > 0) {
        const NodeIndex par = parent(i);
        const double p = rule_at(par).probability(x[rule_at(par).split_dim()]);
        factors.push_back(i == high_child(par) ? p : 1.0 - p);
        i = par;
    }
    // Multiply root-to-leaf, matching the traversal's rounding order.
    double weight = 1.0;
    for (auto it = factors.rbegin(); it != factors.rend(); ++it) weight *= *it;
    return weight;
}

std::vector<DlgpTree::LeafContribution> DlgpTree::leaf_predictions(
    const Eigen::Ref<const Eigen::VectorXd>& x, bool prune) const {
    if (n_total_ == 0) throw ModelEmptyError("leaf_predictions on an empty tree");
    check_input(x);
    std::vector<LeafContribution> out;
    traverse(x, prune, [&](NodeIndex i, double w, const LocalModel& model) {
        const auto p = model.predict(x);
        out.push_back({i, w, p.mean, p.variance});
    });
    return out;
}

void DlgpTree::restore_rule(NodeIndex index, const DivisionRule& rule) {
    nodes_.insert_or_assign(index, Node{rule});
}

void DlgpTree::restore_leaf(NodeIndex index, LocalModel&& model) {
    nodes_.insert_or_assign(index, Node{std::make_unique<LocalModel>(std::move(model))});
}

void DlgpTree::restore_counters(std::int64_t n_total, std::int64_t division_count,
                                std::int64_t overlap_point_count) {
    n_total_ = n_total;
    division_count_ = division_count;
    overlap_point_count_ = overlap_point_count;
}

void DlgpTree::restore_rng_state(const std::array<std::uint64_t, 4>& state) {
    rng_.set_state(state);
}

void DlgpTree::finalize_restore() {
    leaf_count_ = 0;
    for (const auto& [index, node] : nodes_) leaf_count_ += node.leaf();
    validate_structure();
}

void DlgpTree::validate_structure() const {
    if (nodes_.empty()) {
        if (n_total_ != 0 || leaf_count_ != 0 || division_count_ != 0)
            throw Error("empty tree with nonzero counters");
        return;
    }
    std::int64_t leaves = 0;
    std::int64_t internals = 0;
    std::int64_t points = 0;
    std::size_t reached = 0;
    std::vector<NodeIndex> stack{0};
    while (!stack.empty()) {
        const NodeIndex i = stack.back();
        stack.pop_back();
        const auto it = nodes_.find(i);
        if (it == nodes_.end()) throw Error("missing node " + std::to_string(i));
        ++reached;
        if (it->second.leaf()) {
            const auto& model = *std::get<std::unique_ptr<LocalModel>>(it->second.payload);
            if (model.size() < 1 || model.size() > settings_.capacity)
                throw Error("leaf " + std::to_string(i) + " holds an invalid point count");
            ++leaves;
            points += model.size();
        } else {
            ++internals;
            stack.push_back(low_child(i));
            stack.push_back(high_child(i));
        }
    }
    if (reached != nodes_.size()) throw Error("unreachable nodes present");
    if (leaves != leaf_count_) throw Error("leaf count mismatch");
    if (internals != leaves - 1) throw Error("tree is not a full binary tree");
    if (internals != division_count_) throw Error("division count mismatch");
    if (points != n_total_) throw Error("leaf sizes do not sum to the total point count");
    if (overlap_point_count_ < 0) throw Error("negative overlap point count");
}

}  // namespace dlgp
