#include "dlgp/snapshot.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "dlgp/errors.hpp"

namespace dlgp {

namespace {

using nlohmann::json;

constexpr int kSnapshotVersion = 1;

json leaf_to_json(const DlgpTree::NodeIndex index, const LocalModel& model) {
    const Index n = model.size();
    const Index d = model.input_dim();

    std::vector<double> x(static_cast<std::size_t>(n * d));
    Eigen::Map<RowMatrix>(x.data(), n, d) = model.inputs();
    std::vector<double> y(model.targets().begin(), model.targets().end());
    std::vector<double> alpha(model.alpha().begin(), model.alpha().end());

    const auto chol = model.chol();
    std::vector<double> lower;
    lower.reserve(static_cast<std::size_t>(n * (n + 1) / 2));
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j <= i; ++j) lower.push_back(chol(i, j));

    json j;
    j["i"] = index;
    j["n"] = n;
    j["x"] = std::move(x);
    j["y"] = std::move(y);
    j["chol"] = std::move(lower);
    j["alpha"] = std::move(alpha);
    j["jitter"] = model.jitter_used();
    return j;
}

json rule_to_json(const DlgpTree::NodeIndex index, const DivisionRule& rule) {
    json j;
    j["i"] = index;
    j["rule"] = {{"dim", rule.split_dim()},
                 {"position", rule.position()},
                 {"overlap", rule.overlap()}};
    return j;
}

template <typename T>
T field(const json& j, const char* name) {
    if (!j.contains(name)) throw Error(std::string("snapshot: missing field \"") + name + "\"");
    try {
        return j.at(name).get<T>();
    } catch (const json::exception&) {
        throw Error(std::string("snapshot: field \"") + name + "\" has the wrong type");
    }
}

}  // namespace

std::string snapshot_to_json(const DlgpTree& tree) {
    const auto& hp = tree.hyperparameters();
    const auto& settings = tree.settings();

    json j;
    j["format"] = "dlgp-snapshot";
    j["version"] = kSnapshotVersion;
    j["input_dim"] = tree.input_dim();
    j["capacity"] = settings.capacity;
    j["theta"] = settings.theta;
    j["strategy"] = strategy_name(settings.strategy);
    j["seed"] = settings.seed;
    j["stream"] = settings.stream;
    j["hyperparameters"] = {
        {"signal_variance", hp.signal_variance},
        {"lengthscales", std::vector<double>(hp.lengthscales.begin(), hp.lengthscales.end())},
        {"noise_variance", hp.noise_variance}};
    j["rng_state"] = tree.rng_state();
    j["counters"] = {{"n_total", tree.total_points()},
                     {"division_count", tree.division_count()},
                     {"overlap_point_count", tree.overlap_point_count()}};

    json nodes = json::array();
    for (const auto index : tree.node_indices()) {
        if (tree.is_leaf(index))
            nodes.push_back(leaf_to_json(index, tree.leaf_at(index)));
        else
            nodes.push_back(rule_to_json(index, tree.rule_at(index)));
    }
    j["nodes"] = std::move(nodes);
    return j.dump();
}

DlgpTree snapshot_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("snapshot: invalid JSON: ") + e.what());
    }
    if (field<std::string>(j, "format") != "dlgp-snapshot")
        throw Error("snapshot: unrecognized format tag");
    if (field<int>(j, "version") != kSnapshotVersion)
        throw Error("snapshot: unsupported version");

    Hyperparameters hp;
    const json& jhp = j.at("hyperparameters");
    hp.signal_variance = field<double>(jhp, "signal_variance");
    const auto ls = field<std::vector<double>>(jhp, "lengthscales");
    hp.lengthscales = Eigen::Map<const Eigen::VectorXd>(ls.data(), static_cast<Index>(ls.size()));
    hp.noise_variance = field<double>(jhp, "noise_variance");

    TreeSettings settings;
    settings.capacity = field<Index>(j, "capacity");
    settings.theta = field<double>(j, "theta");
    settings.strategy = parse_strategy(field<std::string>(j, "strategy"));
    settings.seed = field<std::uint64_t>(j, "seed");
    settings.stream = field<std::uint64_t>(j, "stream");

    DlgpTree tree(hp, settings);
    const Index d = field<Index>(j, "input_dim");
    if (d != tree.input_dim()) throw Error("snapshot: input_dim does not match lengthscales");

    for (const json& jn : j.at("nodes")) {
        const auto index = field<DlgpTree::NodeIndex>(jn, "i");
        if (jn.contains("rule")) {
            const json& jr = jn.at("rule");
            tree.restore_rule(index,
                              DivisionRule(field<Index>(jr, "dim"), field<double>(jr, "position"),
                                           field<double>(jr, "overlap")));
            continue;
        }
        const Index n = field<Index>(jn, "n");
        const auto x = field<std::vector<double>>(jn, "x");
        const auto y = field<std::vector<double>>(jn, "y");
        const auto lower = field<std::vector<double>>(jn, "chol");
        const auto alpha = field<std::vector<double>>(jn, "alpha");
        if (static_cast<Index>(x.size()) != n * d || static_cast<Index>(y.size()) != n)
            throw Error("snapshot: leaf data size mismatch");
        auto model = LocalModel::restore(
            tree.shared_hyperparameters(), settings.capacity,
            Eigen::Map<const RowMatrix>(x.data(), n, d),
            Eigen::Map<const Eigen::VectorXd>(y.data(), n),
            Eigen::Map<const Eigen::VectorXd>(lower.data(), static_cast<Index>(lower.size())),
            Eigen::Map<const Eigen::VectorXd>(alpha.data(), n), field<double>(jn, "jitter"));
        tree.restore_leaf(index, std::move(model));
    }

    const json& jc = j.at("counters");
    tree.restore_counters(field<std::int64_t>(jc, "n_total"),
                          field<std::int64_t>(jc, "division_count"),
                          field<std::int64_t>(jc, "overlap_point_count"));
    tree.restore_rng_state(field<std::array<std::uint64_t, 4>>(j, "rng_state"));
    tree.finalize_restore();
    return tree;
}

void save_snapshot(const DlgpTree& tree, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << snapshot_to_json(tree);
    if (!out) throw Error("write failed for " + path.string());
}

DlgpTree load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return snapshot_from_json(buffer.str());
}

}  // namespace dlgp
