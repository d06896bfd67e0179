#include "dlgp/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <mutex>
#include <thread>

#include "dlgp/errors.hpp"
#include "dlgp/metrics.hpp"
#include "dlgp/tree.hpp"

namespace dlgp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string format_optional(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("nan");
}

std::vector<std::int64_t> checkpoint_positions(std::int64_t n, int checkpoints) {
    std::vector<std::int64_t> positions;
    for (int k = 1; k <= checkpoints; ++k) {
        const std::int64_t pos = static_cast<std::int64_t>(
            (static_cast<__int128>(k) * n) / checkpoints);
        if (pos >= 1 && (positions.empty() || positions.back() != pos))
            positions.push_back(pos);
    }
    return positions;
}

TreeSettings tree_settings(const ExperimentConfig& cfg, int target) {
    TreeSettings s;
    s.capacity = cfg.capacity;
    s.theta = cfg.theta;
    s.strategy = cfg.strategy;
    s.seed = cfg.seed;
    s.stream = static_cast<std::uint64_t>(target);
    return s;
}

std::vector<ReportRow> checkpoint_worker(const Dataset& train, const Dataset& test,
                                         const ExperimentConfig& cfg, int target) {
    DlgpTree tree(cfg.targets[static_cast<std::size_t>(target)], tree_settings(cfg, target));
    const double noise = cfg.targets[static_cast<std::size_t>(target)].noise_variance;

    std::vector<double> test_targets(static_cast<std::size_t>(test.rows()));
    for (Index q = 0; q < test.rows(); ++q)
        test_targets[static_cast<std::size_t>(q)] = test.targets(q, target);

    const auto positions = checkpoint_positions(train.rows(), cfg.checkpoints);
    std::vector<ReportRow> rows;
    rows.reserve(positions.size());

    std::vector<double> means(static_cast<std::size_t>(test.rows()));
    double interval_update_time = 0.0;
    std::int64_t interval_updates = 0;
    std::size_t next_position = 0;

    for (Index i = 0; i < train.rows(); ++i) {
        const auto x = train.inputs.row(i).transpose();
        const auto start = Clock::now();
        tree.update(x, train.targets(i, target));
        interval_update_time += seconds_since(start);
        ++interval_updates;

        if (next_position >= positions.size() || i + 1 != positions[next_position]) continue;
        ++next_position;

        // Timed region covers the mean computation only.
        double predict_time = 0.0;
        for (Index q = 0; q < test.rows(); ++q) {
            const auto xq = test.inputs.row(q).transpose();
            const auto t0 = Clock::now();
            means[static_cast<std::size_t>(q)] = tree.predict_mean(xq);
            predict_time += seconds_since(t0);
        }

        double nll_sum = 0.0;
        std::int64_t active_sum = 0;
        for (Index q = 0; q < test.rows(); ++q) {
            const auto xq = test.inputs.row(q).transpose();
            const auto pred = tree.predict(xq);
            nll_sum += gaussian_nll(test_targets[static_cast<std::size_t>(q)], pred.mean,
                                    pred.variance, noise);
            active_sum += tree.active_leaf_count(xq);
        }

        ReportRow row;
        row.n = i + 1;
        row.target = target;
        row.nmse = nmse(means, test_targets);
        row.nll = nll_sum / static_cast<double>(test.rows());
        row.t_update_mean_s = interval_update_time / static_cast<double>(interval_updates);
        row.t_predict_mean_s = predict_time / static_cast<double>(test.rows());
        row.leaf_count = tree.leaf_count();
        row.division_count = tree.division_count();
        row.overlap_ratio =
            overlap_ratio(tree.overlap_point_count(), tree.division_count(), cfg.capacity);
        row.active_leaves_mean =
            static_cast<double>(active_sum) / static_cast<double>(test.rows());
        rows.push_back(row);

        interval_update_time = 0.0;
        interval_updates = 0;
    }
    return rows;
}

std::vector<ReportRow> online_worker(const Dataset& stream, const ExperimentConfig& cfg,
                                     int target, const StreamObserver& observer) {
    const auto& hp = cfg.targets[static_cast<std::size_t>(target)];
    DlgpTree tree(hp, tree_settings(cfg, target));
    MetricAccumulator acc(1000);

    std::vector<ReportRow> rows;
    std::int64_t active_sum = 0;

    const auto emit = [&](std::int64_t n) {
        ReportRow row;
        row.n = n;
        row.target = target;
        row.nmse = acc.online_nmse();
        row.nll = acc.mean_nll();
        row.t_update_mean_s = acc.smoothed_update_time();
        row.t_predict_mean_s = acc.smoothed_predict_time();
        row.leaf_count = tree.leaf_count();
        row.division_count = tree.division_count();
        row.overlap_ratio =
            overlap_ratio(tree.overlap_point_count(), tree.division_count(), cfg.capacity);
        row.active_leaves_mean = static_cast<double>(active_sum) / static_cast<double>(n);
        rows.push_back(row);
    };

    for (Index i = 0; i < stream.rows(); ++i) {
        const auto x = stream.inputs.row(i).transpose();
        const double y = stream.targets(i, target);

        const auto t0 = Clock::now();
        const PredictiveDistribution pred = tree.total_points() == 0
                                                ? PredictiveDistribution{0.0, hp.signal_variance}
                                                : tree.predict(x);
        const double predict_time = seconds_since(t0);

        active_sum += tree.active_leaf_count(x);

        const auto t1 = Clock::now();
        tree.update(x, y);
        const double update_time = seconds_since(t1);

        acc.observe(y, pred.mean, pred.variance, hp.noise_variance, update_time, predict_time);
        if (observer) observer(i, target, pred);

        if ((i + 1) % 1000 == 0 || i + 1 == stream.rows()) emit(i + 1);
    }
    return rows;
}

template <typename Worker>
std::vector<ReportRow> run_targets(Index target_count, bool parallel, Worker&& worker) {
    std::vector<std::vector<ReportRow>> per_target(static_cast<std::size_t>(target_count));
    if (parallel && target_count > 1) {
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(target_count));
        std::exception_ptr failure;
        std::mutex failure_mutex;
        for (Index t = 0; t < target_count; ++t) {
            threads.emplace_back([&, t] {
                try {
                    per_target[static_cast<std::size_t>(t)] = worker(static_cast<int>(t));
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
        for (auto& thread : threads) thread.join();
        if (failure) std::rethrow_exception(failure);
    } else {
        for (Index t = 0; t < target_count; ++t)
            per_target[static_cast<std::size_t>(t)] = worker(static_cast<int>(t));
    }

    std::vector<ReportRow> rows;
    for (const auto& part : per_target) rows.insert(rows.end(), part.begin(), part.end());
    std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
        return a.n != b.n ? a.n < b.n : a.target < b.target;
    });
    return rows;
}

void write_report(const std::vector<ReportRow>& rows, std::ostream* out) {
    if (!out) return;
    *out << report_header() << '\n';
    for (const auto& row : rows) *out << format_report_row(row) << '\n';
    out->flush();
}

void check_dataset(const Dataset& data, const ExperimentConfig& cfg, const char* what) {
    if (data.rows() == 0) return;
    if (data.input_dim() != cfg.input_dim)
        throw DimensionError(std::string(what) + ": input dimension mismatch");
    if (data.target_dim() != cfg.target_dim())
        throw DimensionError(std::string(what) + ": target dimension mismatch");
}

}  // namespace

std::string report_header() {
    return "n,target,nmse,nll,t_update_mean_s,t_predict_mean_s,leaf_count,division_count,"
           "overlap_ratio,active_leaves_mean";
}

std::string format_report_row(const ReportRow& row) {
    std::string out;
    out += std::to_string(row.n);
    out += ',';
    out += std::to_string(row.target);
    out += ',';
    out += format_optional(row.nmse);
    out += ',';
    out += format_double(row.nll);
    out += ',';
    out += format_double(row.t_update_mean_s);
    out += ',';
    out += format_double(row.t_predict_mean_s);
    out += ',';
    out += std::to_string(row.leaf_count);
    out += ',';
    out += std::to_string(row.division_count);
    out += ',';
    out += format_optional(row.overlap_ratio);
    out += ',';
    out += format_double(row.active_leaves_mean);
    return out;
}

std::vector<ReportRow> run_checkpoint_scenario(const Dataset& train, const Dataset& test,
                                               const ExperimentConfig& cfg, std::ostream* out,
                                               const ScenarioOptions& options) {
    cfg.validate();
    check_dataset(train, cfg, "train");
    check_dataset(test, cfg, "test");
    auto rows = run_targets(cfg.target_dim(), options.parallel_targets, [&](int target) {
        return checkpoint_worker(train, test, cfg, target);
    });
    write_report(rows, out);
    return rows;
}

std::vector<ReportRow> run_online_scenario(const Dataset& stream, const ExperimentConfig& cfg,
                                           std::ostream* out, const ScenarioOptions& options,
                                           const StreamObserver& observer) {
    cfg.validate();
    check_dataset(stream, cfg, "stream");
    auto rows = run_targets(cfg.target_dim(), options.parallel_targets, [&](int target) {
        return online_worker(stream, cfg, target, observer);
    });
    write_report(rows, out);
    return rows;
}

}  // namespace dlgp
