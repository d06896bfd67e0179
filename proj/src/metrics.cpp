#include "dlgp/metrics.hpp"

#include <cmath>
#include <numbers>

#include "dlgp/errors.hpp"

namespace dlgp {

double population_variance(std::span<const double> values) {
    RunningMoments m;
    for (const double v : values) m.add(v);
    return m.population_variance();
}

double nmse(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size())
        throw DimensionError("nmse: prediction and target counts differ");
    if (targets.size() < 2) throw DimensionError("nmse requires at least two targets");
    const double variance = population_variance(targets);
    if (variance <= 0.0)
        throw DegenerateTargetsError("nmse undefined: targets have zero variance");
    double mse = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const double e = predictions[i] - targets[i];
        mse += e * e;
    }
    mse /= static_cast<double>(targets.size());
    return mse / variance;
}

double gaussian_nll(double y, double mean, double variance, double noise_variance) {
    const double total = variance + noise_variance;
    if (!(total > 0.0)) throw Error("gaussian_nll requires positive total variance");
    const double e = y - mean;
    return 0.5 * std::log(2.0 * std::numbers::pi * total) + e * e / (2.0 * total);
}

std::optional<double> overlap_ratio(std::int64_t overlap_point_count,
                                    std::int64_t division_count, std::int64_t capacity) {
    if (division_count < 1) return std::nullopt;
    return static_cast<double>(overlap_point_count) /
           static_cast<double>(division_count * capacity);
}

MovingAverage::MovingAverage(std::size_t window) : buffer_(window, 0.0) {
    if (window == 0) throw Error("moving average window must be positive");
}

void MovingAverage::add(double x) {
    sum_ += x - buffer_[next_];
    buffer_[next_] = x;
    next_ = (next_ + 1) % buffer_.size();
    if (filled_ < buffer_.size()) ++filled_;
    ++total_;
}

double MovingAverage::value() const {
    return filled_ == 0 ? 0.0 : sum_ / static_cast<double>(filled_);
}

MetricAccumulator::MetricAccumulator(std::size_t timing_window)
    : update_times_(timing_window), predict_times_(timing_window) {}

void MetricAccumulator::observe(double y, double mean, double variance,
                                double noise_variance, double update_time,
                                double predict_time) {
    ++count_;
    const double e = y - mean;
    squared_error_sum_ += e * e;
    nll_sum_ += gaussian_nll(y, mean, variance, noise_variance);
    target_moments_.add(y);
    update_times_.add(update_time);
    predict_times_.add(predict_time);
}

std::optional<double> MetricAccumulator::online_nmse() const {
    if (target_moments_.m2() <= 0.0) return std::nullopt;
    // (sum e^2 / n) / (M2 / n) with the counts cancelled.
    return squared_error_sum_ / target_moments_.m2();
}

double MetricAccumulator::mean_nll() const {
    return count_ == 0 ? 0.0 : nll_sum_ / static_cast<double>(count_);
}

}  // namespace dlgp
