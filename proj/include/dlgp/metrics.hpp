#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace dlgp {

// MSE normalized by the population variance of the targets. A constant
// predictor at the target mean scores exactly 1.
double nmse(std::span<const double> predictions, std::span<const double> targets);

// Per-point negative log-likelihood of y under N(mean, variance + noise_variance).
// Observation noise is added because test targets are noisy measurements.
double gaussian_nll(double y, double mean, double variance, double noise_variance);

double population_variance(std::span<const double> values);

// O_D: fraction of points lying inside the overlap band at division time,
// accumulated over all divisions. Missing until the first division.
std::optional<double> overlap_ratio(std::int64_t overlap_point_count,
                                    std::int64_t division_count, std::int64_t capacity);

// Streaming mean and second central moment (Welford).
class RunningMoments {
public:
    void add(double x) {
        ++count_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(count_);
        m2_ += delta * (x - mean_);
    }

    std::int64_t count() const { return count_; }
    double mean() const { return mean_; }
    double m2() const { return m2_; }
    double population_variance() const {
        return count_ > 0 ? m2_ / static_cast<double>(count_) : 0.0;
    }

private:
    std::int64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

// Moving average over the last `window` samples.
class MovingAverage {
public:
    explicit MovingAverage(std::size_t window);

    void add(double x);
    std::int64_t count() const { return total_; }
    // Mean of the last min(count, window) samples; 0 while empty.
    double value() const;

private:
    std::vector<double> buffer_;
    std::size_t next_ = 0;
    std::size_t filled_ = 0;
    std::int64_t total_ = 0;
    double sum_ = 0.0;
};

// Online evaluation state for the streaming scenario: cumulative nMSE over the
// streaming target variance, cumulative mean NLL, and moving-average timings.
class MetricAccumulator {
public:
    explicit MetricAccumulator(std::size_t timing_window = 1000);

    void observe(double y, double mean, double variance, double noise_variance,
                 double update_time, double predict_time);

    std::int64_t count() const { return count_; }
    // Missing while the streaming target variance is zero.
    std::optional<double> online_nmse() const;
    double mean_nll() const;
    double smoothed_update_time() const { return update_times_.value(); }
    double smoothed_predict_time() const { return predict_times_.value(); }

private:
    std::int64_t count_ = 0;
    double squared_error_sum_ = 0.0;
    double nll_sum_ = 0.0;
    RunningMoments target_moments_;
    MovingAverage update_times_;
    MovingAverage predict_times_;
};

}  // namespace dlgp
