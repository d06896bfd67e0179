#include "dlgp/partition.hpp"

#include <algorithm>
#include <vector>

#include "dlgp/errors.hpp"

namespace dlgp {

DivisionStrategy parse_strategy(std::string_view name) {
    if (name == "median") return DivisionStrategy::Median;
    if (name == "mean") return DivisionStrategy::Mean;
    if (name == "midrange") return DivisionStrategy::Midrange;
    throw ConfigError("strategy must be one of \"median\", \"mean\", \"midrange\"; got \"" +
                      std::string(name) + "\"");
}

std::string strategy_name(DivisionStrategy strategy) {
    switch (strategy) {
        case DivisionStrategy::Median: return "median";
        case DivisionStrategy::Mean: return "mean";
        case DivisionStrategy::Midrange: return "midrange";
    }
    throw Error("unknown strategy");
}

DivisionRule::DivisionRule(Index split_dim, double position, double overlap)
    : split_dim_(split_dim),
      position_(position),
      overlap_(overlap),
      low_(position - overlap / 2.0),
      high_(position + overlap / 2.0) {
    if (split_dim < 0) throw Error("split dimension must be non-negative");
    if (!(overlap >= 0.0)) throw Error("overlap must be non-negative");
}

double DivisionRule::probability(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() <= split_dim_)
        throw DimensionError("input dimension does not cover the split dimension");
    return probability(x[split_dim_]);
}

DivisionRule compute_rule(const Eigen::Ref<const RowMatrix>& points, double theta,
                          DivisionStrategy strategy) {
    const Index n = points.rows();
    const Index d = points.cols();
    if (n < 2) throw Error("compute_rule requires at least two points");
    if (!(theta >= 0.0)) throw ConfigError("theta must be non-negative");

    Index split_dim = 0;
    double best_width = -1.0;
    double lo = 0.0;
    double hi = 0.0;
    for (Index j = 0; j < d; ++j) {
        const double mn = points.col(j).minCoeff();
        const double mx = points.col(j).maxCoeff();
        const double width = mx - mn;
        // Ties break toward the lowest dimension index.
        if (width > best_width) {
            best_width = width;
            split_dim = j;
            lo = mn;
            hi = mx;
        }
    }

    if (best_width == 0.0) return DivisionRule(0, points(0, 0), 0.0);

    double position = 0.0;
    switch (strategy) {
        case DivisionStrategy::Median: {
            std::vector<double> values(points.col(split_dim).begin(),
                                       points.col(split_dim).end());
            const auto mid = values.begin() + (n - 1) / 2;  // lower median
            std::nth_element(values.begin(), mid, values.end());
            position = *mid;
            break;
        }
        case DivisionStrategy::Mean:
            position = points.col(split_dim).sum() / static_cast<double>(n);
            break;
        case DivisionStrategy::Midrange:
            position = 0.5 * (lo + hi);
            break;
    }
    return DivisionRule(split_dim, position, theta * best_width);
}

}  // namespace dlgp
