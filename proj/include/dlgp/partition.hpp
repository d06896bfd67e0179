#pragma once

#include <string>
#include <string_view>

#include "dlgp/types.hpp"

namespace dlgp {

// How the hyperplane position is picked along the split dimension.
enum class DivisionStrategy { Median, Mean, Midrange };

DivisionStrategy parse_strategy(std::string_view name);
std::string strategy_name(DivisionStrategy strategy);

// One internal node's axis-aligned soft split: points below position - overlap/2
// belong to the low child with certainty, points above position + overlap/2 to
// the high child, and the band in between ramps linearly.
class DivisionRule {
public:
    DivisionRule(Index split_dim, double position, double overlap);

    Index split_dim() const { return split_dim_; }
    double position() const { return position_; }
    double overlap() const { return overlap_; }
    double low_edge() const { return low_; }
    double high_edge() const { return high_; }

    // Probability of routing to the high child; exactly 0/1 outside the band.
    double probability(double coordinate) const {
        if (overlap_ > 0.0) {
            if (coordinate < low_) return 0.0;
            if (coordinate > high_) return 1.0;
            const double p = (coordinate - position_) / overlap_ + 0.5;
            return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
        }
        // Degenerate band: hard split, unbiased at the hyperplane itself.
        if (coordinate < position_) return 0.0;
        if (coordinate > position_) return 1.0;
        return 0.5;
    }

    double probability(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    // Inclusive band membership; empty by definition when overlap is zero.
    bool in_band(double coordinate) const {
        return overlap_ > 0.0 && coordinate >= low_ && coordinate <= high_;
    }

private:
    Index split_dim_;
    double position_;
    double overlap_;
    double low_;
    double high_;
};

// Builds the division rule for a leaf's points: split along the dimension of
// largest width, position the hyperplane by the strategy, and set the band
// width to theta times the width of the split dimension. All-identical points
// degenerate to a zero-width band at the common value on dimension 0.
DivisionRule compute_rule(const Eigen::Ref<const RowMatrix>& points, double theta,
                          DivisionStrategy strategy);

}  // namespace dlgp
