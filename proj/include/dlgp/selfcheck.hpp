#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dlgp {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Deterministic property checks over randomized inputs, runnable from the CLI.
// Each check embeds its own oracle: the dense exact GP, the batch refit, or
// the unpruned mixture enumeration.

// Pre-division trees match the dense exact GP to 1e-8 relative.
CheckResult check_oracle_equivalence(std::uint64_t seed);
// A model grown by rank-one insertions matches a batch fit to 1e-9.
CheckResult check_rank_one_consistency(std::uint64_t seed);
// Marginal leaf probabilities sum to 1 within 1e-12 on a deep tree.
CheckResult check_probability_normalization(std::uint64_t seed);
// Pruned and unpruned predictions agree within 1e-12 across tree states.
CheckResult check_pruning_soundness(std::uint64_t seed);
// The mixture variance matches its spread reformulation within 1e-10 and is
// non-negative.
CheckResult check_mixture_algebra(std::uint64_t seed);

std::vector<CheckResult> run_selfcheck(std::uint64_t seed);

}  // namespace dlgp
