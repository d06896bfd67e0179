#pragma once

#include <filesystem>
#include <string>

#include "dlgp/tree.hpp"

namespace dlgp {

// Versioned JSON tree snapshot: settings, hyperparameters, counters, RNG
// state, division rules, and per-leaf training data with the exact Cholesky
// factor and weights. Doubles round-trip exactly, so a restored tree resumes
// a stream bit-identically.
std::string snapshot_to_json(const DlgpTree& tree);
DlgpTree snapshot_from_json(const std::string& text);

void save_snapshot(const DlgpTree& tree, const std::filesystem::path& path);
DlgpTree load_snapshot(const std::filesystem::path& path);

}  // namespace dlgp
