#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dlgp/kernel.hpp"
#include "dlgp/partition.hpp"
#include "dlgp/types.hpp"

namespace dlgp {

struct Dataset {
    RowMatrix inputs;   // N x d
    RowMatrix targets;  // N x m

    Index rows() const { return inputs.rows(); }
    Index input_dim() const { return inputs.cols(); }
    Index target_dim() const { return targets.cols(); }
};

// Comma-separated values, '.' decimal point, optional single header row
// (auto-detected when the first row is non-numeric). Row order is preserved;
// the stream order is the file order. Non-finite values are rejected.
Dataset load_csv(const std::filesystem::path& path, Index input_cols, Index target_cols);

// Writes with 17 significant digits so a reload is value-identical.
void save_csv(const std::filesystem::path& path, const Dataset& data);

struct ExperimentConfig {
    Index input_dim = 0;
    std::vector<Hyperparameters> targets;  // one entry per output dimension
    Index capacity = 100;
    double theta = 0.05;
    DivisionStrategy strategy = DivisionStrategy::Mean;
    std::uint64_t seed = 0;
    int checkpoints = 100;
    std::string report_path;  // empty means stdout

    Index target_dim() const { return static_cast<Index>(targets.size()); }

    // Throws ConfigError naming the offending field.
    void validate() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& json_text);

}  // namespace dlgp
