#include "dlgp/dataio.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>
#include <system_error>

#include <json.hpp>

#include "dlgp/errors.hpp"

namespace dlgp {

namespace {

// Splits one CSV line on commas; no quoting, matching the numeric-only format.
std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

bool parse_double(std::string_view field, double& out) {
    field = trim(field);
    if (field.empty()) return false;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc{} && ptr == field.data() + field.size();
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, Index input_cols, Index target_cols) {
    if (input_cols < 1) throw ConfigError("input column count must be >= 1");
    if (target_cols < 1) throw ConfigError("target column count must be >= 1");
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());

    const Index cols = input_cols + target_cols;
    std::vector<double> values;
    std::string line;
    std::size_t file_row = 0;
    std::size_t data_rows = 0;
    bool first_content_row = true;
    while (std::getline(in, line)) {
        ++file_row;
        const std::string_view stripped = trim(line);
        if (stripped.empty()) continue;

        const auto fields = split_fields(stripped);
        if (first_content_row) {
            first_content_row = false;
            // Header auto-detection: skip the first row when any field is
            // non-numeric.
            bool numeric = static_cast<Index>(fields.size()) == cols;
            double probe = 0.0;
            for (const auto f : fields)
                if (!parse_double(f, probe)) numeric = false;
            if (!numeric) {
                if (static_cast<Index>(fields.size()) != cols)
                    throw ParseError("expected " + std::to_string(cols) + " columns, found " +
                                         std::to_string(fields.size()),
                                     file_row, 1);
                continue;
            }
        }
        if (static_cast<Index>(fields.size()) != cols)
            throw ParseError("expected " + std::to_string(cols) + " columns, found " +
                                 std::to_string(fields.size()),
                             file_row, fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) {
            double v = 0.0;
            if (!parse_double(fields[c], v))
                throw ParseError("not a number: \"" + std::string(fields[c]) + "\"", file_row,
                                 c + 1);
            if (!std::isfinite(v))
                throw ParseError("non-finite value", file_row, c + 1);
            values.push_back(v);
        }
        ++data_rows;
    }

    Dataset data;
    data.inputs.resize(static_cast<Index>(data_rows), input_cols);
    data.targets.resize(static_cast<Index>(data_rows), target_cols);
    for (std::size_t r = 0; r < data_rows; ++r) {
        const double* row = values.data() + r * static_cast<std::size_t>(cols);
        for (Index c = 0; c < input_cols; ++c) data.inputs(static_cast<Index>(r), c) = row[c];
        for (Index c = 0; c < target_cols; ++c)
            data.targets(static_cast<Index>(r), c) = row[input_cols + c];
    }
    return data;
}

void save_csv(const std::filesystem::path& path, const Dataset& data) {
    if (data.inputs.rows() != data.targets.rows())
        throw DimensionError("dataset row counts differ");
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    char buf[64];
    const auto write_value = [&](double v) {
        const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
        out.write(buf, res.ptr - buf);
    };
    for (Index r = 0; r < data.rows(); ++r) {
        for (Index c = 0; c < data.input_dim(); ++c) {
            if (c > 0) out.put(',');
            write_value(data.inputs(r, c));
        }
        for (Index c = 0; c < data.target_dim(); ++c) {
            out.put(',');
            write_value(data.targets(r, c));
        }
        out.put('\n');
    }
    if (!out) throw Error("write failed for " + path.string());
}

void ExperimentConfig::validate() const {
    if (input_dim < 1) throw ConfigError("input_dim must be >= 1");
    if (targets.empty()) throw ConfigError("targets must contain at least one entry");
    if (capacity < 2) throw ConfigError("capacity must be >= 2");
    if (!(theta >= 0.0) || !std::isfinite(theta)) throw ConfigError("theta must be >= 0");
    if (checkpoints < 1) throw ConfigError("checkpoints must be >= 1");
    for (std::size_t t = 0; t < targets.size(); ++t) {
        try {
            targets[t].validate();
        } catch (const ConfigError& e) {
            throw ConfigError("targets[" + std::to_string(t) + "]." + e.what());
        }
        if (targets[t].input_dim() != input_dim)
            throw ConfigError("targets[" + std::to_string(t) +
                              "].lengthscales length must equal input_dim");
    }
}

namespace {

using nlohmann::json;

template <typename T>
T require_field(const json& j, const char* name) {
    if (!j.contains(name)) throw ConfigError(std::string("missing field \"") + name + "\"");
    try {
        return j.at(name).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("field \"") + name + "\" has the wrong type");
    }
}

template <typename T>
T optional_field(const json& j, const char* name, T fallback) {
    if (!j.contains(name)) return fallback;
    try {
        return j.at(name).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("field \"") + name + "\" has the wrong type");
    }
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }

    ExperimentConfig cfg;
    cfg.input_dim = require_field<Index>(j, "input_dim");
    cfg.capacity = optional_field<Index>(j, "capacity", cfg.capacity);
    cfg.theta = optional_field<double>(j, "theta", cfg.theta);
    cfg.strategy = parse_strategy(optional_field<std::string>(j, "strategy", "mean"));
    cfg.seed = optional_field<std::uint64_t>(j, "seed", cfg.seed);
    cfg.checkpoints = optional_field<int>(j, "checkpoints", cfg.checkpoints);
    cfg.report_path = optional_field<std::string>(j, "report_path", "");

    if (!j.contains("targets")) throw ConfigError("missing field \"targets\"");
    if (!j.at("targets").is_array()) throw ConfigError("field \"targets\" must be an array");
    for (std::size_t t = 0; t < j.at("targets").size(); ++t) {
        const json& jt = j.at("targets")[t];
        Hyperparameters hp;
        try {
            hp.signal_variance = require_field<double>(jt, "signal_variance");
            const auto ls = require_field<std::vector<double>>(jt, "lengthscales");
            hp.lengthscales =
                Eigen::Map<const Eigen::VectorXd>(ls.data(), static_cast<Index>(ls.size()));
            hp.noise_variance = require_field<double>(jt, "noise_variance");
        } catch (const ConfigError& e) {
            throw ConfigError("targets[" + std::to_string(t) + "]: " + e.what());
        }
        cfg.targets.push_back(std::move(hp));
    }

    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

}  // namespace dlgp
