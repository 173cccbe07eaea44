// Run configuration: a sectioned key/value config file (TOML subset) parsed
// into a RunConfig, plus the canonical JSON serialization whose FNV-1a hash
// names runs and is stored in checkpoints.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mgcast/data.hpp"
#include "mgcast/model.hpp"
#include "mgcast/train.hpp"

namespace mgcast {

// ---- config file surface ----

struct ConfigValue {
    std::variant<std::int64_t, double, bool, std::string, std::vector<ConfigValue>> v;

    bool is_int() const { return std::holds_alternative<std::int64_t>(v); }
    bool is_float() const { return std::holds_alternative<double>(v); }
    bool is_bool() const { return std::holds_alternative<bool>(v); }
    bool is_string() const { return std::holds_alternative<std::string>(v); }
    bool is_array() const { return std::holds_alternative<std::vector<ConfigValue>>(v); }
};

// Flat "section.key" -> value map in file order. Throws ConfigError with a
// line number on any syntax problem.
std::map<std::string, ConfigValue> parse_config_text(const std::string& text);
std::map<std::string, ConfigValue> parse_config_file(const std::string& path);

// ---- run configuration ----

struct DatasetConfig {
    std::string kind = "csv";  // "csv" or "synthetic-two-tone"
    std::string preset;        // optional name from dataset_preset()
    std::string path;          // csv path; resolved against MGCAST_DATA_DIR as fallback
    bool date_column = true;
    std::size_t synthetic_len = 2000;
};

struct RunConfig {
    DatasetConfig dataset;
    ModelConfig model;
    TrainConfig train;
    SplitSpec split;
    std::string out_dir = "runs";

    void validate() const;
};

RunConfig run_config_from_file(const std::string& path);
RunConfig run_config_from_map(const std::map<std::string, ConfigValue>& kv);

// Canonical serialization: fixed key set, sorted keys, shortest round-trip
// numbers. Excludes out_dir so the hash identifies the experiment, not
// where its artifacts land.
std::string canonical_config_json(const RunConfig& run);
RunConfig run_config_from_json(const std::string& json_text);

std::uint64_t fnv1a64(const std::string& bytes);
std::uint64_t config_hash(const RunConfig& run);
std::string config_hash_hex(const RunConfig& run);

}  // namespace mgcast
