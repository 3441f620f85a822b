#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fedrf/crypto.hpp"
#include "fedrf/forest.hpp"
#include "fedrf/rng.hpp"

namespace fedrf::data {

enum class ColumnType : uint8_t { kNumeric, kCoded };
enum class MissingPolicy : uint8_t { kReject, kImpute };

struct ColumnSpec {
  std::string name;
  ColumnType type = ColumnType::kNumeric;
  /// For kCoded columns: token -> integer code.  Tokens not in the map fall
  /// back to numeric parsing.
  std::map<std::string, double> value_map;
};

/// Label rule: either "column > threshold maps to +1" or
/// "column equals token maps to +1".
struct LabelRule {
  std::string column;
  std::optional<double> greater_than;
  std::optional<std::string> equals;
};

struct DatasetSchema {
  std::string name;
  LabelRule label;
  std::vector<ColumnSpec> features;
  MissingPolicy missing = MissingPolicy::kReject;
  std::string missing_token = "?";

  static DatasetSchema from_json_file(const std::string& path);
  static DatasetSchema from_json_text(const std::string& text);
};

struct Dataset {
  std::string name;
  std::vector<std::string> feature_names;
  forest::Shard samples;  // features at fixed-point scale S
  size_t n_features() const { return feature_names.size(); }
};

/// Loads a header-carrying CSV per schema.  Features are fixed-point encoded
/// at the system scale; labels are mapped to {-1, +1}.  Missing values are
/// rejected or median-imputed per the schema policy.
Dataset load_dataset(const std::string& csv_path, const DatasetSchema& schema,
                     const crypto::SystemParams& params);

struct SplitResult {
  std::vector<forest::Shard> shards;  // disjoint, from the 2/3 training split
  forest::Shard validation;           // |D_val| samples from the held-out 1/3
  forest::Shard test;                 // the entire held-out 1/3
  size_t shard_size = 0;
};

/// Deterministic shuffle-and-split: 2/3 training pool carved into n disjoint
/// shards, validation and test from the remaining 1/3.  shard_size 0 selects
/// min(100, train_pool/n).
///
/// `skew` in [0,1] reproduces the non-i.i.d. island setting: 0 deals the
/// training pool uniformly, larger values band the shards along the first
/// feature so each island sees a shifted subpopulation.
SplitResult split_dataset(const Dataset& ds, int n_shards, size_t shard_size, size_t val_size,
                          uint64_t seed, double skew = 0.0);

}  // namespace fedrf::data
