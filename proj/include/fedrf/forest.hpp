#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedrf/crypto.hpp"
#include "fedrf/rng.hpp"

namespace fedrf::forest {

/// One record: feature values at fixed-point scale S, binary label in {-1,+1}.
struct Sample {
  std::vector<int64_t> features;
  int label = 1;
};

using Shard = std::vector<Sample>;

/// Tree node; split nodes route "feature < split_value" to the left child.
/// Feature ids are 1-based.
struct TreeNode {
  int index = 0;
  bool is_leaf = false;
  int feature_id = 0;       // splits only, in [1, n_features]
  int64_t split_value = 0;  // splits only, SCALED
  int label = 0;            // leaves only, in {-1, +1}
  int left = -1;
  int right = -1;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // rooted at index 0
  int height() const;
  int internal_node_count() const;
};

struct RandomForest {
  std::vector<DecisionTree> trees;
};

struct TrainParams {
  int max_height = 4;
  int min_samples_split = 2;
  /// Candidate features per split; 0 means ceil(sqrt(n_features)).
  int features_per_split = 0;
};

/// CART with Gini impurity.  Deterministic for a fixed stream: integer
/// thresholds at (a+b+1)/2 between consecutive distinct values, exact
/// integer gain comparison, first-best tie-breaking.
DecisionTree train_tree(const Shard& shard, const TrainParams& params, Rng& rng);

/// Bootstrap-resampled trees with per-split feature subsampling.
RandomForest train_forest(const Shard& shard, int n_trees, const TrainParams& params, Rng& rng);

int predict_tree(const DecisionTree& tree, std::span<const int64_t> features);

struct ForestPrediction {
  int vote_sum = 0;
  int n_trees = 0;
  int label = 1;  // sign rule: vote_sum >= 0 predicts +1
  double score() const { return n_trees == 0 ? 0.0 : static_cast<double>(vote_sum) / n_trees; }
};

ForestPrediction predict_forest(const RandomForest& forest, std::span<const int64_t> features);

/// Encrypted node: same topology and plaintext feature id, weight ciphertext
/// under the owning key (split values SCALED, leaf labels UNIT).
struct EncTreeNode {
  int index = 0;
  bool is_leaf = false;
  int feature_id = 0;
  crypto::Ciphertext weight;
  crypto::ScaleTag tag = crypto::ScaleTag::kUnit;
  int left = -1;
  int right = -1;
};

struct EncryptedTree {
  std::string key_id;
  std::vector<EncTreeNode> nodes;
};

struct EncryptedForest {
  std::string key_id;
  std::vector<EncryptedTree> trees;
  size_t node_count() const;
};

/// Encrypts every split value and leaf label from the root down.  With
/// `parallel` the per-tree work is spread across OpenMP threads; the output
/// is identical either way because node streams are derived per index.
EncryptedForest encrypt_forest(const crypto::SystemParams& params, const crypto::PublicKey& pk,
                               const RandomForest& forest, Rng& rng, bool parallel = false);

/// Full decryption with the owning key (audit/oracle use).
RandomForest decrypt_forest(const crypto::SystemParams& params, const crypto::KeyPair& key,
                            const EncryptedForest& enc);

/// Structured text dump: one node per line (index, kind, id, value/label,
/// children).  Roundtrips exactly.
std::string serialize_forest(const RandomForest& forest);
RandomForest parse_forest(const std::string& text);

}  // namespace fedrf::forest
