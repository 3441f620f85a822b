#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fedrf/attack.hpp"
#include "fedrf/dataset.hpp"
#include "fedrf/federated.hpp"
#include "fedrf/metrics.hpp"
#include "fedrf/party.hpp"
#include "fedrf/protocols.hpp"

namespace fedrf::harness {

/// One full simulated run: key distribution, optional poisoning, local
/// training, model encryption, defense or plain aggregation, and diagnosis
/// of the test pool as user requests.
struct ExperimentConfig {
  std::string dataset_csv;
  std::string schema_json;
  int n_dis = 3;
  size_t shard_size = 0;  // 0: min(100, train_pool / n_dis)
  int trees = 30;         // t per island
  int height = 4;         // h
  unsigned key_bits = 512;
  size_t val_size = 100;  // |D_val|
  double non_iid_skew = 0.5;  // island heterogeneity, 0 = uniform deal
  double theta = 80.0;
  bool defense = true;
  std::optional<attack::AttackConfig> attack;
  uint64_t seed = 1;
  size_t test_cap = 0;  // 0: diagnose the whole held-out pool
  bool parallel = false;
  int defense_helper = 1;  // island holding share 2 of the common key
  bool audit_mse = false;  // decrypt per-island MSE into metrics/report
  bool run_diagnosis = true;  // defend-only runs skip the request replay

  void validate() const;
};

struct PhaseTiming {
  std::string phase;
  double ms = 0.0;
};

struct ExperimentResult {
  std::string dataset_name;
  size_t shard_size = 0;
  size_t n_test = 0;
  ClassificationMetrics cls;
  int n_star = 0;
  std::vector<int> kept;
  std::vector<int> dropped;
  std::vector<std::pair<int, int64_t>> audit_mse;  // (island, scaled MSE)
  int64_t theta_scaled = 0;
  proto::StatsSnapshot stats_aggregation;
  proto::StatsSnapshot stats_defense;
  proto::StatsSnapshot stats_diagnosis;
  std::string poison_report;
  std::string defense_report;
  std::vector<int> predictions;    // DU-revealed label per test request
  std::vector<int64_t> vote_sums;  // DU-decoded vote sum per test request
  std::vector<PhaseTiming> timings;  // wall clock, never part of the metrics CSV
};

/// Shadow copies for oracle tests: trained plaintext forests, the exact
/// shards/splits, key material, and the per-request outcomes.  Reachable
/// only through this capture object, which the secure pipeline itself never
/// reads.
struct OracleCapture {
  crypto::KeyMaterial keys;
  std::vector<forest::Shard> shards;  // post-attack
  forest::Shard validation;
  forest::Shard test;
  std::vector<forest::RandomForest> local_forests;  // island order 1..n
  std::vector<int> predictions;                     // DU-revealed labels
  std::vector<int64_t> vote_sums;
};

ExperimentResult run_experiment(const ExperimentConfig& config,
                                proto::TranscriptLog* transcript = nullptr,
                                OracleCapture* capture = nullptr);

/// Deterministic CSV: configuration echo plus all metrics; excludes wall
/// clock so repeated runs are byte-identical.
std::string metrics_csv_header();
std::string metrics_csv_row(const ExperimentConfig& config, const ExperimentResult& result);
std::string timing_csv(const ExperimentResult& result);

}  // namespace fedrf::harness
