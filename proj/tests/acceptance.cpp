// Acceptance suite: one pass/fail line per criterion.
//
//   1. crypto correctness (512-bit keys, 1000-trial property suites)
//   2. protocol oracle equivalence (500 random pairs, exhaustive SCOM grid)
//   3. encrypted-vs-plaintext pipeline equivalence (20 random small configs)
//   4. clean-accuracy reproduction on both bundled datasets
//   5. attack effect (accuracy drop and MSE monotonicity in beta)
//   6. defense effectiveness (bands, exclusions, quality triple)
//   7. complexity shapes from the protocol counters
//   8. experiment determinism (byte-identical metrics CSV)
//
// Run with no arguments for all criteria or --criterion N for one.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fedrf/errors.hpp"
#include "fedrf/experiment.hpp"
#include "support/oracle.hpp"

using namespace fedrf;

#ifndef FEDRF_DATA_DIR
#define FEDRF_DATA_DIR "data"
#endif

namespace {

double now_s() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string data_path(const char* name) { return std::string(FEDRF_DATA_DIR) + "/" + name; }

harness::ExperimentConfig heart_base(unsigned key_bits) {
  harness::ExperimentConfig cfg;
  cfg.dataset_csv = data_path("heart.csv");
  cfg.schema_json = data_path("heart.schema.json");
  cfg.n_dis = 3;
  cfg.trees = 30;
  cfg.height = 4;
  cfg.key_bits = key_bits;
  cfg.val_size = 100;
  cfg.theta = 80.0;
  cfg.parallel = true;
  return cfg;
}

const data::Dataset& heart_dataset() {
  static data::Dataset ds = [] {
    crypto::SystemParams params = crypto::keygen_system(128, 1);
    auto schema = data::DatasetSchema::from_json_file(data_path("heart.schema.json"));
    return data::load_dataset(data_path("heart.csv"), schema, params);
  }();
  return ds;
}

// ---------------------------------------------------------------- criterion 1

bool criterion1(std::string& detail) {
  double start = now_s();
  crypto::SystemParams params = crypto::keygen_system(512, 42);
  crypto::KeyPair key = crypto::keygen_party(params, "pk", 1);
  Rng rng(7);
  const int64_t bound = params.domain_bound;
  size_t failures = 0;

  auto rand_m = [&](int64_t limit) {
    return static_cast<int64_t>(rng.below(static_cast<uint64_t>(2 * limit + 1))) - limit;
  };
  auto enc_i = [&](int64_t v) {
    return crypto::enc(params, key.pk, crypto::PlainScalar{v, crypto::ScaleTag::kUnit}, rng);
  };
  auto dec_i = [&](const crypto::Ciphertext& ct) {
    return crypto::dec(params, key, ct, crypto::ScaleTag::kUnit).value;
  };

  for (int i = 0; i < 1000; i++) {  // roundtrip
    int64_t m = rand_m(bound);
    if (dec_i(enc_i(m)) != m) failures++;
  }
  for (int i = 0; i < 1000; i++) {  // additive homomorphism
    int64_t a = rand_m(bound / 2), b = rand_m(bound / 2);
    if (dec_i(crypto::ct_add(params, enc_i(a), enc_i(b))) != a + b) failures++;
  }
  for (int i = 0; i < 1000; i++) {  // scalar law
    int64_t m = rand_m(1000000);
    auto k = static_cast<int64_t>(rng.below(201)) - 100;
    if (dec_i(crypto::ct_scalar_mul(params, enc_i(m), k)) != k * m) failures++;
  }
  for (int i = 0; i < 1000; i++) {  // negation via N-1
    int64_t m = rand_m(bound);
    if (dec_i(crypto::ct_scalar_mul(params, enc_i(m), params.n - Bigint(1))) != -m) failures++;
  }
  for (int i = 0; i < 1000; i++) {  // split decryption == full decryption
    int64_t m = rand_m(bound);
    crypto::Ciphertext ct = enc_i(m);
    crypto::PlainScalar via_shares =
        crypto::wdec(params, crypto::sdec(params, key.share1, ct),
                     crypto::sdec(params, key.share2, ct), crypto::ScaleTag::kUnit);
    if (via_shares.value != m || via_shares.value != dec_i(ct)) failures++;
  }
  std::set<std::string> fresh;  // probabilistic encryption
  for (int i = 0; i < 100; i++) fresh.insert(enc_i(99).a.to_hex());
  if (fresh.size() != 100) failures++;

  double elapsed = now_s() - start;
  std::ostringstream out;
  out << "512-bit keys, 5x1000 trials + 100 freshness trials, " << failures << " failures, "
      << static_cast<int>(elapsed) << "s";
  detail = out.str();
  return failures == 0 && elapsed < 120.0;
}

// ---------------------------------------------------------------- criterion 2

bool criterion2(std::string& detail) {
  double start = now_s();
  crypto::KeyMaterial km = sim::generate_key_material(512, 2, 3);
  sim::PartySet parties = sim::PartySet::distribute(km, 2, "DI_1");
  proto::ProtocolStats stats;
  proto::SecureCompute engine(parties, nullptr, &stats, 11);
  Rng rng(5);
  size_t failures = 0;

  const char* keys[] = {"pk_DI_1", "pk_DI_2", "pk_u"};
  auto enc_under = [&](const char* kid, int64_t v) {
    return crypto::enc(km.params, km.pair(kid).pk,
                       crypto::PlainScalar{v, crypto::ScaleTag::kUnit}, rng);
  };
  auto dec_common = [&](const crypto::Ciphertext& ct) {
    return crypto::dec(km.params, km.pair(sim::kCommonKeyId), ct, crypto::ScaleTag::kUnit).value;
  };

  for (int i = 0; i < 500; i++) {  // STRA
    auto m = static_cast<int64_t>(rng.below(2000001)) - 1000000;
    const char* kid = keys[static_cast<size_t>(i) % 3];
    auto out = engine.stra(proto::Phase::kAdhoc, "a2/stra/" + std::to_string(i),
                           enc_under(kid, m), sim::kCommonKeyId);
    if (dec_common(out) != m) failures++;
  }
  for (int i = 0; i < 500; i++) {  // SADD
    auto a = static_cast<int64_t>(rng.below(1000001)) - 500000;
    auto b = static_cast<int64_t>(rng.below(1000001)) - 500000;
    auto out = engine.sadd(proto::Phase::kAdhoc, "a2/sadd/" + std::to_string(i),
                           enc_under(keys[i % 3], a), enc_under(keys[(i + 1) % 3], b));
    if (dec_common(out) != a + b) failures++;
  }
  for (int i = 0; i < 500; i++) {  // SMUL
    auto a = static_cast<int64_t>(rng.below(2001)) - 1000;
    auto b = static_cast<int64_t>(rng.below(2001)) - 1000;
    auto out = engine.smul(proto::Phase::kAdhoc, "a2/smul/" + std::to_string(i),
                           enc_under(keys[i % 3], a), enc_under(keys[(i + 1) % 3], b));
    if (dec_common(out) != a * b) failures++;
  }
  int grid = 0;
  for (int a = -10; a <= 10; a++) {  // SCOM exhaustive grid, equality -> 0
    for (int b = -10; b <= 10; b++) {
      int res = engine.scom(proto::Phase::kAdhoc, "a2/scom/" + std::to_string(grid++),
                            enc_under("pk_DI_1", a), enc_under("pk_u", b));
      if (res != (a >= b ? 0 : 1)) failures++;
    }
  }
  double elapsed = now_s() - start;
  std::ostringstream out;
  out << "500x STRA/SADD/SMUL + " << grid << " SCOM grid points, " << failures << " mismatches, "
      << static_cast<int>(elapsed) << "s";
  detail = out.str();
  return failures == 0 && elapsed < 300.0;
}

// ---------------------------------------------------------------- criterion 3

bool criterion3(std::string& detail) {
  Rng gen(2024);
  size_t mismatches = 0;
  int configs = 20;
  for (int c = 0; c < configs; c++) {
    harness::ExperimentConfig cfg;
    cfg.dataset_csv = data_path("heart.csv");
    cfg.schema_json = data_path("heart.schema.json");
    cfg.n_dis = 1 + static_cast<int>(gen.below(3));
    cfg.trees = 1 + static_cast<int>(gen.below(5));
    cfg.height = 1 + static_cast<int>(gen.below(3));
    cfg.key_bits = 256;
    cfg.shard_size = 30 + gen.below(21);
    cfg.val_size = 5 + gen.below(16);
    cfg.theta = std::vector<double>{2.0, 5.0, 15.0, 50.0}[gen.below(4)];
    cfg.defense = gen.below(5) != 0;
    cfg.non_iid_skew = gen.below(2) == 0 ? 0.0 : 0.5;
    cfg.test_cap = 10;
    cfg.seed = 1000 + static_cast<uint64_t>(c);
    if (cfg.n_dis > 1 && gen.below(2) == 0) {
      attack::AttackConfig atk;
      atk.alpha = gen.below(2) == 0 ? attack::Fraction{1, 3} : attack::Fraction{2, 3};
      atk.beta = attack::Fraction{static_cast<int64_t>(3 + 2 * gen.below(4)), 10};
      cfg.attack = atk;
    }
    harness::OracleCapture capture;
    harness::ExperimentResult secure;
    try {
      secure = harness::run_experiment(cfg, nullptr, &capture);
    } catch (const EmptyFederationError&) {
      // the plaintext route must agree that everything was rejected
      oracle::OracleExperiment plain = oracle::oracle_experiment(cfg, heart_dataset());
      if (!plain.kept.empty()) mismatches++;
      continue;
    }
    oracle::OracleExperiment plain = oracle::oracle_experiment(cfg, heart_dataset());
    if (plain.kept != secure.kept) mismatches++;
    if (plain.n_test != secure.n_test) mismatches++;
    if (plain.cls.accuracy != secure.cls.accuracy) mismatches++;
    // per-sample classes via the oracle pipeline
    oracle::PipelineResult pipeline = oracle::plaintext_pipeline(
        capture.local_forests, [&] {
          std::vector<int> ids;
          for (int i = 1; i <= cfg.n_dis; i++) ids.push_back(i);
          return ids;
        }(),
        capture.validation, capture.test,
        static_cast<int64_t>(cfg.theta * cfg.trees * cfg.trees), cfg.defense);
    for (size_t k = 0; k < capture.predictions.size(); k++) {
      if (capture.predictions[k] != pipeline.predictions[k]) mismatches++;
      if (capture.vote_sums[k] != pipeline.vote_sums[k]) mismatches++;
    }
  }
  std::ostringstream out;
  out << configs << " random small configs, " << mismatches << " mismatches";
  detail = out.str();
  return mismatches == 0;
}

// ---------------------------------------------------------------- criterion 4

struct SeedRuns {
  std::vector<double> accuracy;
  double mean() const {
    double s = 0;
    for (double a : accuracy) s += a;
    return s / static_cast<double>(accuracy.size());
  }
};

const SeedRuns& heart_clean_runs() {
  static SeedRuns runs = [] {
    SeedRuns r;
    for (uint64_t seed = 1; seed <= 5; seed++) {
      harness::ExperimentConfig cfg = heart_base(512);
      cfg.defense = false;
      cfg.seed = seed;
      r.accuracy.push_back(harness::run_experiment(cfg).cls.accuracy);
    }
    return r;
  }();
  return runs;
}

bool criterion4(std::string& detail) {
  double start = now_s();
  double heart_mean = heart_clean_runs().mean();
  double heart_elapsed = now_s() - start;
  bool heart_ok = std::abs(heart_mean - 0.856) <= 0.06;

  start = now_s();
  SeedRuns thyroid;
  for (uint64_t seed = 1; seed <= 5; seed++) {
    harness::ExperimentConfig cfg;
    cfg.dataset_csv = data_path("thyroid.csv");
    cfg.schema_json = data_path("thyroid.schema.json");
    cfg.n_dis = 10;
    cfg.trees = 5;
    cfg.height = 4;
    cfg.key_bits = 512;
    cfg.val_size = 100;
    cfg.defense = false;
    cfg.test_cap = 200;
    cfg.parallel = true;
    cfg.seed = seed;
    thyroid.accuracy.push_back(harness::run_experiment(cfg).cls.accuracy);
  }
  double thyroid_mean = thyroid.mean();
  double thyroid_elapsed = now_s() - start;
  bool thyroid_ok = std::abs(thyroid_mean - 0.975) <= 0.06;

  std::ostringstream out;
  out << "heart mean " << static_cast<int>(heart_mean * 1000) / 10.0 << "% (target 85.6+-6, "
      << static_cast<int>(heart_elapsed) << "s), thyroid mean "
      << static_cast<int>(thyroid_mean * 1000) / 10.0 << "% (target 97.5+-6, "
      << static_cast<int>(thyroid_elapsed) << "s)";
  detail = out.str();
  return heart_ok && thyroid_ok && heart_elapsed < 900.0 && thyroid_elapsed < 900.0;
}

// ---------------------------------------------------------------- criterion 5

int poisoned_island(const harness::ExperimentConfig& cfg) {
  Rng atk_rng = Rng(cfg.seed).split("attack");
  return attack::select_malicious(cfg.n_dis, cfg.attack->alpha, atk_rng)[0];
}

bool criterion5(std::string& detail) {
  double clean_mean = heart_clean_runs().mean();

  // accuracy at beta=0.9, alpha=1/3, defense off (secure runs)
  SeedRuns tainted;
  for (uint64_t seed = 1; seed <= 5; seed++) {
    harness::ExperimentConfig cfg = heart_base(512);
    cfg.defense = false;
    cfg.seed = seed;
    cfg.attack = attack::AttackConfig{{1, 3}, {9, 10}, 0, {}};
    tainted.accuracy.push_back(harness::run_experiment(cfg).cls.accuracy);
  }
  double drop = clean_mean - tainted.mean();
  bool drop_ok = drop >= 0.05;

  // plaintext MSE of the poisoned island, mean over seeds, per beta
  std::vector<double> mse_mean(5, 0.0);
  for (uint64_t seed = 1; seed <= 5; seed++) {
    for (int bi = 0; bi < 5; bi++) {
      harness::ExperimentConfig cfg = heart_base(512);
      cfg.seed = seed;
      cfg.attack = attack::AttackConfig{{1, 3}, {1 + 2 * bi, 10}, 0, {}};
      oracle::OracleExperiment plain = oracle::oracle_experiment(cfg, heart_dataset());
      mse_mean[static_cast<size_t>(bi)] +=
          static_cast<double>(plain.mse_scaled[static_cast<size_t>(poisoned_island(cfg) - 1)]) /
          5.0;
    }
  }
  bool monotone = true;
  for (size_t i = 0; i + 1 < mse_mean.size(); i++) {
    if (mse_mean[i + 1] < mse_mean[i]) monotone = false;
  }

  std::ostringstream out;
  out << "accuracy drop " << static_cast<int>(drop * 1000) / 10.0
      << "pp (need >=5), poisoned-island mean MSE/t^2 by beta:";
  for (double m : mse_mean) out << " " << static_cast<int>(m / 900.0);
  out << (monotone ? " (non-decreasing)" : " (NOT monotone)");
  detail = out.str();
  return drop_ok && monotone;
}

// ---------------------------------------------------------------- criterion 6

bool criterion6(std::string& detail) {
  double clean_mean = heart_clean_runs().mean();
  bool bands_ok = true;
  bool exclusions_ok = true;
  int excluded = 0, exclusion_runs = 0;
  double worst_gap = 0.0;
  std::ostringstream misses;

  SeedRuns triple_acc, triple_rec, triple_spec;
  for (attack::Fraction alpha : {attack::Fraction{1, 3}, attack::Fraction{2, 3}}) {
    for (int b = 1; b <= 9; b += 2) {
      SeedRuns defended;
      for (uint64_t seed = 1; seed <= 5; seed++) {
        harness::ExperimentConfig cfg = heart_base(256);
        cfg.seed = seed;
        cfg.audit_mse = true;
        cfg.attack = attack::AttackConfig{alpha, {b, 10}, 0, {}};
        harness::ExperimentResult run = harness::run_experiment(cfg);
        defended.accuracy.push_back(run.cls.accuracy);
        if (alpha.num == 1 && b == 5) {
          triple_acc.accuracy.push_back(run.cls.accuracy);
          triple_rec.accuracy.push_back(run.cls.recall);
          triple_spec.accuracy.push_back(run.cls.specificity);
        }
        if (alpha.num == 1 && b >= 5) {
          exclusion_runs++;
          int poisoned = poisoned_island(cfg);
          bool kept = std::find(run.kept.begin(), run.kept.end(), poisoned) != run.kept.end();
          if (kept) {
            exclusions_ok = false;
            int64_t mse = 0;
            for (auto& [di, v] : run.audit_mse) {
              if (di == poisoned) mse = v;
            }
            misses << " [beta=0." << b << " seed=" << seed << " mse=" << mse << "<"
                   << run.theta_scaled << "]";
          } else {
            excluded++;
          }
        }
      }
      double gap = std::abs(defended.mean() - clean_mean);
      worst_gap = std::max(worst_gap, gap);
      if (gap > 0.03) bands_ok = false;
    }
  }
  bool triple_ok = std::abs(triple_acc.mean() - 0.845) <= 0.06 &&
                   std::abs(triple_rec.mean() - 0.868) <= 0.06 &&
                   std::abs(triple_spec.mean() - 0.820) <= 0.06;

  std::ostringstream out;
  out << "band worst gap " << static_cast<int>(worst_gap * 1000) / 10.0
      << "pp (<=3), alpha=1/3 beta>=0.5 exclusions " << excluded << "/" << exclusion_runs
      << misses.str() << ", beta=0.5 triple acc/rec/spec "
      << static_cast<int>(triple_acc.mean() * 1000) / 10.0 << "/"
      << static_cast<int>(triple_rec.mean() * 1000) / 10.0 << "/"
      << static_cast<int>(triple_spec.mean() * 1000) / 10.0 << " (84.5/86.8/82.0 +-6)";
  detail = out.str();
  return bands_ok && exclusions_ok && triple_ok;
}

// ---------------------------------------------------------------- criterion 7

bool criterion7(std::string& detail) {
  // aggregation STRA count == total kept node count
  harness::ExperimentConfig cfg = heart_base(128);
  cfg.trees = 4;
  cfg.val_size = 12;
  cfg.theta = 50.0;
  cfg.test_cap = 6;
  cfg.seed = 9;
  harness::OracleCapture capture;
  harness::ExperimentResult run = harness::run_experiment(cfg, nullptr, &capture);
  size_t kept_nodes = 0;
  for (int di : run.kept) {
    for (const auto& tree : capture.local_forests[static_cast<size_t>(di - 1)].trees) {
      kept_nodes += tree.nodes.size();
    }
  }
  bool agg_ok = run.stats_aggregation.stra == kept_nodes;

  // SCOM count per single-tree diagnosis bounded by the height
  crypto::KeyMaterial km = sim::generate_key_material(128, 1, 5);
  sim::PartySet parties = sim::PartySet::distribute(km, 1, "DI_1");
  proto::ProtocolStats stats;
  proto::SecureCompute engine(parties, nullptr, &stats, 3);
  Rng rng(8);
  forest::Shard shard;
  for (int i = 0; i < 60; i++) {
    forest::Sample s;
    for (int j = 0; j < 5; j++) s.features.push_back(static_cast<int64_t>(rng.below(2001)) - 1000);
    s.label = s.features[0] > 0 ? 1 : -1;
    shard.push_back(std::move(s));
  }
  forest::TrainParams tp;
  tp.max_height = 4;
  Rng train_rng(4);
  forest::RandomForest model = forest::train_forest(shard, 6, tp, train_rng);
  Rng enc_rng(6);
  forest::EncryptedForest enc_model =
      forest::encrypt_forest(km.params, km.pair("pk_DI_1").pk, model, enc_rng);
  bool path_ok = true;
  int max_comparisons = 0;
  for (int probe = 0; probe < 5; probe++) {
    std::vector<int64_t> x;
    for (int j = 0; j < 5; j++) x.push_back(static_cast<int64_t>(rng.below(2001)) - 1000);
    Rng req_rng(static_cast<uint64_t>(900 + probe));
    auto request = fed::encrypt_request(km.params, km.pair(sim::kUserKeyId).pk, x, req_rng);
    for (size_t t = 0; t < enc_model.trees.size(); t++) {
      uint64_t before = stats.snapshot(proto::Phase::kDiagnosis).scom;
      fed::PredictionOutcome out = fed::secure_prediction(
          engine, proto::Phase::kDiagnosis,
          "a7/" + std::to_string(probe) + "/" + std::to_string(t), enc_model.trees[t], request);
      uint64_t used = stats.snapshot(proto::Phase::kDiagnosis).scom - before;
      max_comparisons = std::max(max_comparisons, out.comparisons);
      if (out.comparisons > tp.max_height) path_ok = false;
      if (used != static_cast<uint64_t>(out.comparisons)) path_ok = false;
    }
  }

  std::ostringstream out;
  out << "aggregation STRA " << run.stats_aggregation.stra << " == kept nodes " << kept_nodes
      << "; per-tree SCOM max " << max_comparisons << " <= h=4";
  detail = out.str();
  return agg_ok && path_ok;
}

// ---------------------------------------------------------------- criterion 8

bool criterion8(std::string& detail) {
  harness::ExperimentConfig cfg = heart_base(128);
  cfg.trees = 5;
  cfg.val_size = 20;
  cfg.theta = 50.0;
  cfg.test_cap = 20;
  cfg.seed = 31;
  cfg.attack = attack::AttackConfig{{1, 3}, {1, 2}, 0, {}};
  cfg.audit_mse = true;

  proto::TranscriptLog log_a, log_b;
  harness::ExperimentResult a = harness::run_experiment(cfg, &log_a);
  harness::ExperimentResult b = harness::run_experiment(cfg, &log_b);
  std::string row_a = harness::metrics_csv_row(cfg, a);
  std::string row_b = harness::metrics_csv_row(cfg, b);
  std::ostringstream ta, tb;
  log_a.export_lines(ta);
  log_b.export_lines(tb);

  // parallel mode must reproduce the serial metrics too
  cfg.parallel = true;
  harness::ExperimentResult c = harness::run_experiment(cfg);
  cfg.parallel = false;
  std::string row_c = harness::metrics_csv_row(cfg, c);

  bool ok = row_a == row_b && ta.str() == tb.str() && row_a == row_c;
  std::ostringstream out;
  out << "metrics rows byte-identical: " << (row_a == row_b ? "yes" : "NO")
      << ", transcripts identical: " << (ta.str() == tb.str() ? "yes" : "NO")
      << ", parallel==serial: " << (row_a == row_c ? "yes" : "NO");
  detail = out.str();
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; i++) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);
  }
  struct Entry {
    int id;
    const char* name;
    bool (*fn)(std::string&);
  };
  Entry entries[] = {
      {1, "crypto correctness", criterion1},
      {2, "protocol oracle equivalence", criterion2},
      {3, "encrypted-vs-plaintext pipeline equivalence", criterion3},
      {4, "clean-accuracy reproduction", criterion4},
      {5, "attack effect", criterion5},
      {6, "defense effectiveness", criterion6},
      {7, "complexity shapes", criterion7},
      {8, "determinism", criterion8},
  };
  int failures = 0;
  for (const Entry& entry : entries) {
    if (only != 0 && entry.id != only) continue;
    std::string detail;
    bool ok = false;
    try {
      ok = entry.fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    printf("[%s] criterion %d: %s — %s\n", ok ? "PASS" : "FAIL", entry.id, entry.name,
           detail.c_str());
    fflush(stdout);
    if (!ok) failures++;
  }
  return failures;
}
