#include "fedrf/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>

#include "fedrf/errors.hpp"
#include "fedrf/parallel.hpp"

namespace fedrf::harness {

namespace {

double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

std::string fmt_double(double v) {
  char buf[40];
  snprintf(buf, sizeof(buf), "%.6f", v);
  return std::string(buf);
}

std::string join_ids(const std::vector<int>& ids) {
  if (ids.empty()) return "-";
  std::ostringstream out;
  for (size_t i = 0; i < ids.size(); i++) {
    if (i) out << ";";
    out << ids[i];
  }
  return out.str();
}

void append_stats(std::ostringstream& out, const proto::StatsSnapshot& s) {
  out << "," << s.stra << "," << s.sadd << "," << s.smul << "," << s.scom << "," << s.messages;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (dataset_csv.empty()) throw ConfigError("dataset path is required");
  if (schema_json.empty()) throw ConfigError("schema path is required");
  if (n_dis < 1) throw ConfigError("need at least one data island");
  if (trees < 1) throw ConfigError("need at least one tree per island");
  if (height < 1) throw ConfigError("tree height must be at least 1");
  if (val_size < 1) throw ConfigError("validation set must be non-empty");
  if (defense_helper < 1 || defense_helper > n_dis) {
    throw ConfigError("defense helper must name one of the islands");
  }
  if (defense) {
    if (!(theta > 0.0)) throw ConfigError("theta must be positive");
    // residual sums must stay inside the plaintext domain
    double worst = static_cast<double>(val_size) * 4.0 * trees * trees;
    if (worst > static_cast<double>(crypto::kDefaultDomainBound)) {
      throw ConfigError("validation size and tree count overflow the plaintext domain");
    }
    if (theta * trees * trees > static_cast<double>(crypto::kDefaultDomainBound)) {
      throw ConfigError("scaled theta overflows the plaintext domain");
    }
  }
  if (attack.has_value()) {
    if (attack->alpha.num >= attack->alpha.den) throw ConfigError("alpha must be below 1");
  }
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                proto::TranscriptLog* transcript, OracleCapture* capture) {
  config.validate();
  Rng root(config.seed);
  ExperimentResult result;
  auto time_phase = [&](const char* name, auto&& fn) {
    auto start = std::chrono::steady_clock::now();
    fn();
    result.timings.push_back(PhaseTiming{name, ms_since(start)});
  };

  // keys and parties
  crypto::KeyMaterial keys;
  std::optional<sim::PartySet> parties;
  time_phase("keygen", [&] {
    keys = sim::generate_key_material(config.key_bits, config.n_dis,
                                      root.split("keys").next_u64());
    parties = sim::PartySet::distribute(keys, config.n_dis, sim::di_id(config.defense_helper));
  });
  const crypto::SystemParams& params = keys.params;

  // data
  data::DatasetSchema schema = data::DatasetSchema::from_json_file(config.schema_json);
  data::Dataset dataset;
  data::SplitResult split;
  time_phase("data", [&] {
    dataset = data::load_dataset(config.dataset_csv, schema, params);
    split = data::split_dataset(dataset, config.n_dis, config.shard_size, config.val_size,
                                root.split("split").next_u64(), config.non_iid_skew);
  });
  result.dataset_name = dataset.name;
  result.shard_size = split.shard_size;

  // attack
  attack::PoisonReport poison_report;
  time_phase("attack", [&] {
    if (!config.attack.has_value() || config.attack->alpha.is_zero()) return;
    const attack::AttackConfig& atk = *config.attack;
    Rng atk_rng = Rng(atk.seed == 0 ? config.seed : atk.seed).split("attack");
    std::vector<int> malicious = atk.malicious_override;
    if (malicious.empty()) malicious = attack::select_malicious(config.n_dis, atk.alpha, atk_rng);
    poison_report.alpha = atk.alpha;
    poison_report.beta = atk.beta;
    poison_report.malicious = malicious;
    for (int di : malicious) {
      if (di < 1 || di > config.n_dis) throw ConfigError("malicious island out of range");
      forest::Shard& shard = split.shards[static_cast<size_t>(di - 1)];
      size_t clean = shard.size();
      Rng di_rng = atk_rng.split(static_cast<uint64_t>(di));
      forest::Shard poisoned = attack::poison_shard(shard, atk.beta, di_rng);
      attack::PoisonEntry entry;
      entry.di = di;
      entry.clean_size = clean;
      entry.injected = poisoned.size() - clean;
      for (size_t i = clean; i < poisoned.size(); i++) {
        (poisoned[i].label < 0 ? entry.flipped_pos_to_neg : entry.flipped_neg_to_pos)++;
      }
      poison_report.entries.push_back(entry);
      shard = std::move(poisoned);
    }
  });
  if (config.attack.has_value() && !config.attack->alpha.is_zero()) {
    result.poison_report = poison_report.to_text();
  }

  // local training (plaintext, per island)
  std::vector<forest::RandomForest> local_forests(static_cast<size_t>(config.n_dis));
  time_phase("train", [&] {
    forest::TrainParams train_params;
    train_params.max_height = config.height;
    Rng train_root = root.split("train");
    parallel_for(static_cast<size_t>(config.n_dis), config.parallel, [&](size_t i) {
      Rng di_rng = train_root.split(i + 1);
      local_forests[i] = forest::train_forest(split.shards[i], config.trees, train_params, di_rng);
    });
  });

  // model encryption under the per-island keys
  fed::LocalModelStore store;
  store.entries.resize(static_cast<size_t>(config.n_dis));
  time_phase("encrypt", [&] {
    Rng enc_root = root.split("encrypt");
    for (int di = 1; di <= config.n_dis; di++) {
      Rng di_rng = enc_root.split(static_cast<uint64_t>(di));
      store.entries[static_cast<size_t>(di - 1)] = fed::LocalModelStore::Entry{
          di, forest::encrypt_forest(params, keys.pair(sim::di_key_id(di)).pk,
                                     local_forests[static_cast<size_t>(di - 1)], di_rng,
                                     config.parallel)};
    }
  });

  proto::ProtocolStats stats;
  proto::SecureCompute engine(*parties, transcript, &stats,
                              root.split("protocols").next_u64());

  // defense (or plain aggregation)
  fed::FederatedModel fm;
  time_phase(config.defense ? "defense" : "aggregation", [&] {
    if (config.defense) {
      Rng val_rng = root.split("validation");
      fed::ValidationSet enc_val = fed::encrypt_validation(
          params, keys.pair(sim::kCommonKeyId).pk, split.validation, val_rng);
      fed::DefenseConfig def;
      def.theta = config.theta;
      def.trees_per_island = config.trees;
      const crypto::KeyPair* audit =
          (config.audit_mse || capture != nullptr) ? &keys.pair(sim::kCommonKeyId) : nullptr;
      fed::DefenseOutcome outcome =
          fed::secure_defense(engine, store, enc_val, def, config.parallel, audit);
      result.theta_scaled = outcome.theta_scaled;
      result.kept = outcome.kept();
      result.dropped = outcome.dropped();
      for (const auto& d : outcome.decisions) {
        if (d.audit_mse.has_value()) result.audit_mse.emplace_back(d.di, *d.audit_mse);
      }
      result.defense_report = fed::defense_report(outcome, transcript);
      fm = std::move(outcome.fm);
    } else {
      fm = fed::secure_aggregation(engine, store, config.parallel);
      for (const auto& e : store.entries) result.kept.push_back(e.di);
    }
  });
  result.n_star = static_cast<int>(fm.forests.size());

  // diagnosis: replay the test pool as user requests
  size_t n_test = split.test.size();
  if (config.test_cap > 0 && config.test_cap < n_test) n_test = config.test_cap;
  if (!config.run_diagnosis) n_test = 0;
  result.n_test = n_test;
  std::vector<int> predicted(n_test);
  std::vector<int> truth(n_test);
  std::vector<int64_t> vote_sums(n_test);
  time_phase("diagnosis", [&] {
    const sim::Party& du = parties->at(sim::kDuId);
    parallel_for(n_test, config.parallel, [&](size_t k) {
      const forest::Sample& sample = split.test[k];
      Rng req_rng = engine.rng_for("request/s" + std::to_string(k));
      std::vector<crypto::Ciphertext> request =
          fed::encrypt_request(params, keys.pair(sim::kUserKeyId).pk, sample.features, req_rng);
      fed::DiagnosisResult dia =
          fed::diagnose(engine, fm, request, "dia/s" + std::to_string(k), false);
      fed::RevealedDiagnosis revealed = fed::reveal_result(params, du, dia);
      predicted[k] = revealed.label;
      vote_sums[k] = revealed.vote_sum;
      truth[k] = sample.label;
    });
  });

  if (n_test > 0) result.cls = compute_metrics(predicted, truth);
  result.stats_aggregation = stats.snapshot(proto::Phase::kAggregation);
  result.stats_defense = stats.snapshot(proto::Phase::kDefense);
  result.stats_diagnosis = stats.snapshot(proto::Phase::kDiagnosis);

  result.predictions = predicted;
  result.vote_sums = vote_sums;
  if (capture != nullptr) {
    capture->keys = std::move(keys);
    capture->shards = std::move(split.shards);
    capture->validation = std::move(split.validation);
    capture->test = std::move(split.test);
    capture->test.resize(n_test);
    capture->local_forests = std::move(local_forests);
    capture->predictions = std::move(predicted);
    capture->vote_sums = std::move(vote_sums);
  }
  return result;
}

std::string metrics_csv_header() {
  return "dataset,n_dis,shard_size,trees,height,key_bits,scale,val_size,theta,alpha,beta,"
         "defense,seed,test_cap,n_test,n_star,kept,accuracy,recall,specificity,tp,fp,tn,fn,"
         "mse_scaled,theta_scaled,"
         "agg_stra,agg_sadd,agg_smul,agg_scom,agg_msgs,"
         "def_stra,def_sadd,def_smul,def_scom,def_msgs,"
         "dia_stra,dia_sadd,dia_smul,dia_scom,dia_msgs";
}

std::string metrics_csv_row(const ExperimentConfig& config, const ExperimentResult& result) {
  std::ostringstream out;
  out << result.dataset_name << "," << config.n_dis << "," << result.shard_size << ","
      << config.trees << "," << config.height << "," << config.key_bits << ",";
  out << crypto::kDefaultScale << "," << config.val_size << "," << fmt_double(config.theta)
      << ",";
  if (config.attack.has_value()) {
    out << config.attack->alpha.to_string() << "," << config.attack->beta.to_string();
  } else {
    out << "-,-";
  }
  out << "," << (config.defense ? 1 : 0) << "," << config.seed << "," << config.test_cap << ","
      << result.n_test << "," << result.n_star << "," << join_ids(result.kept) << ","
      << fmt_double(result.cls.accuracy) << "," << fmt_double(result.cls.recall) << ","
      << fmt_double(result.cls.specificity) << "," << result.cls.tp << "," << result.cls.fp
      << "," << result.cls.tn << "," << result.cls.fn << ",";
  if (result.audit_mse.empty()) {
    out << "-";
  } else {
    for (size_t i = 0; i < result.audit_mse.size(); i++) {
      if (i) out << ";";
      out << result.audit_mse[i].first << ":" << result.audit_mse[i].second;
    }
  }
  out << "," << result.theta_scaled;
  append_stats(out, result.stats_aggregation);
  append_stats(out, result.stats_defense);
  append_stats(out, result.stats_diagnosis);
  return out.str();
}

std::string timing_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "phase,ms\n";
  char buf[40];
  for (const auto& t : result.timings) {
    snprintf(buf, sizeof(buf), "%.3f", t.ms);
    out << t.phase << "," << buf << "\n";
  }
  return out.str();
}

}  // namespace fedrf::harness
