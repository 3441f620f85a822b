#include "fedrf/federated.hpp"

#include <cmath>
#include <sstream>

#include "fedrf/errors.hpp"
#include "fedrf/parallel.hpp"

namespace fedrf::fed {

using crypto::Ciphertext;
using proto::Phase;

int FederatedModel::total_trees() const {
  int t = 0;
  for (const auto& f : forests) t += static_cast<int>(f.trees.size());
  return t;
}

ValidationSet encrypt_validation(const crypto::SystemParams& params,
                                 const crypto::PublicKey& pk, const forest::Shard& shard,
                                 Rng& rng) {
  ValidationSet out;
  out.samples.reserve(shard.size());
  for (size_t k = 0; k < shard.size(); k++) {
    Rng sample_rng = rng.split(k);
    EncryptedSample enc_sample;
    enc_sample.features.reserve(shard[k].features.size());
    for (int64_t f : shard[k].features) {
      enc_sample.features.push_back(
          crypto::enc(params, pk, crypto::PlainScalar{f, crypto::ScaleTag::kScaled}, sample_rng));
    }
    enc_sample.label = crypto::enc(
        params, pk, crypto::PlainScalar{shard[k].label, crypto::ScaleTag::kUnit}, sample_rng);
    out.samples.push_back(std::move(enc_sample));
  }
  return out;
}

std::vector<Ciphertext> encrypt_request(const crypto::SystemParams& params,
                                        const crypto::PublicKey& pk_u,
                                        std::span<const int64_t> features, Rng& rng) {
  std::vector<Ciphertext> request;
  request.reserve(features.size());
  for (int64_t f : features) {
    request.push_back(
        crypto::enc(params, pk_u, crypto::PlainScalar{f, crypto::ScaleTag::kScaled}, rng));
  }
  return request;
}

int64_t DefenseConfig::theta_scaled() const {
  if (trees_per_island < 1) throw ConfigError("defense needs the per-island tree count");
  if (!(theta > 0.0)) throw ConfigError("theta must be positive");
  double scaled = theta * trees_per_island * trees_per_island;
  if (!std::isfinite(scaled) || scaled > 9.0e18) throw ConfigError("theta overflows");
  return std::llround(scaled);
}

PredictionOutcome secure_prediction(proto::SecureCompute& engine, Phase phase,
                                    std::string_view label, const forest::EncryptedTree& tree,
                                    std::span<const crypto::Ciphertext> request) {
  if (tree.nodes.empty()) throw ConfigError("empty encrypted tree");
  std::string base(label);
  int idx = 0;
  int comparisons = 0;
  for (;;) {
    if (idx < 0 || idx >= static_cast<int>(tree.nodes.size())) {
      throw ConfigError("malformed encrypted tree: dangling child link");
    }
    const forest::EncTreeNode& node = tree.nodes[static_cast<size_t>(idx)];
    if (node.is_leaf) {
      Ciphertext vote = node.weight;
      if (vote.key_id != sim::kCommonKeyId) {
        vote = engine.stra(phase, base + "/leaf" + std::to_string(idx), vote, sim::kCommonKeyId);
      }
      return PredictionOutcome{std::move(vote), comparisons};
    }
    if (node.feature_id < 1 || node.feature_id > static_cast<int>(request.size())) {
      throw ConfigError("encrypted tree references feature id " +
                        std::to_string(node.feature_id) + " outside the request");
    }
    const Ciphertext& feature = request[static_cast<size_t>(node.feature_id - 1)];
    int res = engine.scom(phase, base + "/n" + std::to_string(idx), feature, node.weight);
    comparisons++;
    idx = (res == 1) ? node.left : node.right;  // res=1: feature < weight
  }
}

crypto::Ciphertext secure_mse_sample(proto::SecureCompute& engine, Phase phase,
                                     std::string_view label,
                                     const forest::EncryptedForest& model,
                                     const EncryptedSample& sample) {
  if (model.trees.empty()) throw ConfigError("empty encrypted forest");
  const crypto::SystemParams& params = engine.params();
  std::string base(label);
  auto t = static_cast<int64_t>(model.trees.size());

  std::optional<Ciphertext> vote_sum;
  for (size_t j = 0; j < model.trees.size(); j++) {
    PredictionOutcome p = secure_prediction(engine, phase, base + "/t" + std::to_string(j),
                                            model.trees[j], sample.features);
    vote_sum = vote_sum ? crypto::ct_add(params, *vote_sum, p.vote) : p.vote;
  }
  // residual at the vote-sum scale: t*y - sum votes
  Ciphertext target = crypto::ct_scalar_mul(params, sample.label, t);
  Ciphertext residual =
      engine.sadd(phase, base + "/res", target, crypto::ct_neg(params, *vote_sum));
  return engine.smul(phase, base + "/sq", residual, residual);
}

FederatedModel secure_aggregation(proto::SecureCompute& engine, const LocalModelStore& store,
                                  bool parallel) {
  if (store.entries.empty()) throw ConfigError("no local models to aggregate");
  FederatedModel fm;
  fm.forests.resize(store.entries.size());
  fm.provenance.resize(store.entries.size());

  struct Task {
    size_t entry;
    size_t tree;
  };
  std::vector<Task> tasks;
  for (size_t e = 0; e < store.entries.size(); e++) {
    const auto& entry = store.entries[e];
    fm.provenance[e] = entry.di;
    fm.forests[e].key_id = sim::kCommonKeyId;
    fm.forests[e].trees.resize(entry.model.trees.size());
    for (size_t t = 0; t < entry.model.trees.size(); t++) tasks.push_back(Task{e, t});
  }

  parallel_for(tasks.size(), parallel, [&](size_t task_idx) {
    const Task& task = tasks[task_idx];
    const auto& entry = store.entries[task.entry];
    const forest::EncryptedTree& src = entry.model.trees[task.tree];
    forest::EncryptedTree dst;
    dst.key_id = sim::kCommonKeyId;
    dst.nodes.reserve(src.nodes.size());
    std::string prefix = "agg/di" + std::to_string(entry.di) + "/t" + std::to_string(task.tree);
    for (const forest::EncTreeNode& node : src.nodes) {
      forest::EncTreeNode out = node;
      out.weight = engine.stra(Phase::kAggregation, prefix + "/n" + std::to_string(node.index),
                               node.weight, sim::kCommonKeyId);
      dst.nodes.push_back(std::move(out));
    }
    fm.forests[task.entry].trees[task.tree] = std::move(dst);
  });
  return fm;
}

std::vector<int> DefenseOutcome::kept() const {
  std::vector<int> ids;
  for (const auto& d : decisions) {
    if (d.kept) ids.push_back(d.di);
  }
  return ids;
}

std::vector<int> DefenseOutcome::dropped() const {
  std::vector<int> ids;
  for (const auto& d : decisions) {
    if (!d.kept) ids.push_back(d.di);
  }
  return ids;
}

DefenseOutcome secure_defense(proto::SecureCompute& engine, const LocalModelStore& store,
                              const ValidationSet& validation, const DefenseConfig& config,
                              bool parallel, const crypto::KeyPair* audit_key) {
  if (store.entries.empty()) throw ConfigError("no local models to defend");
  if (validation.samples.empty()) throw ConfigError("empty validation set");
  const crypto::SystemParams& params = engine.params();

  DefenseOutcome outcome;
  outcome.theta_scaled = config.theta_scaled();
  Rng theta_rng = engine.rng_for("defense/theta");
  Ciphertext theta_ct =
      crypto::enc(params, engine.parties().public_key(sim::kCommonKeyId),
                  crypto::PlainScalar{outcome.theta_scaled, crypto::ScaleTag::kUnit}, theta_rng);

  // per-sample residual pipelines are independent across (island, sample)
  struct Task {
    size_t entry;
    size_t sample;
  };
  std::vector<Task> tasks;
  for (size_t e = 0; e < store.entries.size(); e++) {
    for (size_t k = 0; k < validation.samples.size(); k++) tasks.push_back(Task{e, k});
  }
  std::vector<std::vector<Ciphertext>> residuals(store.entries.size());
  for (auto& r : residuals) r.resize(validation.samples.size());

  parallel_for(tasks.size(), parallel, [&](size_t task_idx) {
    const Task& task = tasks[task_idx];
    const auto& entry = store.entries[task.entry];
    std::string label =
        "def/di" + std::to_string(entry.di) + "/s" + std::to_string(task.sample);
    residuals[task.entry][task.sample] = secure_mse_sample(
        engine, Phase::kDefense, label, entry.model, validation.samples[task.sample]);
  });

  for (size_t e = 0; e < store.entries.size(); e++) {
    const auto& entry = store.entries[e];
    Ciphertext mse = residuals[e][0];
    for (size_t k = 1; k < residuals[e].size(); k++) {
      mse = crypto::ct_add(params, mse, residuals[e][k]);
    }
    DefenseDecision decision;
    decision.di = entry.di;
    decision.scom_label = "def/di" + std::to_string(entry.di) + "/cmp";
    decision.scom_res = engine.scom(Phase::kDefense, decision.scom_label, mse, theta_ct);
    decision.kept = decision.scom_res == 1;  // res=1: MSE < theta'
    decision.mse = std::move(mse);
    if (audit_key != nullptr) {
      decision.audit_mse =
          crypto::dec(params, *audit_key, decision.mse, crypto::ScaleTag::kUnit).value;
    }
    outcome.decisions.push_back(std::move(decision));
  }

  LocalModelStore kept_store;
  for (size_t e = 0; e < store.entries.size(); e++) {
    if (outcome.decisions[e].kept) kept_store.entries.push_back(store.entries[e]);
  }
  if (kept_store.entries.empty()) {
    std::ostringstream msg;
    msg << "defense rejected every local model (theta_scaled=" << outcome.theta_scaled << ";";
    for (const auto& d : outcome.decisions) {
      msg << " di" << d.di << ": res=" << d.scom_res;
      if (d.audit_mse.has_value()) msg << " mse=" << *d.audit_mse;
    }
    msg << ")";
    throw EmptyFederationError(msg.str());
  }
  outcome.fm = secure_aggregation(engine, kept_store, parallel);
  return outcome;
}

DiagnosisResult diagnose(proto::SecureCompute& engine, const FederatedModel& fm,
                         std::span<const crypto::Ciphertext> request, std::string_view label,
                         bool parallel) {
  if (fm.forests.empty() || fm.total_trees() == 0) {
    throw ConfigError("cannot diagnose with an empty federated model");
  }
  const crypto::SystemParams& params = engine.params();
  std::string base(label);

  struct Task {
    size_t forest;
    size_t tree;
  };
  std::vector<Task> tasks;
  for (size_t f = 0; f < fm.forests.size(); f++) {
    for (size_t t = 0; t < fm.forests[f].trees.size(); t++) tasks.push_back(Task{f, t});
  }
  std::vector<Ciphertext> votes(tasks.size());
  parallel_for(tasks.size(), parallel, [&](size_t i) {
    const Task& task = tasks[i];
    std::string tree_label =
        base + "/f" + std::to_string(task.forest) + "/t" + std::to_string(task.tree);
    votes[i] = secure_prediction(engine, Phase::kDiagnosis, tree_label,
                                 fm.forests[task.forest].trees[task.tree], request)
                   .vote;
  });

  DiagnosisResult result;
  result.total_trees = static_cast<int>(tasks.size());
  Ciphertext sum = votes[0];
  for (size_t i = 1; i < votes.size(); i++) sum = crypto::ct_add(params, sum, votes[i]);
  result.vote_sum = std::move(sum);

  // step-8 result return: CP attaches its partial and hands both to DU
  const sim::Party& cp = engine.parties().at(sim::kCpId);
  result.cp_partial =
      crypto::sdec(params, cp.share(sim::kCommonKeyId, 1), result.vote_sum);
  proto::ProtocolSession session;  // one-way handover, logged for audit
  session.nonce = proto::SecureCompute::session_nonce(Phase::kDiagnosis, base + "/reveal");
  session.helper = sim::kDuId;
  session.phase = Phase::kDiagnosis;
  session.owner = &engine;
  session.send(sim::kCpId, sim::kDuId, proto::PayloadKind::kReEncryption,
               proto::payload_of(result.vote_sum));
  session.send(sim::kCpId, sim::kDuId, proto::PayloadKind::kPartialDecryption,
               proto::payload_of(result.cp_partial));
  return result;
}

RevealedDiagnosis reveal_result(const crypto::SystemParams& params, const sim::Party& du,
                                const DiagnosisResult& result) {
  crypto::PartialDecryption p2 =
      crypto::sdec(params, du.share(sim::kCommonKeyId, 2), result.vote_sum);
  Bigint sum = crypto::decode_signed(params, crypto::wdec_residue(params, result.cp_partial, p2));
  Bigint bound = Bigint::from_i64(result.total_trees);
  if (sum > bound || sum < Bigint(0) - bound) {
    throw DomainError("revealed vote sum exceeds the tree count");
  }
  RevealedDiagnosis out;
  out.vote_sum = sum.to_i64();
  out.label = out.vote_sum >= 0 ? 1 : -1;
  return out;
}

std::string defense_report(const DefenseOutcome& outcome, const proto::TranscriptLog* log) {
  std::ostringstream out;
  out << "defense-report theta_scaled=" << outcome.theta_scaled << "\n";
  for (const auto& d : outcome.decisions) {
    out << "di=" << d.di << " mse=";
    if (d.audit_mse.has_value()) {
      out << *d.audit_mse;
    } else {
      out << "-";
    }
    out << " theta=" << outcome.theta_scaled << " kept=" << (d.kept ? 1 : 0);
    out << " scom_digest=";
    if (log != nullptr) {
      uint64_t nonce = proto::SecureCompute::session_nonce(Phase::kDefense, d.scom_label);
      std::ostringstream session_lines;
      for (const auto& m : log->sorted_messages()) {
        if (m.session == nonce) {
          session_lines << proto::payload_kind_name(m.kind) << ":" << m.payload_digest << ";";
        }
      }
      char buf[32];
      snprintf(buf, sizeof(buf), "%016llx",
               static_cast<unsigned long long>(Rng::fnv1a64(session_lines.str())));
      out << buf;
    } else {
      out << "-";
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace fedrf::fed
