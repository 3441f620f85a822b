#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedrf/forest.hpp"
#include "fedrf/protocols.hpp"

namespace fedrf::fed {

/// "Local": the encrypted local models CP has collected, one per island,
/// each under its owner's key.
struct LocalModelStore {
  struct Entry {
    int di = 0;
    forest::EncryptedForest model;
  };
  std::vector<Entry> entries;
};

/// "FM": kept forests after key transformation, all under the common key.
struct FederatedModel {
  std::vector<forest::EncryptedForest> forests;
  std::vector<int> provenance;  // contributing island per forest
  int total_trees() const;
};

/// One validation record encrypted under the common key by the curator.
struct EncryptedSample {
  std::vector<crypto::Ciphertext> features;  // SCALED
  crypto::Ciphertext label;                  // UNIT, in {-1,+1}
};

struct ValidationSet {
  std::vector<EncryptedSample> samples;
};

ValidationSet encrypt_validation(const crypto::SystemParams&, const crypto::PublicKey& pk,
                                 const forest::Shard& shard, Rng& rng);

/// DU-side request encryption: one ciphertext per feature under pk_u.
std::vector<crypto::Ciphertext> encrypt_request(const crypto::SystemParams&,
                                                const crypto::PublicKey& pk_u,
                                                std::span<const int64_t> features, Rng& rng);

/// Defense threshold.  `theta` is at the paper's scale (mean-squared residual
/// of the +-1 votes summed over the validation set); the integer comparison
/// runs at the vote-sum scale, i.e. against theta * t^2.
struct DefenseConfig {
  double theta = 80.0;
  int trees_per_island = 0;

  int64_t theta_scaled() const;
};

struct PredictionOutcome {
  crypto::Ciphertext vote;  // leaf label under the common key
  int comparisons = 0;      // SCOM invocations along the path
};

/// Encrypted-tree traversal: at each split, compare the request feature with
/// the node weight via SCOM and branch left exactly when feature < weight;
/// the reached leaf's label is returned under the common key.
PredictionOutcome secure_prediction(proto::SecureCompute& engine, proto::Phase phase,
                                    std::string_view label, const forest::EncryptedTree& tree,
                                    std::span<const crypto::Ciphertext> request);

/// Per-sample squared residual at the vote-sum scale:
///   [[ (t*y - sum_j vote_j)^2 ]] via scalar multiplication, one SADD with
/// the negated vote sum, and one SMUL of the residual with itself.
crypto::Ciphertext secure_mse_sample(proto::SecureCompute& engine, proto::Phase phase,
                                     std::string_view label,
                                     const forest::EncryptedForest& model,
                                     const EncryptedSample& sample);

/// Key transformation of every node of every entry to the common key; one
/// STRA per node, helped by the owning island.
FederatedModel secure_aggregation(proto::SecureCompute& engine, const LocalModelStore& store,
                                  bool parallel = false);

struct DefenseDecision {
  int di = 0;
  int scom_res = 0;  // 1 iff MSE < theta' (model kept)
  bool kept = false;
  crypto::Ciphertext mse;  // [[sum_k residual^2]] under the common key
  std::string scom_label;  // session label of the threshold comparison
  std::optional<int64_t> audit_mse;  // decrypted, only when an audit key is given
};

struct DefenseOutcome {
  FederatedModel fm;
  std::vector<DefenseDecision> decisions;
  int64_t theta_scaled = 0;

  std::vector<int> kept() const;
  std::vector<int> dropped() const;
};

/// Trimmed-MSE defense: per island, homomorphically sum the per-sample
/// residuals over the validation set, compare against the encrypted
/// threshold, keep the model iff MSE < theta', then aggregate the kept
/// models.  Rejecting every model is a hard error.  `audit_key` (the common
/// key pair) is a test/audit facility that decrypts the per-island MSE into
/// the decisions; the secure path never requires it.
DefenseOutcome secure_defense(proto::SecureCompute& engine, const LocalModelStore& store,
                              const ValidationSet& validation, const DefenseConfig& config,
                              bool parallel = false,
                              const crypto::KeyPair* audit_key = nullptr);

struct DiagnosisResult {
  crypto::Ciphertext vote_sum;          // under the common key
  crypto::PartialDecryption cp_partial; // CP's share-1 partial of the sum
  int total_trees = 0;
};

/// Runs secure prediction for every tree of the federated model on a request
/// under the user key, sums the votes homomorphically, and attaches CP's
/// partial decryption (division by t is deferred; the sign is unchanged).
DiagnosisResult diagnose(proto::SecureCompute& engine, const FederatedModel& fm,
                         std::span<const crypto::Ciphertext> request, std::string_view label,
                         bool parallel = false);

struct RevealedDiagnosis {
  int64_t vote_sum = 0;
  int label = 1;  // vote_sum >= 0 maps to +1
};

/// DU side: combine CP's partial with DU's own share-2 partial, decode the
/// signed vote sum and threshold at zero.
RevealedDiagnosis reveal_result(const crypto::SystemParams&, const sim::Party& du,
                                const DiagnosisResult&);

/// Defense report export: one record per island with the threshold, the
/// kept/dropped decision, the SCOM transcript digest, and the audit MSE when
/// it was decrypted.
std::string defense_report(const DefenseOutcome&, const proto::TranscriptLog* log);

}  // namespace fedrf::fed
