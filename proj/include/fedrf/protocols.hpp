#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <string>
#include <string_view>

#include "fedrf/crypto.hpp"
#include "fedrf/party.hpp"
#include "fedrf/transcript.hpp"

namespace fedrf::proto {

/// Pipeline phase a protocol invocation belongs to; used for per-phase
/// counters and for selecting the share-2 helper of common-key operands.
enum class Phase : uint8_t {
  kAggregation = 0,
  kDefense = 1,
  kDiagnosis = 2,
  kAdhoc = 3,
};
inline constexpr size_t kPhaseCount = 4;
const char* phase_name(Phase phase);

struct StatsSnapshot {
  uint64_t stra = 0;
  uint64_t sadd = 0;
  uint64_t smul = 0;
  uint64_t scom = 0;
  uint64_t messages = 0;
};

/// Protocol invocation counters, split by phase.  Thread-safe.
class ProtocolStats {
 public:
  void add_stra(Phase p) { at(p).stra.fetch_add(1, std::memory_order_relaxed); }
  void add_sadd(Phase p) { at(p).sadd.fetch_add(1, std::memory_order_relaxed); }
  void add_smul(Phase p) { at(p).smul.fetch_add(1, std::memory_order_relaxed); }
  void add_scom(Phase p) { at(p).scom.fetch_add(1, std::memory_order_relaxed); }
  void add_message(Phase p) { at(p).messages.fetch_add(1, std::memory_order_relaxed); }

  StatsSnapshot snapshot(Phase p) const;
  StatsSnapshot total() const;

 private:
  struct Counters {
    std::atomic<uint64_t> stra{0}, sadd{0}, smul{0}, scom{0}, messages{0};
  };
  Counters& at(Phase p) { return counters_[static_cast<size_t>(p)]; }
  const Counters& at(Phase p) const { return counters_[static_cast<size_t>(p)]; }
  std::array<Counters, kPhaseCount> counters_;
};

/// One two-party protocol invocation: CP as initiator, one helper party,
/// a stable session nonce, its own RNG stream and a strictly ordered
/// message sequence.  A session serves exactly one invocation.
struct ProtocolSession {
  uint64_t nonce = 0;
  std::string initiator = sim::kCpId;
  std::string helper;
  Phase phase = Phase::kAdhoc;
  Rng rng{0};
  uint32_t seq = 0;
  class SecureCompute* owner = nullptr;

  void send(const std::string& sender, const std::string& receiver, PayloadKind kind,
            std::string payload);
};

/// Payload (de)serialization used on the simulated wire.
std::string payload_of(const crypto::Ciphertext& ct);
std::string payload_of(const crypto::PartialDecryption& pd);
crypto::Ciphertext ciphertext_from_payload(const std::string& payload);

/// Interactive secure computation between CP and share-holding helpers.
///
/// All randomness is derived from the root stream and the per-invocation
/// label, so outcomes do not depend on scheduling.  Labels must be unique
/// per invocation within one experiment.
class SecureCompute {
 public:
  SecureCompute(sim::PartySet& parties, TranscriptLog* log, ProtocolStats* stats,
                uint64_t rng_seed)
      : parties_(parties), log_(log), stats_(stats), root_rng_(rng_seed) {}

  /// Helper selection: pk_DI_i -> DI_i, pk_u -> DU, and for the common key
  /// the party holding its share 2 in this phase (DU while diagnosing,
  /// the designated defense helper otherwise).
  std::string helper_for(const std::string& key_id, Phase phase) const;

  /// Re-encrypts `src` under `dst_key_id` without revealing the plaintext:
  /// CP sends the additively blinded ciphertext plus its decryption share,
  /// the helper returns a re-encryption of the blinded value, and CP strips
  /// the blind homomorphically.  Exactly three payload messages.
  crypto::Ciphertext stra(Phase phase, std::string_view label, const crypto::Ciphertext& src,
                          const std::string& dst_key_id);

  /// Secure addition/multiplication of operands under (possibly) different
  /// keys; the result is under the common key.
  crypto::Ciphertext sadd(Phase phase, std::string_view label, const crypto::Ciphertext& a,
                          const crypto::Ciphertext& b);
  crypto::Ciphertext smul(Phase phase, std::string_view label, const crypto::Ciphertext& a,
                          const crypto::Ciphertext& b);

  /// Secure comparison: returns 0 when a >= b and 1 when a < b.  The helper
  /// sees only the sign of the sign-and-magnitude blinded residue; CP learns
  /// the single result bit.
  int scom(Phase phase, std::string_view label, const crypto::Ciphertext& a,
           const crypto::Ciphertext& b);

  sim::PartySet& parties() { return parties_; }
  const crypto::SystemParams& params() const { return parties_.params(); }
  ProtocolStats* stats() { return stats_; }
  TranscriptLog* log() { return log_; }

  /// Derives the deterministic RNG stream for a label (also used by callers
  /// for non-protocol randomness such as request encryption).
  Rng rng_for(std::string_view label) const { return root_rng_.split(label); }

  /// Stable session nonce for a (phase, label) pair; lets exporters find a
  /// specific session in the transcript.
  static uint64_t session_nonce(Phase phase, std::string_view label) {
    return Rng::fnv1a64(label) ^ (static_cast<uint64_t>(phase) << 62);
  }

 private:
  friend struct ProtocolSession;

  ProtocolSession open_session(Phase phase, std::string_view label, std::string helper);
  /// STRA to the common key unless already there.
  crypto::Ciphertext normalize(Phase phase, std::string_view label, const crypto::Ciphertext& c);

  sim::PartySet& parties_;
  TranscriptLog* log_;
  ProtocolStats* stats_;
  Rng root_rng_;
};

}  // namespace fedrf::proto
