#pragma once

#include <cstdint>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include "fedrf/rng.hpp"

namespace fedrf::proto {

/// The only payload kinds a two-party protocol may put on the wire.  No
/// plaintext-valued payload exists except the single comparison bit.
enum class PayloadKind : uint8_t {
  kBlindedCiphertext = 0,
  kPartialDecryption = 1,
  kReEncryption = 2,
  kComparisonBit = 3,
};

const char* payload_kind_name(PayloadKind kind);

struct ProtocolMessage {
  uint64_t session = 0;  // session nonce
  uint32_t seq = 0;      // send order within the session
  std::string sender;
  std::string receiver;
  PayloadKind kind = PayloadKind::kBlindedCiphertext;
  uint64_t payload_digest = 0;
  size_t payload_size = 0;
  std::string payload;  // retained only when the log keeps payloads
};

/// Ordered record of every protocol message in one experiment.  Appends are
/// thread-safe; the exported view is sorted by (session, seq) so it is
/// byte-identical between serial and parallel runs.
class TranscriptLog {
 public:
  explicit TranscriptLog(bool keep_payloads = false) : keep_payloads_(keep_payloads) {}

  void append(ProtocolMessage msg) {
    msg.payload_digest = Rng::fnv1a64(msg.payload);
    msg.payload_size = msg.payload.size();
    if (!keep_payloads_) msg.payload.clear();
    std::lock_guard<std::mutex> lock(mu_);
    messages_.push_back(std::move(msg));
  }

  bool keep_payloads() const { return keep_payloads_; }
  size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return messages_.size();
  }

  /// Messages sorted by (session, seq).
  std::vector<ProtocolMessage> sorted_messages() const;

  /// Line-delimited export: one record per message with sender, receiver,
  /// payload kind and payload digest.
  void export_lines(std::ostream& out) const;

  /// Digest over the sorted export, usable as a compact transcript id.
  uint64_t digest() const;

 private:
  mutable std::mutex mu_;
  bool keep_payloads_;
  std::vector<ProtocolMessage> messages_;
};

}  // namespace fedrf::proto
