#include "fedrf/transcript.hpp"

#include <algorithm>
#include <sstream>

namespace fedrf::proto {

const char* payload_kind_name(PayloadKind kind) {
  switch (kind) {
    case PayloadKind::kBlindedCiphertext:
      return "blinded-ciphertext";
    case PayloadKind::kPartialDecryption:
      return "partial-decryption";
    case PayloadKind::kReEncryption:
      return "re-encryption";
    case PayloadKind::kComparisonBit:
      return "comparison-bit";
  }
  return "unknown";
}

std::vector<ProtocolMessage> TranscriptLog::sorted_messages() const {
  std::vector<ProtocolMessage> copy;
  {
    std::lock_guard<std::mutex> lock(mu_);
    copy = messages_;
  }
  std::stable_sort(copy.begin(), copy.end(), [](const auto& a, const auto& b) {
    if (a.session != b.session) return a.session < b.session;
    return a.seq < b.seq;
  });
  return copy;
}

void TranscriptLog::export_lines(std::ostream& out) const {
  char buf[64];
  for (const auto& m : sorted_messages()) {
    snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(m.session));
    out << "session=" << buf << " seq=" << m.seq << " " << m.sender << "->" << m.receiver
        << " kind=" << payload_kind_name(m.kind) << " bytes=" << m.payload_size;
    snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(m.payload_digest));
    out << " fnv64=" << buf << "\n";
  }
}

uint64_t TranscriptLog::digest() const {
  std::ostringstream out;
  export_lines(out);
  return Rng::fnv1a64(out.str());
}

}  // namespace fedrf::proto
