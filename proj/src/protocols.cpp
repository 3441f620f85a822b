#include "fedrf/protocols.hpp"

#include <sstream>

#include "fedrf/errors.hpp"

namespace fedrf::proto {

using crypto::Ciphertext;
using crypto::PartialDecryption;

const char* phase_name(Phase phase) {
  switch (phase) {
    case Phase::kAggregation:
      return "aggregation";
    case Phase::kDefense:
      return "defense";
    case Phase::kDiagnosis:
      return "diagnosis";
    case Phase::kAdhoc:
      return "adhoc";
  }
  return "unknown";
}

StatsSnapshot ProtocolStats::snapshot(Phase p) const {
  const Counters& c = at(p);
  return StatsSnapshot{c.stra.load(), c.sadd.load(), c.smul.load(), c.scom.load(),
                       c.messages.load()};
}

StatsSnapshot ProtocolStats::total() const {
  StatsSnapshot t;
  for (size_t i = 0; i < kPhaseCount; i++) {
    StatsSnapshot s = snapshot(static_cast<Phase>(i));
    t.stra += s.stra;
    t.sadd += s.sadd;
    t.smul += s.smul;
    t.scom += s.scom;
    t.messages += s.messages;
  }
  return t;
}

void ProtocolSession::send(const std::string& sender, const std::string& receiver,
                           PayloadKind kind, std::string payload) {
  if (owner == nullptr) throw ProtocolError("session is not attached to a protocol engine");
  ProtocolMessage msg;
  msg.session = nonce;
  msg.seq = seq++;
  msg.sender = sender;
  msg.receiver = receiver;
  msg.kind = kind;
  msg.payload = std::move(payload);
  if (owner->log() != nullptr) owner->log()->append(std::move(msg));
  if (owner->stats() != nullptr) owner->stats()->add_message(phase);
}

std::string payload_of(const Ciphertext& ct) {
  return "ct " + ct.key_id + " " + ct.a.to_hex() + " " + ct.b.to_hex();
}

std::string payload_of(const PartialDecryption& pd) {
  return "pd " + pd.key_id + " " + pd.value.to_hex();
}

Ciphertext ciphertext_from_payload(const std::string& payload) {
  std::istringstream in(payload);
  std::string tag, key_id, a_hex, b_hex;
  in >> tag >> key_id >> a_hex >> b_hex;
  if (tag != "ct" || key_id.empty() || a_hex.empty() || b_hex.empty()) {
    throw ParseError("malformed ciphertext payload");
  }
  return Ciphertext{key_id, Bigint::from_hex(a_hex), Bigint::from_hex(b_hex)};
}

std::string SecureCompute::helper_for(const std::string& key_id, Phase phase) const {
  if (key_id == sim::kUserKeyId) return sim::kDuId;
  if (key_id.rfind("pk_DI_", 0) == 0) return "DI_" + key_id.substr(6);
  if (key_id == sim::kCommonKeyId) {
    return phase == Phase::kDiagnosis ? std::string(sim::kDuId) : parties_.defense_helper();
  }
  throw ProtocolError("no helper registered for key '" + key_id + "'");
}

ProtocolSession SecureCompute::open_session(Phase phase, std::string_view label,
                                            std::string helper) {
  ProtocolSession s;
  s.nonce = session_nonce(phase, label);
  s.helper = std::move(helper);
  s.phase = phase;
  s.rng = root_rng_.split(s.nonce);
  s.owner = this;
  return s;
}

Ciphertext SecureCompute::stra(Phase phase, std::string_view label, const Ciphertext& src,
                               const std::string& dst_key_id) {
  if (src.key_id == dst_key_id) {
    throw ProtocolError("key transformation requires distinct source and destination keys");
  }
  const crypto::SystemParams& params = parties_.params();
  ProtocolSession session = open_session(phase, label, helper_for(src.key_id, phase));
  const sim::Party& cp = parties_.at(sim::kCpId);
  const sim::Party& helper = parties_.at(session.helper);
  const crypto::TrapdoorShare& s1 = cp.share(src.key_id, 1);
  const crypto::TrapdoorShare& s2 = helper.share(src.key_id, 2);
  const crypto::PublicKey& src_pk = parties_.public_key(src.key_id);
  const crypto::PublicKey& dst_pk = parties_.public_key(dst_key_id);

  // CP blinds with r uniform over the message space and attaches its share.
  Bigint r = Bigint::random_below(session.rng, params.n);
  Ciphertext blinded = crypto::ct_add(params, src, crypto::enc_residue(params, src_pk, r, session.rng));
  session.send(cp.id, helper.id, PayloadKind::kBlindedCiphertext, payload_of(blinded));
  PartialDecryption pd1 = crypto::sdec(params, s1, blinded);
  session.send(cp.id, helper.id, PayloadKind::kPartialDecryption, payload_of(pd1));

  // Helper completes the decryption of the blinded value and re-encrypts it
  // under the destination key.
  PartialDecryption pd2 = crypto::sdec(params, s2, blinded);
  Bigint blinded_value = crypto::wdec_residue(params, pd1, pd2);
  Ciphertext reenc = crypto::enc_residue(params, dst_pk, blinded_value, session.rng);
  session.send(helper.id, cp.id, PayloadKind::kReEncryption, payload_of(reenc));

  // CP strips the blind: [[w']] * [[r]]^{N-1}.
  Ciphertext r_under_dst = crypto::enc_residue(params, dst_pk, r, session.rng);
  Ciphertext out = crypto::ct_add(params, reenc, crypto::ct_neg(params, r_under_dst));
  if (stats_ != nullptr) stats_->add_stra(phase);
  return out;
}

Ciphertext SecureCompute::normalize(Phase phase, std::string_view label, const Ciphertext& c) {
  if (c.key_id == sim::kCommonKeyId) return c;
  return stra(phase, label, c, sim::kCommonKeyId);
}

Ciphertext SecureCompute::sadd(Phase phase, std::string_view label, const Ciphertext& a,
                               const Ciphertext& b) {
  std::string base(label);
  Ciphertext an = normalize(phase, base + "/stra-a", a);
  Ciphertext bn = normalize(phase, base + "/stra-b", b);
  Ciphertext out = crypto::ct_add(parties_.params(), an, bn);
  if (stats_ != nullptr) stats_->add_sadd(phase);
  return out;
}

Ciphertext SecureCompute::smul(Phase phase, std::string_view label, const Ciphertext& a,
                               const Ciphertext& b) {
  const crypto::SystemParams& params = parties_.params();
  std::string base(label);
  Ciphertext an = normalize(phase, base + "/stra-a", a);
  Ciphertext bn = normalize(phase, base + "/stra-b", b);

  ProtocolSession session = open_session(phase, label, helper_for(sim::kCommonKeyId, phase));
  const sim::Party& cp = parties_.at(sim::kCpId);
  const sim::Party& helper = parties_.at(session.helper);
  const crypto::TrapdoorShare& s1 = cp.share(sim::kCommonKeyId, 1);
  const crypto::TrapdoorShare& s2 = helper.share(sim::kCommonKeyId, 2);
  const crypto::PublicKey& pk = parties_.public_key(sim::kCommonKeyId);

  // CP blinds both operands additively and keeps the blinds.
  Bigint ra = Bigint::random_below(session.rng, params.n);
  Bigint rb = Bigint::random_below(session.rng, params.n);
  Ciphertext ba = crypto::ct_add(params, an, crypto::enc_residue(params, pk, ra, session.rng));
  Ciphertext bb = crypto::ct_add(params, bn, crypto::enc_residue(params, pk, rb, session.rng));
  PartialDecryption pa = crypto::sdec(params, s1, ba);
  PartialDecryption pb = crypto::sdec(params, s1, bb);
  session.send(cp.id, helper.id, PayloadKind::kBlindedCiphertext, payload_of(ba));
  session.send(cp.id, helper.id, PayloadKind::kPartialDecryption, payload_of(pa));
  session.send(cp.id, helper.id, PayloadKind::kBlindedCiphertext, payload_of(bb));
  session.send(cp.id, helper.id, PayloadKind::kPartialDecryption, payload_of(pb));

  // Helper multiplies the two blinded values and returns the re-encryption.
  Bigint va = crypto::wdec_residue(params, pa, crypto::sdec(params, s2, ba));
  Bigint vb = crypto::wdec_residue(params, pb, crypto::sdec(params, s2, bb));
  Ciphertext prod = crypto::enc_residue(params, pk, (va * vb).mod(params.n), session.rng);
  session.send(helper.id, cp.id, PayloadKind::kReEncryption, payload_of(prod));

  // CP strips the cross terms: (a+ra)(b+rb) - rb*a - ra*b - ra*rb = a*b.
  Ciphertext t1 = crypto::ct_scalar_mul(params, an, params.n - rb);
  Ciphertext t2 = crypto::ct_scalar_mul(params, bn, params.n - ra);
  Bigint cross = (params.n - (ra * rb).mod(params.n)).mod(params.n);
  Ciphertext t3 = crypto::enc_residue(params, pk, cross, session.rng);
  Ciphertext out = crypto::ct_add(params, crypto::ct_add(params, prod, t1),
                                  crypto::ct_add(params, t2, t3));
  if (stats_ != nullptr) stats_->add_smul(phase);
  return out;
}

int SecureCompute::scom(Phase phase, std::string_view label, const Ciphertext& a,
                        const Ciphertext& b) {
  const crypto::SystemParams& params = parties_.params();
  std::string base(label);
  Ciphertext an = normalize(phase, base + "/stra-a", a);
  Ciphertext bn = normalize(phase, base + "/stra-b", b);

  ProtocolSession session = open_session(phase, label, helper_for(sim::kCommonKeyId, phase));
  const sim::Party& cp = parties_.at(sim::kCpId);
  const sim::Party& helper = parties_.at(session.helper);
  const crypto::TrapdoorShare& s1 = cp.share(sim::kCommonKeyId, 1);
  const crypto::TrapdoorShare& s2 = helper.share(sim::kCommonKeyId, 2);
  const crypto::PublicKey& pk = parties_.public_key(sim::kCommonKeyId);

  // e = 2(a-b)+1 is odd, hence never zero; its sign decides the comparison
  // with equality mapping to "a >= b".
  Ciphertext diff = crypto::ct_add(params, an, crypto::ct_neg(params, bn));
  Ciphertext odd = crypto::ct_add(params, crypto::ct_scalar_mul(params, diff, int64_t{2}),
                                  crypto::enc_residue(params, pk, Bigint(1), session.rng));
  // sign-and-magnitude blinding: v = s * r * e with r in [1, 2^blind_bits]
  Bigint r = Bigint(1) + Bigint::random_bits(session.rng, params.blind_bits);
  bool s_positive = !session.rng.next_bool();
  Bigint k = s_positive ? r : params.n - r;
  Ciphertext blinded = crypto::ct_scalar_mul(params, odd, k);
  session.send(cp.id, helper.id, PayloadKind::kBlindedCiphertext, payload_of(blinded));
  PartialDecryption p1 = crypto::sdec(params, s1, blinded);
  session.send(cp.id, helper.id, PayloadKind::kPartialDecryption, payload_of(p1));

  // Helper reports only the sign bit of the blinded residue.
  PartialDecryption p2 = crypto::sdec(params, s2, blinded);
  Bigint v = crypto::decode_signed(params, crypto::wdec_residue(params, p1, p2));
  int sigma = v.sign() < 0 ? 1 : 0;
  session.send(helper.id, cp.id, PayloadKind::kComparisonBit, sigma != 0 ? "1" : "0");

  // CP corrects for its sign choice: res = 0 iff a >= b.
  int res = s_positive ? sigma : 1 - sigma;
  if (stats_ != nullptr) stats_->add_scom(phase);
  return res;
}

}  // namespace fedrf::proto
