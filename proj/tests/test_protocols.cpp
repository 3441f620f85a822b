#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "fedrf/errors.hpp"
#include "fedrf/protocols.hpp"

using namespace fedrf;
using namespace fedrf::crypto;
using namespace fedrf::proto;

namespace {

struct Fixture {
  KeyMaterial km;
  sim::PartySet parties;
  TranscriptLog log;
  ProtocolStats stats;
  SecureCompute engine;
  Rng rng{1234};

  explicit Fixture(int n_dis = 2, bool keep_payloads = false)
      : km(sim::generate_key_material(256, n_dis, 7)),
        parties(sim::PartySet::distribute(km, n_dis, "DI_1")),
        log(keep_payloads),
        engine(parties, &log, &stats, 99) {}

  const SystemParams& params() { return km.params; }

  Ciphertext enc_under(const std::string& key_id, int64_t v) {
    return enc(km.params, km.pair(key_id).pk, PlainScalar{v, ScaleTag::kUnit}, rng);
  }
  int64_t dec_common(const Ciphertext& ct) {
    return dec(km.params, km.pair(sim::kCommonKeyId), ct, ScaleTag::kUnit).value;
  }
};

}  // namespace

TEST_CASE("stra maps zero to zero under the destination key") {
  Fixture f;
  Ciphertext src = f.enc_under("pk_DI_1", 0);
  Ciphertext out = f.engine.stra(Phase::kAdhoc, "stra-zero", src, sim::kCommonKeyId);
  CHECK(out.key_id == sim::kCommonKeyId);
  CHECK(f.dec_common(out) == 0);
}

TEST_CASE("stra preserves the plaintext for random values") {
  Fixture f;
  for (int i = 0; i < 500; i++) {
    auto m = static_cast<int64_t>(f.rng.below(2000001)) - 1000000;
    std::string key = (i % 2 == 0) ? "pk_DI_1" : "pk_DI_2";
    Ciphertext out = f.engine.stra(Phase::kAdhoc, "stra-rand/" + std::to_string(i),
                                   f.enc_under(key, m), sim::kCommonKeyId);
    CHECK(f.dec_common(out) == m);
  }
  CHECK(f.stats.snapshot(Phase::kAdhoc).stra == 500);
}

TEST_CASE("stra emits exactly three payload messages per invocation") {
  Fixture f;
  f.engine.stra(Phase::kAdhoc, "stra-count", f.enc_under("pk_DI_2", 17), sim::kCommonKeyId);
  auto msgs = f.log.sorted_messages();
  REQUIRE(msgs.size() == 3);
  CHECK(msgs[0].kind == PayloadKind::kBlindedCiphertext);
  CHECK(msgs[0].sender == "CP");
  CHECK(msgs[0].receiver == "DI_2");
  CHECK(msgs[1].kind == PayloadKind::kPartialDecryption);
  CHECK(msgs[2].kind == PayloadKind::kReEncryption);
  CHECK(msgs[2].sender == "DI_2");
  CHECK(msgs[2].receiver == "CP");
}

TEST_CASE("stra blinding is fresh and covers the message space") {
  Fixture f(1, /*keep_payloads=*/true);
  const int64_t w = 4242;
  const int runs = 1000;
  std::set<std::string> seen;
  int low_half = 0;
  for (int i = 0; i < runs; i++) {
    TranscriptLog local(true);
    SecureCompute engine(f.parties, &local, nullptr, 1000 + i);
    engine.stra(Phase::kAdhoc, "blind/" + std::to_string(i), f.enc_under("pk_DI_1", w),
                sim::kCommonKeyId);
    // replay: the helper-visible value is the decryption of the blinded ct
    auto msgs = local.sorted_messages();
    REQUIRE(msgs.size() == 3);
    Ciphertext blinded = ciphertext_from_payload(msgs[0].payload);
    Bigint visible = dec_residue(f.params(), f.km.pair("pk_DI_1"), blinded);
    seen.insert(visible.to_hex());
    if (visible * Bigint(2) < f.params().n) low_half++;
    // never the unblinded operand
    CHECK(visible != Bigint::from_i64(w));
  }
  CHECK(seen.size() == runs);             // no repeated offsets
  CHECK(low_half > runs / 2 - 150);       // spread across both halves of Z_N
  CHECK(low_half < runs / 2 + 150);
}

TEST_CASE("sadd matches plaintext addition across keys") {
  Fixture f;
  Ciphertext out = f.engine.sadd(Phase::kAdhoc, "sadd-inv", f.enc_under("pk_DI_1", 3),
                                 f.enc_under("pk_DI_2", -3));
  CHECK(f.dec_common(out) == 0);

  for (int i = 0; i < 200; i++) {
    auto a = static_cast<int64_t>(f.rng.below(100001)) - 50000;
    auto b = static_cast<int64_t>(f.rng.below(100001)) - 50000;
    Ciphertext r = f.engine.sadd(Phase::kAdhoc, "sadd/" + std::to_string(i),
                                 f.enc_under("pk_DI_1", a), f.enc_under("pk_u", b));
    CHECK(f.dec_common(r) == a + b);
  }
}

TEST_CASE("sadd with a negated operand computes the residual") {
  Fixture f;
  // [[y - yhat]] = SADD([[y]], [[yhat]]^{N-1})
  Ciphertext y = f.enc_under(sim::kCommonKeyId, 1);
  Ciphertext yhat = f.enc_under("pk_DI_1", -5);
  Ciphertext neg = ct_neg(f.params(), yhat);
  Ciphertext out = f.engine.sadd(Phase::kAdhoc, "residual", y, neg);
  CHECK(f.dec_common(out) == 6);
}

TEST_CASE("smul matches plaintext multiplication") {
  Fixture f;
  CHECK(f.dec_common(f.engine.smul(Phase::kAdhoc, "smul-zero", f.enc_under("pk_DI_1", 12345),
                                   f.enc_under("pk_DI_2", 0))) == 0);
  // squaring a residual
  Ciphertext r = f.enc_under(sim::kCommonKeyId, -7);
  CHECK(f.dec_common(f.engine.smul(Phase::kAdhoc, "smul-sq", r, r)) == 49);
  for (int i = 0; i < 200; i++) {
    auto a = static_cast<int64_t>(f.rng.below(2001)) - 1000;
    auto b = static_cast<int64_t>(f.rng.below(2001)) - 1000;
    Ciphertext out = f.engine.smul(Phase::kAdhoc, "smul/" + std::to_string(i),
                                   f.enc_under("pk_DI_2", a), f.enc_under("pk_u", b));
    CHECK(f.dec_common(out) == a * b);
  }
}

TEST_CASE("scom equality maps to res=0 (greater-or-equal)") {
  Fixture f;
  CHECK(f.engine.scom(Phase::kAdhoc, "scom-eq", f.enc_under("pk_DI_1", 5),
                      f.enc_under("pk_DI_2", 5)) == 0);
}

TEST_CASE("scom matches the sign rule on the exhaustive small grid") {
  Fixture f;
  int idx = 0;
  for (int a = -10; a <= 10; a++) {
    for (int b = -10; b <= 10; b++) {
      int res = f.engine.scom(Phase::kAdhoc, "grid/" + std::to_string(idx++),
                              f.enc_under("pk_DI_1", a), f.enc_under("pk_u", b));
      CHECK(res == (a >= b ? 0 : 1));
    }
  }
}

TEST_CASE("scom at the defense threshold boundary rejects the model") {
  Fixture f;
  const int64_t t = 30;
  const int64_t mse = 81 * t * t;     // model error, vote-sum scale
  const int64_t theta = 80 * t * t;   // scaled threshold
  int res = f.engine.scom(Phase::kAdhoc, "boundary", f.enc_under(sim::kCommonKeyId, mse),
                          f.enc_under(sim::kCommonKeyId, theta));
  CHECK(res == 0);  // mse >= theta: rejected
  // strictly below the threshold is accepted
  int res2 = f.engine.scom(Phase::kAdhoc, "boundary2", f.enc_under(sim::kCommonKeyId, theta - 1),
                           f.enc_under(sim::kCommonKeyId, theta));
  CHECK(res2 == 1);
}

TEST_CASE("protocol payloads never carry an unblinded operand") {
  Fixture f(2, /*keep_payloads=*/true);
  const int64_t a = 31, b = -12;
  f.engine.smul(Phase::kAdhoc, "hygiene-smul", f.enc_under("pk_DI_1", a),
                f.enc_under("pk_DI_2", b));
  f.engine.scom(Phase::kAdhoc, "hygiene-scom", f.enc_under("pk_DI_1", a),
                f.enc_under("pk_DI_2", b));
  int decryptable = 0;
  for (const auto& msg : f.log.sorted_messages()) {
    if (msg.kind == PayloadKind::kComparisonBit) {
      CHECK(msg.payload.size() == 1);  // the one allowed plaintext bit
      continue;
    }
    if (msg.kind == PayloadKind::kPartialDecryption) continue;
    Ciphertext ct = ciphertext_from_payload(msg.payload);
    Bigint value = decode_signed(f.params(), dec_residue(f.params(), f.km.pair(ct.key_id), ct));
    decryptable++;
    CHECK(value != Bigint::from_i64(a));
    CHECK(value != Bigint::from_i64(b));
    CHECK(value != Bigint::from_i64(a * b));
    CHECK(value != Bigint::from_i64(a - b));
  }
  CHECK(decryptable > 4);
}

TEST_CASE("a helper without the required share is rejected") {
  Fixture f;
  f.parties.at("DI_1").shares.erase("pk_DI_1");
  CHECK_THROWS_AS(
      f.engine.stra(Phase::kAdhoc, "no-share", f.enc_under("pk_DI_1", 1), sim::kCommonKeyId),
      ProtocolError);
  CHECK_THROWS_AS(f.engine.helper_for("pk_unknown", Phase::kAdhoc), ProtocolError);
  CHECK_THROWS_AS(f.engine.stra(Phase::kAdhoc, "same-key", f.enc_under("pk_u", 1), "pk_u"),
                  ProtocolError);
}

TEST_CASE("helper selection follows the key and the phase") {
  Fixture f;
  CHECK(f.engine.helper_for("pk_DI_2", Phase::kDefense) == "DI_2");
  CHECK(f.engine.helper_for("pk_u", Phase::kDefense) == "DU");
  CHECK(f.engine.helper_for("pk", Phase::kDefense) == "DI_1");
  CHECK(f.engine.helper_for("pk", Phase::kAggregation) == "DI_1");
  CHECK(f.engine.helper_for("pk", Phase::kDiagnosis) == "DU");
}

TEST_CASE("transcript export is stable and line-delimited") {
  Fixture f;
  f.engine.stra(Phase::kAdhoc, "export-a", f.enc_under("pk_DI_1", 1), sim::kCommonKeyId);
  f.engine.stra(Phase::kAdhoc, "export-b", f.enc_under("pk_DI_2", 2), sim::kCommonKeyId);
  std::ostringstream out1, out2;
  f.log.export_lines(out1);
  f.log.export_lines(out2);
  CHECK(out1.str() == out2.str());
  CHECK(f.log.size() == 6);
  std::string line;
  std::istringstream in(out1.str());
  int lines = 0;
  while (std::getline(in, line)) {
    CHECK(line.find("session=") == 0);
    CHECK(line.find("fnv64=") != std::string::npos);
    lines++;
  }
  CHECK(lines == 6);
}
