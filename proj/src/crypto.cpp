#include "fedrf/crypto.hpp"

#include <cmath>
#include <sstream>

#include "fedrf/errors.hpp"

namespace fedrf::crypto {

namespace {

constexpr int kMillerRabinRounds = 64;

bool valid_key_bits(unsigned bits) {
  return bits == 128 || bits == 256 || bits == 512 || bits == 1024 || bits == 2048;
}

/// Wrap-free blinding: the sign-and-magnitude blinded comparison operand
/// s*r*(2(a-b)+1) has magnitude at most (4B+2)*2^blind_bits, which must stay
/// below N/2 so the signed decoding is exact.
bool blinding_fits(const Bigint& n, int64_t domain_bound, unsigned blind_bits) {
  Bigint limit = (Bigint::from_i64(domain_bound) * Bigint(4) + Bigint(2)).shl(blind_bits);
  return limit * Bigint(2) < n;
}

Bigint fresh_nonce(const SystemParams& params, Rng& rng) {
  // exponent randomness r in [1, N/2)
  return Bigint(1) + Bigint::random_below(rng, params.n / Bigint(2) - Bigint(1));
}

}  // namespace

SystemParams keygen_system(unsigned key_bits, uint64_t seed) {
  if (!valid_key_bits(key_bits)) {
    throw ConfigError("key size must be one of 128/256/512/1024/2048 bits (got " +
                      std::to_string(key_bits) + ")");
  }
  Rng rng = Rng(seed).split("keygen_system");
  size_t half = key_bits / 2;

  Bigint p, q, n, lambda;
  for (;;) {
    p = random_prime(rng, half, kMillerRabinRounds);
    q = random_prime(rng, half, kMillerRabinRounds);
    if (p == q) continue;
    Bigint p1 = p - Bigint(1);
    Bigint q1 = q - Bigint(1);
    if (p1.gcd(q1) != Bigint(2)) continue;  // predecessors share only the factor 2
    n = p * q;
    lambda = (p1 * q1) / Bigint(2);  // lcm(p-1, q-1)
    if (n.gcd(lambda) != Bigint(1)) continue;
    break;
  }

  SystemParams params;
  params.key_bits = key_bits;
  params.n = n;
  params.n_sq = n * n;
  if (!blinding_fits(params.n, params.domain_bound, params.blind_bits)) {
    throw ConfigError("key size too small: blinded comparisons would wrap modulo N");
  }

  // g = a^{2N} kills the order-N and order-2 components, so ord(g) | lambda.
  for (;;) {
    Bigint a = Bigint::random_below(rng, params.n_sq);
    if (a.gcd(params.n) != Bigint(1)) continue;
    Bigint g = a.pow_mod(Bigint(2) * n, params.n_sq);
    if (g == Bigint(1)) continue;
    if (g.pow_mod(lambda, params.n_sq) != Bigint(1)) continue;
    params.g = g;
    break;
  }

  auto master = std::make_shared<MasterTrapdoor>();
  master->p = p;
  master->q = q;
  master->lambda = lambda;
  master->share_modulus = lambda * n;
  // crt_exponent = lambda * (lambda^{-1} mod N): divisible by lambda, 1 mod N
  master->crt_exponent = lambda * lambda.invert_mod(n);
  params.master = std::move(master);
  return params;
}

KeyPair keygen_party(const SystemParams& params, const std::string& id, uint64_t seed) {
  if (!params.has_master()) {
    throw ConfigError("party key generation requires the master trapdoor material");
  }
  if (id.empty()) throw ConfigError("party key id must be non-empty");
  Rng rng = Rng(seed).split("keygen_party").split(id);

  KeyPair kp;
  kp.id = id;
  kp.sk = Bigint(1) + Bigint::random_below(rng, params.n / Bigint(2) - Bigint(1));
  kp.pk = PublicKey{id, params.g.pow_mod(kp.sk, params.n_sq)};

  const auto& m = *params.master;
  Bigint s1 = Bigint::random_below(rng, m.share_modulus);
  Bigint s2 = (m.crt_exponent + m.share_modulus - s1).mod(m.share_modulus);
  kp.share1 = TrapdoorShare{id, 1, s1};
  kp.share2 = TrapdoorShare{id, 2, s2};
  return kp;
}

Ciphertext enc_residue(const SystemParams& params, const PublicKey& pk, const Bigint& m,
                       Rng& rng) {
  if (m.sign() < 0 || m >= params.n) throw DomainError("residue outside [0, N)");
  Bigint r = fresh_nonce(params, rng);
  Ciphertext ct;
  ct.key_id = pk.id;
  ct.a = ((Bigint(1) + m * params.n) * pk.h.pow_mod(r, params.n_sq)).mod(params.n_sq);
  ct.b = params.g.pow_mod(r, params.n_sq);
  return ct;
}

Bigint dec_residue(const SystemParams& params, const KeyPair& kp, const Ciphertext& ct) {
  if (ct.key_id != kp.id) {
    throw KeyMismatchError("ciphertext under key '" + ct.key_id + "' decrypted with key '" +
                           kp.id + "'");
  }
  if (!kp.has_secrets()) throw KeyMismatchError("key pair holds no secret trapdoor");
  Bigint masked = ct.b.pow_mod(kp.sk, params.n_sq).invert_mod(params.n_sq);
  Bigint x = (ct.a * masked).mod(params.n_sq);
  Bigint x1 = x - Bigint(1);
  if (!x1.divisible_by(params.n)) {
    throw DomainError("ciphertext does not decrypt to a well-formed value under this key");
  }
  return x1.divexact(params.n);
}

Bigint decode_signed(const SystemParams& params, const Bigint& residue) {
  if (residue.sign() < 0 || residue >= params.n) throw DomainError("residue outside [0, N)");
  if (residue * Bigint(2) > params.n) return residue - params.n;
  return residue;
}

namespace {

Bigint signed_to_residue(const SystemParams& params, int64_t v) {
  Bigint b = Bigint::from_i64(v);
  return b.mod(params.n);
}

PlainScalar scalar_from_residue(const SystemParams& params, const Bigint& residue,
                                ScaleTag tag) {
  Bigint v = decode_signed(params, residue);
  Bigint bound = Bigint::from_i64(params.domain_bound);
  if (v > bound || v < Bigint(0) - bound) {
    throw DomainError("decrypted value outside the plaintext domain bound");
  }
  return PlainScalar{v.to_i64(), tag};
}

}  // namespace

Ciphertext enc(const SystemParams& params, const PublicKey& pk, PlainScalar m, Rng& rng) {
  if (m.value > params.domain_bound || m.value < -params.domain_bound) {
    throw DomainError("plaintext magnitude exceeds the domain bound");
  }
  return enc_residue(params, pk, signed_to_residue(params, m.value), rng);
}

PlainScalar dec(const SystemParams& params, const KeyPair& kp, const Ciphertext& ct,
                ScaleTag tag) {
  return scalar_from_residue(params, dec_residue(params, kp, ct), tag);
}

PartialDecryption sdec(const SystemParams& params, const TrapdoorShare& share,
                       const Ciphertext& ct) {
  if (share.key_id != ct.key_id) {
    throw KeyMismatchError("trapdoor share for key '" + share.key_id +
                           "' applied to ciphertext under key '" + ct.key_id + "'");
  }
  if (share.index != 1 && share.index != 2) throw KeyMismatchError("invalid share index");
  return PartialDecryption{ct.key_id, ct.a.pow_mod(share.value, params.n_sq)};
}

Bigint wdec_residue(const SystemParams& params, const PartialDecryption& p1,
                    const PartialDecryption& p2) {
  if (p1.key_id != p2.key_id) {
    throw KeyMismatchError("decryption shares come from different keys");
  }
  Bigint x = (p1.value * p2.value).mod(params.n_sq);
  Bigint x1 = x - Bigint(1);
  if (!x1.divisible_by(params.n)) {
    throw DomainError("inconsistent decryption shares: combined value is malformed");
  }
  return x1.divexact(params.n);
}

PlainScalar wdec(const SystemParams& params, const PartialDecryption& p1,
                 const PartialDecryption& p2, ScaleTag tag) {
  return scalar_from_residue(params, wdec_residue(params, p1, p2), tag);
}

Ciphertext ct_add(const SystemParams& params, const Ciphertext& c1, const Ciphertext& c2) {
  if (c1.key_id != c2.key_id) {
    throw KeyMismatchError("homomorphic addition across keys '" + c1.key_id + "' and '" +
                           c2.key_id + "'");
  }
  return Ciphertext{c1.key_id, (c1.a * c2.a).mod(params.n_sq), (c1.b * c2.b).mod(params.n_sq)};
}

Ciphertext ct_scalar_mul(const SystemParams& params, const Ciphertext& ct, const Bigint& k) {
  Bigint e = k.mod(params.n);
  return Ciphertext{ct.key_id, ct.a.pow_mod(e, params.n_sq), ct.b.pow_mod(e, params.n_sq)};
}

Ciphertext ct_scalar_mul(const SystemParams& params, const Ciphertext& ct, int64_t k) {
  return ct_scalar_mul(params, ct, Bigint::from_i64(k));
}

Ciphertext ct_neg(const SystemParams& params, const Ciphertext& ct) {
  return ct_scalar_mul(params, ct, params.n - Bigint(1));
}

PlainScalar encode_unit(const SystemParams& params, int64_t v) {
  if (v > params.domain_bound || v < -params.domain_bound) {
    throw DomainError("unit value exceeds the domain bound");
  }
  return PlainScalar{v, ScaleTag::kUnit};
}

PlainScalar encode_scaled(const SystemParams& params, double x) {
  double y = x * static_cast<double>(params.scale);
  if (!std::isfinite(y)) throw DomainError("non-finite value cannot be encoded");
  double f = std::floor(y);
  double diff = y - f;
  auto base = static_cast<int64_t>(f);
  int64_t r;
  if (diff > 0.5) {
    r = base + 1;
  } else if (diff < 0.5) {
    r = base;
  } else {
    r = (base % 2 == 0) ? base : base + 1;  // ties to even
  }
  if (r > params.domain_bound || r < -params.domain_bound) {
    throw DomainError("scaled value exceeds the domain bound");
  }
  return PlainScalar{r, ScaleTag::kScaled};
}

double decode_value(const SystemParams& params, PlainScalar v) {
  if (v.tag == ScaleTag::kUnit) return static_cast<double>(v.value);
  return static_cast<double>(v.value) / static_cast<double>(params.scale);
}

const KeyPair& KeyMaterial::pair(const std::string& id) const {
  for (const auto& kp : pairs) {
    if (kp.id == id) return kp;
  }
  throw KeyMismatchError("no key pair with id '" + id + "'");
}

std::string serialize_key_material(const KeyMaterial& km, bool include_secrets) {
  std::ostringstream out;
  out << "fedrf-keys v1\n";
  out << "bits " << km.params.key_bits << "\n";
  out << "domain-bound " << km.params.domain_bound << "\n";
  out << "blind-bits " << km.params.blind_bits << "\n";
  out << "scale " << km.params.scale << "\n";
  out << "n " << km.params.n.to_hex() << "\n";
  out << "g " << km.params.g.to_hex() << "\n";
  if (include_secrets && km.params.has_master()) {
    out << "master " << km.params.master->p.to_hex() << " " << km.params.master->q.to_hex()
        << "\n";
  }
  for (const auto& kp : km.pairs) {
    out << "party " << kp.id << " h " << kp.pk.h.to_hex();
    if (include_secrets && kp.has_secrets()) {
      out << " sk " << kp.sk.to_hex() << " share1 " << kp.share1.value.to_hex() << " share2 "
          << kp.share2.value.to_hex();
    }
    out << "\n";
  }
  return out.str();
}

KeyMaterial parse_key_material(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "fedrf-keys v1") {
    throw ParseError("key file: missing or unsupported magic tag");
  }
  KeyMaterial km;
  Bigint master_p, master_q;
  bool have_master = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    ls >> field;
    if (field == "bits") {
      ls >> km.params.key_bits;
    } else if (field == "domain-bound") {
      ls >> km.params.domain_bound;
    } else if (field == "blind-bits") {
      ls >> km.params.blind_bits;
    } else if (field == "scale") {
      ls >> km.params.scale;
    } else if (field == "n") {
      std::string hex;
      ls >> hex;
      km.params.n = Bigint::from_hex(hex);
    } else if (field == "g") {
      std::string hex;
      ls >> hex;
      km.params.g = Bigint::from_hex(hex);
    } else if (field == "master") {
      std::string ph, qh;
      ls >> ph >> qh;
      master_p = Bigint::from_hex(ph);
      master_q = Bigint::from_hex(qh);
      have_master = true;
    } else if (field == "party") {
      KeyPair kp;
      ls >> kp.id;
      std::string key, hex;
      while (ls >> key >> hex) {
        if (key == "h") {
          kp.pk = PublicKey{kp.id, Bigint::from_hex(hex)};
        } else if (key == "sk") {
          kp.sk = Bigint::from_hex(hex);
        } else if (key == "share1") {
          kp.share1 = TrapdoorShare{kp.id, 1, Bigint::from_hex(hex)};
        } else if (key == "share2") {
          kp.share2 = TrapdoorShare{kp.id, 2, Bigint::from_hex(hex)};
        } else {
          throw ParseError("key file: unknown party field '" + key + "'");
        }
      }
      if (kp.pk.id.empty()) throw ParseError("key file: party record lacks a public component");
      km.pairs.push_back(std::move(kp));
    } else {
      throw ParseError("key file: unknown field '" + field + "'");
    }
  }
  if (km.params.n.is_zero() || km.params.g.is_zero()) {
    throw ParseError("key file: missing system parameters");
  }
  km.params.n_sq = km.params.n * km.params.n;
  if (have_master) {
    auto master = std::make_shared<MasterTrapdoor>();
    master->p = master_p;
    master->q = master_q;
    Bigint p1 = master_p - Bigint(1);
    Bigint q1 = master_q - Bigint(1);
    master->lambda = (p1 * q1) / Bigint(2);
    master->share_modulus = master->lambda * km.params.n;
    master->crt_exponent = master->lambda * master->lambda.invert_mod(km.params.n);
    km.params.master = std::move(master);
  }
  return km;
}

}  // namespace fedrf::crypto
