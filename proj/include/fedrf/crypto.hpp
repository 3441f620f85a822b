#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fedrf/bigint.hpp"
#include "fedrf/rng.hpp"

namespace fedrf::crypto {

inline constexpr int64_t kDefaultDomainBound = int64_t{1} << 40;  // B
inline constexpr unsigned kDefaultBlindBits = 40;
inline constexpr int64_t kDefaultScale = 1000;

/// Fixed-point tag of an encoded value: UNIT for labels/votes/thresholds,
/// SCALED for feature and split values multiplied by the system scale S.
enum class ScaleTag : uint8_t { kUnit = 0, kScaled = 1 };

struct PlainScalar {
  int64_t value = 0;
  ScaleTag tag = ScaleTag::kUnit;

  friend bool operator==(const PlainScalar&, const PlainScalar&) = default;
};

/// Factorization-derived material the key generation center keeps to itself.
/// Never distributed to simulated parties.
struct MasterTrapdoor {
  Bigint p;
  Bigint q;
  Bigint lambda;         // lcm(p-1, q-1)
  Bigint share_modulus;  // lambda * N, the additive group of trapdoor shares
  Bigint crt_exponent;   // == 0 (mod lambda), == 1 (mod N)
};

/// Public group parameters shared by every key in the system.  Immutable and
/// freely shareable across threads.  The `master` pointer is present only on
/// the generator's copy; distributed copies are produced by public_view().
struct SystemParams {
  unsigned key_bits = 0;  // modulus bit length
  Bigint n;               // N = p*q
  Bigint n_sq;            // N^2, the ciphertext modulus
  Bigint g;               // generator base in Z*_{N^2}
  int64_t domain_bound = kDefaultDomainBound;  // |plaintext| <= B
  unsigned blind_bits = kDefaultBlindBits;     // multiplicative blinding width
  int64_t scale = kDefaultScale;               // fixed-point scale S

  std::shared_ptr<const MasterTrapdoor> master;

  bool has_master() const { return master != nullptr; }
  SystemParams public_view() const {
    SystemParams p = *this;
    p.master.reset();
    return p;
  }
};

struct PublicKey {
  std::string id;  // key label ("pk", "pk_u", "pk_DI_1", ...)
  Bigint h;        // per-key generator component g^sk mod N^2
};

/// One of the two additive shares of a key's split decryption exponent.
struct TrapdoorShare {
  std::string key_id;
  int index = 0;  // 1 or 2
  Bigint value;
};

struct KeyPair {
  std::string id;
  PublicKey pk;
  Bigint sk;  // party trapdoor
  TrapdoorShare share1;
  TrapdoorShare share2;

  bool has_secrets() const { return !sk.is_zero(); }
};

/// Two-component ciphertext:
///   a = (1 + m*N) * h^r  mod N^2
///   b = g^r              mod N^2
struct Ciphertext {
  std::string key_id;
  Bigint a;
  Bigint b;
};

struct PartialDecryption {
  std::string key_id;
  Bigint value;  // ciphertext component a raised to one trapdoor share
};

/// Generates the shared modulus and generator base.  Deterministic for a
/// fixed seed; key_bits is restricted to {128, 256, 512, 1024, 2048}
/// (sub-512 sizes are meant for tests).
SystemParams keygen_system(unsigned key_bits, uint64_t seed);

/// Generates a party key under shared params: fresh generator component,
/// party trapdoor, and the two additive shares whose partial decryptions
/// multiply back to a full decryption.  Requires the master material.
KeyPair keygen_party(const SystemParams& params, const std::string& id, uint64_t seed);

/// Residue layer: message space Z_N.  Protocol internals operate here so
/// that blinded intermediates can use the full group.
Ciphertext enc_residue(const SystemParams&, const PublicKey&, const Bigint& m, Rng& rng);
Bigint dec_residue(const SystemParams&, const KeyPair&, const Ciphertext&);

/// Maps a residue to the signed representative in (-N/2, N/2].
Bigint decode_signed(const SystemParams&, const Bigint& residue);

/// Scalar layer: signed plaintexts bounded by B.
Ciphertext enc(const SystemParams&, const PublicKey&, PlainScalar m, Rng& rng);
PlainScalar dec(const SystemParams&, const KeyPair&, const Ciphertext&, ScaleTag tag);

PartialDecryption sdec(const SystemParams&, const TrapdoorShare&, const Ciphertext&);
Bigint wdec_residue(const SystemParams&, const PartialDecryption&, const PartialDecryption&);
PlainScalar wdec(const SystemParams&, const PartialDecryption&, const PartialDecryption&,
                 ScaleTag tag);

/// Homomorphic layer.  ct_add requires both ciphertexts under the same key;
/// ct_scalar_mul multiplies the plaintext by k mod N (k = N-1 is negation).
Ciphertext ct_add(const SystemParams&, const Ciphertext&, const Ciphertext&);
Ciphertext ct_scalar_mul(const SystemParams&, const Ciphertext&, const Bigint& k);
Ciphertext ct_scalar_mul(const SystemParams&, const Ciphertext&, int64_t k);
Ciphertext ct_neg(const SystemParams&, const Ciphertext&);

/// Fixed-point encoding.  SCALED multiplies by S and rounds half-to-even;
/// UNIT passes integers through.  Both reject magnitudes beyond B.
PlainScalar encode_unit(const SystemParams&, int64_t v);
PlainScalar encode_scaled(const SystemParams&, double x);
double decode_value(const SystemParams&, PlainScalar v);

/// Key material bundle and its self-describing text serialization.  The
/// layout roundtrips bit-exactly; secrets are written only when requested.
struct KeyMaterial {
  SystemParams params;
  std::vector<KeyPair> pairs;

  const KeyPair& pair(const std::string& id) const;
};

std::string serialize_key_material(const KeyMaterial&, bool include_secrets);
KeyMaterial parse_key_material(const std::string& text);

}  // namespace fedrf::crypto
