#pragma once

#include <map>
#include <string>
#include <vector>

#include "fedrf/crypto.hpp"

namespace fedrf::sim {

enum class Role : uint8_t { kKgc, kCp, kDi, kDu };

inline constexpr const char* kCpId = "CP";
inline constexpr const char* kDuId = "DU";
inline constexpr const char* kCommonKeyId = "pk";
inline constexpr const char* kUserKeyId = "pk_u";

std::string di_id(int i);      // "DI_1", "DI_2", ...
std::string di_key_id(int i);  // "pk_DI_1", ...

/// One simulated participant and the key material it is allowed to hold.
struct Party {
  std::string id;
  Role role = Role::kDi;
  /// key id -> (share index -> trapdoor share)
  std::map<std::string, std::map<int, crypto::TrapdoorShare>> shares;
  /// full secret keys (only DU holds one, for its own key)
  std::map<std::string, Bigint> secret_keys;

  bool holds_share(const std::string& key_id, int index) const;
  /// Throws ProtocolError when the party lacks the requested share.
  const crypto::TrapdoorShare& share(const std::string& key_id, int index) const;
};

/// Key generation + distribution (KGC work) plus the resulting simulated
/// parties.  After distribution no party holds both shares of any trapdoor,
/// and the full key pairs live only in the returned KeyMaterial, which the
/// caller may drop or keep for audit purposes.
crypto::KeyMaterial generate_key_material(unsigned key_bits, int n_dis, uint64_t seed);

class PartySet {
 public:
  /// Distributes km to CP, the DIs and DU:
  ///   CP:        share 1 of pk, pk_u and every pk_DI_i
  ///   DI_i:      share 2 of pk_DI_i
  ///   helper DI: additionally share 2 of pk (defense-phase duty)
  ///   DU:        share 2 of pk, share 2 of pk_u, and its own full sk_u
  static PartySet distribute(const crypto::KeyMaterial& km, int n_dis,
                             const std::string& defense_helper);

  /// Convenience: generate and distribute in one step.
  static PartySet keygen_and_distribute(unsigned key_bits, int n_dis, uint64_t seed,
                                        const std::string& defense_helper);

  const crypto::SystemParams& params() const { return params_; }
  const crypto::PublicKey& public_key(const std::string& key_id) const;
  const Party& at(const std::string& party_id) const;
  Party& at(const std::string& party_id);
  int n_dis() const { return n_dis_; }
  const std::string& defense_helper() const { return defense_helper_; }
  std::vector<std::string> party_ids() const;

 private:
  crypto::SystemParams params_;  // public view only
  std::map<std::string, crypto::PublicKey> public_keys_;
  std::map<std::string, Party> parties_;
  int n_dis_ = 0;
  std::string defense_helper_;
};

}  // namespace fedrf::sim
