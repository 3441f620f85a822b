#include "fedrf/party.hpp"

#include "fedrf/errors.hpp"

namespace fedrf::sim {

std::string di_id(int i) { return "DI_" + std::to_string(i); }
std::string di_key_id(int i) { return "pk_DI_" + std::to_string(i); }

bool Party::holds_share(const std::string& key_id, int index) const {
  auto it = shares.find(key_id);
  if (it == shares.end()) return false;
  return it->second.contains(index);
}

const crypto::TrapdoorShare& Party::share(const std::string& key_id, int index) const {
  auto it = shares.find(key_id);
  if (it != shares.end()) {
    auto jt = it->second.find(index);
    if (jt != it->second.end()) return jt->second;
  }
  throw ProtocolError("party '" + id + "' does not hold share " + std::to_string(index) +
                      " of key '" + key_id + "'");
}

crypto::KeyMaterial generate_key_material(unsigned key_bits, int n_dis, uint64_t seed) {
  if (n_dis < 1) throw ConfigError("at least one data island is required");
  crypto::KeyMaterial km;
  Rng root(seed);
  km.params = crypto::keygen_system(key_bits, root.split("system").next_u64());
  uint64_t party_seed = root.split("parties").next_u64();
  km.pairs.push_back(crypto::keygen_party(km.params, kCommonKeyId, party_seed));
  km.pairs.push_back(crypto::keygen_party(km.params, kUserKeyId, party_seed));
  for (int i = 1; i <= n_dis; i++) {
    km.pairs.push_back(crypto::keygen_party(km.params, di_key_id(i), party_seed));
  }
  return km;
}

PartySet PartySet::distribute(const crypto::KeyMaterial& km, int n_dis,
                              const std::string& defense_helper) {
  if (n_dis < 1) throw ConfigError("at least one data island is required");
  PartySet set;
  set.params_ = km.params.public_view();
  set.n_dis_ = n_dis;
  set.defense_helper_ = defense_helper;
  for (const auto& kp : km.pairs) set.public_keys_[kp.id] = kp.pk;

  Party cp{kCpId, Role::kCp, {}, {}};
  Party du{kDuId, Role::kDu, {}, {}};

  const auto& common = km.pair(kCommonKeyId);
  const auto& user = km.pair(kUserKeyId);
  cp.shares[kCommonKeyId][1] = common.share1;
  cp.shares[kUserKeyId][1] = user.share1;
  du.shares[kCommonKeyId][2] = common.share2;
  du.shares[kUserKeyId][2] = user.share2;
  du.secret_keys[kUserKeyId] = user.sk;

  bool helper_found = false;
  for (int i = 1; i <= n_dis; i++) {
    const auto& kp = km.pair(di_key_id(i));
    cp.shares[kp.id][1] = kp.share1;
    Party di{di_id(i), Role::kDi, {}, {}};
    di.shares[kp.id][2] = kp.share2;
    if (di.id == defense_helper) {
      di.shares[kCommonKeyId][2] = common.share2;
      helper_found = true;
    }
    set.parties_[di.id] = std::move(di);
  }
  if (!helper_found) {
    throw ConfigError("defense helper '" + defense_helper + "' is not a registered data island");
  }
  set.parties_[cp.id] = std::move(cp);
  set.parties_[du.id] = std::move(du);

  // distribution sanity: no party holds both shares of the same trapdoor
  for (const auto& [id, party] : set.parties_) {
    for (const auto& [key_id, held] : party.shares) {
      if (held.contains(1) && held.contains(2)) {
        throw ConfigError("party '" + id + "' holds both shares of key '" + key_id + "'");
      }
    }
  }
  return set;
}

PartySet PartySet::keygen_and_distribute(unsigned key_bits, int n_dis, uint64_t seed,
                                         const std::string& defense_helper) {
  return distribute(generate_key_material(key_bits, n_dis, seed), n_dis, defense_helper);
}

const crypto::PublicKey& PartySet::public_key(const std::string& key_id) const {
  auto it = public_keys_.find(key_id);
  if (it == public_keys_.end()) {
    throw KeyMismatchError("no registered public key with id '" + key_id + "'");
  }
  return it->second;
}

const Party& PartySet::at(const std::string& party_id) const {
  auto it = parties_.find(party_id);
  if (it == parties_.end()) throw ConfigError("no party with id '" + party_id + "'");
  return it->second;
}

Party& PartySet::at(const std::string& party_id) {
  auto it = parties_.find(party_id);
  if (it == parties_.end()) throw ConfigError("no party with id '" + party_id + "'");
  return it->second;
}

std::vector<std::string> PartySet::party_ids() const {
  std::vector<std::string> ids;
  ids.reserve(parties_.size());
  for (const auto& [id, _] : parties_) ids.push_back(id);
  return ids;
}

}  // namespace fedrf::sim
