#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedrf/forest.hpp"
#include "fedrf/rng.hpp"

namespace fedrf::attack {

/// Exact rational in [0, 1]; keeps counts like floor(alpha*n) and
/// ceil(beta*size) free of floating-point edge cases (1/3 * 3 == 1).
struct Fraction {
  int64_t num = 0;
  int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool is_zero() const { return num == 0; }
  int64_t floor_times(int64_t n) const { return (num * n) / den; }
  int64_t ceil_times(int64_t n) const { return (num * n + den - 1) / den; }

  /// Parses "1/3", "0.5" or "0".  Decimals become ratios over a power of ten.
  static Fraction parse(const std::string& text);
  std::string to_string() const;
};

struct AttackConfig {
  Fraction alpha;  // fraction of malicious data islands, < 1
  Fraction beta;   // cloned-and-flipped fraction of a shard, in (0, 1)
  uint64_t seed = 0;
  /// When non-empty, overrides the random choice of malicious islands.
  std::vector<int> malicious_override;
};

/// Picks floor(alpha*n) distinct island indices (1-based), deterministic
/// under the stream.
std::vector<int> select_malicious(int n_dis, const Fraction& alpha, Rng& rng);

/// Label-flip poisoning: clones ceil(beta*|shard|) randomly chosen samples,
/// flips each clone's label (y -> 0 - y) and appends the clones.
forest::Shard poison_shard(const forest::Shard& shard, const Fraction& beta, Rng& rng);

struct PoisonEntry {
  int di = 0;
  size_t clean_size = 0;
  size_t injected = 0;
  size_t flipped_pos_to_neg = 0;
  size_t flipped_neg_to_pos = 0;
};

struct PoisonReport {
  Fraction alpha;
  Fraction beta;
  std::vector<int> malicious;
  std::vector<PoisonEntry> entries;

  std::string to_text() const;
};

}  // namespace fedrf::attack
