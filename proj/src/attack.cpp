#include "fedrf/attack.hpp"

#include <algorithm>
#include <sstream>

#include "fedrf/errors.hpp"

namespace fedrf::attack {

Fraction Fraction::parse(const std::string& text) {
  if (text.empty()) throw ParseError("empty fraction");
  size_t slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      int64_t num = std::stoll(text.substr(0, slash));
      int64_t den = std::stoll(text.substr(slash + 1));
      if (den <= 0 || num < 0) throw ParseError("fraction '" + text + "' out of range");
      return Fraction{num, den};
    }
    size_t dot = text.find('.');
    if (dot == std::string::npos) {
      int64_t num = std::stoll(text);
      if (num < 0) throw ParseError("fraction '" + text + "' out of range");
      return Fraction{num, 1};
    }
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    size_t frac_digits = text.size() - dot - 1;
    if (frac_digits == 0 || frac_digits > 9) {
      throw ParseError("fraction '" + text + "' has an unsupported precision");
    }
    int64_t num = std::stoll(digits);
    int64_t den = 1;
    for (size_t i = 0; i < frac_digits; i++) den *= 10;
    if (num < 0) throw ParseError("fraction '" + text + "' out of range");
    return Fraction{num, den};
  } catch (const std::invalid_argument&) {
    throw ParseError("cannot parse fraction '" + text + "'");
  } catch (const std::out_of_range&) {
    throw ParseError("cannot parse fraction '" + text + "'");
  }
}

std::string Fraction::to_string() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

std::vector<int> select_malicious(int n_dis, const Fraction& alpha, Rng& rng) {
  if (n_dis < 1) throw ConfigError("need at least one data island");
  if (alpha.num * 1 >= alpha.den) throw ConfigError("alpha must be below 1");
  auto count = static_cast<int>(alpha.floor_times(n_dis));
  std::vector<int> ids(static_cast<size_t>(n_dis));
  for (int i = 0; i < n_dis; i++) ids[static_cast<size_t>(i)] = i + 1;
  for (int i = 0; i < count; i++) {
    auto j = static_cast<int>(rng.below(static_cast<uint64_t>(n_dis - i))) + i;
    std::swap(ids[static_cast<size_t>(i)], ids[static_cast<size_t>(j)]);
  }
  ids.resize(static_cast<size_t>(count));
  std::sort(ids.begin(), ids.end());
  return ids;
}

forest::Shard poison_shard(const forest::Shard& shard, const Fraction& beta, Rng& rng) {
  if (beta.num <= 0 || beta.num >= beta.den) {
    throw ConfigError("beta must lie strictly between 0 and 1");
  }
  if (shard.empty()) throw ConfigError("cannot poison an empty shard");
  auto inject = static_cast<size_t>(beta.ceil_times(static_cast<int64_t>(shard.size())));
  // choose distinct source samples to clone
  std::vector<size_t> idx(shard.size());
  for (size_t i = 0; i < shard.size(); i++) idx[i] = i;
  for (size_t i = 0; i < inject; i++) {
    size_t j = rng.below(shard.size() - i) + i;
    std::swap(idx[i], idx[j]);
  }
  forest::Shard out = shard;
  out.reserve(shard.size() + inject);
  for (size_t i = 0; i < inject; i++) {
    forest::Sample clone = shard[idx[i]];
    clone.label = 0 - clone.label;
    out.push_back(std::move(clone));
  }
  return out;
}

std::string PoisonReport::to_text() const {
  std::ostringstream out;
  out << "poison-report alpha=" << alpha.to_string() << " beta=" << beta.to_string()
      << " malicious=";
  if (malicious.empty()) out << "-";
  for (size_t i = 0; i < malicious.size(); i++) {
    if (i) out << ";";
    out << malicious[i];
  }
  out << "\n";
  for (const auto& e : entries) {
    out << "di=" << e.di << " clean=" << e.clean_size << " injected=" << e.injected
        << " flips_pos_to_neg=" << e.flipped_pos_to_neg
        << " flips_neg_to_pos=" << e.flipped_neg_to_pos << "\n";
  }
  return out.str();
}

}  // namespace fedrf::attack
