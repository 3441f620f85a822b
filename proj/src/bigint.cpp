#include "fedrf/bigint.hpp"

#include <array>
#include <cstring>
#include <vector>

#include "fedrf/errors.hpp"

namespace fedrf {

Bigint Bigint::from_u64(uint64_t x) {
  Bigint r;
  mpz_import(r.v_, 1, 1, sizeof(x), 0, 0, &x);
  return r;
}

Bigint Bigint::from_i64(int64_t x) {
  if (x >= 0) return from_u64(static_cast<uint64_t>(x));
  Bigint r = from_u64(static_cast<uint64_t>(-(x + 1)) + 1);
  mpz_neg(r.v_, r.v_);
  return r;
}

Bigint Bigint::from_hex(const std::string& s) {
  Bigint r;
  if (s.empty() || mpz_set_str(r.v_, s.c_str(), 16) != 0) {
    throw ParseError("invalid hex integer: '" + s + "'");
  }
  return r;
}

Bigint Bigint::from_dec(const std::string& s) {
  Bigint r;
  if (s.empty() || mpz_set_str(r.v_, s.c_str(), 10) != 0) {
    throw ParseError("invalid decimal integer: '" + s + "'");
  }
  return r;
}

std::string Bigint::to_hex() const {
  std::vector<char> buf(mpz_sizeinbase(v_, 16) + 2);
  mpz_get_str(buf.data(), 16, v_);
  return std::string(buf.data());
}

std::string Bigint::to_dec() const {
  std::vector<char> buf(mpz_sizeinbase(v_, 10) + 2);
  mpz_get_str(buf.data(), 10, v_);
  return std::string(buf.data());
}

int64_t Bigint::to_i64() const {
  if (!mpz_fits_slong_p(v_)) {
    throw DomainError("value does not fit a signed 64-bit integer");
  }
  return static_cast<int64_t>(mpz_get_si(v_));
}

Bigint operator+(const Bigint& a, const Bigint& b) {
  Bigint r;
  mpz_add(r.v_, a.v_, b.v_);
  return r;
}

Bigint operator-(const Bigint& a, const Bigint& b) {
  Bigint r;
  mpz_sub(r.v_, a.v_, b.v_);
  return r;
}

Bigint operator*(const Bigint& a, const Bigint& b) {
  Bigint r;
  mpz_mul(r.v_, a.v_, b.v_);
  return r;
}

Bigint operator/(const Bigint& a, const Bigint& b) {
  if (b.is_zero()) throw DomainError("division by zero");
  Bigint r;
  mpz_tdiv_q(r.v_, a.v_, b.v_);
  return r;
}

Bigint operator%(const Bigint& a, const Bigint& b) {
  if (b.is_zero()) throw DomainError("division by zero");
  Bigint r;
  mpz_tdiv_r(r.v_, a.v_, b.v_);
  return r;
}

Bigint Bigint::mod(const Bigint& m) const {
  if (m.sign() <= 0) throw DomainError("modulus must be positive");
  Bigint r;
  mpz_mod(r.v_, v_, m.v_);
  return r;
}

Bigint Bigint::pow_mod(const Bigint& exp, const Bigint& m) const {
  if (exp.sign() < 0) throw DomainError("negative exponent");
  if (m.sign() <= 0) throw DomainError("modulus must be positive");
  Bigint r;
  mpz_powm(r.v_, v_, exp.v_, m.v_);
  return r;
}

Bigint Bigint::invert_mod(const Bigint& m) const {
  Bigint r;
  if (mpz_invert(r.v_, v_, m.v_) == 0) {
    throw DomainError("value is not invertible modulo the given modulus");
  }
  return r;
}

Bigint Bigint::gcd(const Bigint& o) const {
  Bigint r;
  mpz_gcd(r.v_, v_, o.v_);
  return r;
}

Bigint Bigint::divexact(const Bigint& d) const {
  if (!divisible_by(d)) throw DomainError("inexact division");
  Bigint r;
  mpz_divexact(r.v_, v_, d.v_);
  return r;
}

bool Bigint::divisible_by(const Bigint& d) const {
  return mpz_divisible_p(v_, d.v_) != 0;
}

Bigint Bigint::shl(size_t bits) const {
  Bigint r;
  mpz_mul_2exp(r.v_, v_, bits);
  return r;
}

Bigint Bigint::random_bits(Rng& rng, size_t bits) {
  if (bits == 0) return Bigint();
  size_t words = (bits + 63) / 64;
  std::vector<uint64_t> raw(words);
  for (auto& w : raw) w = rng.next_u64();
  size_t top_bits = bits % 64;
  if (top_bits != 0) raw[words - 1] &= (~0ull >> (64 - top_bits));
  Bigint r;
  mpz_import(r.v_, words, -1, sizeof(uint64_t), 0, 0, raw.data());
  return r;
}

Bigint Bigint::random_below(Rng& rng, const Bigint& bound) {
  if (bound.sign() <= 0) throw DomainError("random bound must be positive");
  size_t bits = bound.bit_length();
  for (;;) {
    Bigint v = random_bits(rng, bits);
    if (v < bound) return v;
  }
}

namespace {

const std::vector<uint32_t>& small_primes() {
  static const std::vector<uint32_t> table = [] {
    std::vector<uint32_t> primes;
    std::array<bool, 2000> sieve{};
    for (uint32_t i = 2; i < sieve.size(); i++) {
      if (sieve[i]) continue;
      primes.push_back(i);
      for (uint32_t j = i * i; j < sieve.size(); j += i) sieve[j] = true;
    }
    return primes;
  }();
  return table;
}

}  // namespace

bool is_probable_prime(const Bigint& n, int rounds, Rng& rng) {
  if (n < Bigint(2)) return false;
  for (uint32_t p : small_primes()) {
    Bigint bp(static_cast<long>(p));
    if (n == bp) return true;
    if (n.divisible_by(bp)) return false;
  }
  // n - 1 = d * 2^s with d odd
  Bigint n_minus_1 = n - Bigint(1);
  Bigint d = n_minus_1;
  size_t s = 0;
  while (!d.is_odd()) {
    d = d / Bigint(2);
    s++;
  }
  Bigint n_minus_3 = n - Bigint(3);
  for (int i = 0; i < rounds; i++) {
    Bigint a = Bigint(2) + Bigint::random_below(rng, n_minus_3);
    Bigint x = a.pow_mod(d, n);
    if (x == Bigint(1) || x == n_minus_1) continue;
    bool witness = true;
    for (size_t j = 0; j + 1 < s; j++) {
      x = (x * x).mod(n);
      if (x == n_minus_1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

Bigint random_prime(Rng& rng, size_t bits, int mr_rounds) {
  if (bits < 8) throw DomainError("prime size too small");
  // top two bits set so the product of two such primes has exact bit length
  Bigint top = Bigint(3).shl(bits - 2);
  for (;;) {
    Bigint c = top + Bigint::random_bits(rng, bits - 2);
    if (!c.is_odd()) c = c + Bigint(1);
    if (is_probable_prime(c, mr_rounds, rng)) return c;
  }
}

}  // namespace fedrf
