#pragma once

#include <gmp.h>

#include <cstdint>
#include <string>

#include "fedrf/rng.hpp"

namespace fedrf {

/// Value-semantic arbitrary-precision integer over GMP's mpz layer.
///
/// Only the operations the cryptosystem needs are exposed.  Randomness always
/// comes from an explicit Rng stream (never from GMP's internal generator),
/// so key generation and encryption are reproducible for a fixed seed.
class Bigint {
 public:
  Bigint() { mpz_init(v_); }
  Bigint(long x) { mpz_init_set_si(v_, x); }  // NOLINT: implicit by design
  Bigint(const Bigint& o) { mpz_init_set(v_, o.v_); }
  Bigint(Bigint&& o) noexcept {
    mpz_init(v_);
    mpz_swap(v_, o.v_);
  }
  Bigint& operator=(const Bigint& o) {
    if (this != &o) mpz_set(v_, o.v_);
    return *this;
  }
  Bigint& operator=(Bigint&& o) noexcept {
    mpz_swap(v_, o.v_);
    return *this;
  }
  ~Bigint() { mpz_clear(v_); }

  static Bigint from_u64(uint64_t x);
  static Bigint from_i64(int64_t x);
  static Bigint from_hex(const std::string& s);
  static Bigint from_dec(const std::string& s);

  std::string to_hex() const;
  std::string to_dec() const;
  /// Throws DomainError when the value does not fit a signed 64-bit integer.
  int64_t to_i64() const;

  bool is_zero() const { return mpz_sgn(v_) == 0; }
  bool is_odd() const { return mpz_odd_p(v_) != 0; }
  int sign() const { return mpz_sgn(v_); }
  /// Number of significant bits; 0 for the value 0.
  size_t bit_length() const { return is_zero() ? 0 : mpz_sizeinbase(v_, 2); }

  int cmp(const Bigint& o) const { return mpz_cmp(v_, o.v_); }
  int cmp(long o) const { return mpz_cmp_si(v_, o); }

  friend bool operator==(const Bigint& a, const Bigint& b) { return a.cmp(b) == 0; }
  friend bool operator!=(const Bigint& a, const Bigint& b) { return a.cmp(b) != 0; }
  friend bool operator<(const Bigint& a, const Bigint& b) { return a.cmp(b) < 0; }
  friend bool operator<=(const Bigint& a, const Bigint& b) { return a.cmp(b) <= 0; }
  friend bool operator>(const Bigint& a, const Bigint& b) { return a.cmp(b) > 0; }
  friend bool operator>=(const Bigint& a, const Bigint& b) { return a.cmp(b) >= 0; }
  friend bool operator==(const Bigint& a, long b) { return a.cmp(b) == 0; }
  friend bool operator!=(const Bigint& a, long b) { return a.cmp(b) != 0; }

  friend Bigint operator+(const Bigint& a, const Bigint& b);
  friend Bigint operator-(const Bigint& a, const Bigint& b);
  friend Bigint operator*(const Bigint& a, const Bigint& b);
  /// Truncating division and remainder (C semantics).
  friend Bigint operator/(const Bigint& a, const Bigint& b);
  friend Bigint operator%(const Bigint& a, const Bigint& b);

  /// Non-negative residue in [0, m); m > 0.
  Bigint mod(const Bigint& m) const;
  /// (this^exp) mod m for exp >= 0, m odd or even.
  Bigint pow_mod(const Bigint& exp, const Bigint& m) const;
  /// Modular inverse; throws DomainError when gcd(this, m) != 1.
  Bigint invert_mod(const Bigint& m) const;
  Bigint gcd(const Bigint& o) const;
  /// Exact quotient; this must be divisible by d.
  Bigint divexact(const Bigint& d) const;
  bool divisible_by(const Bigint& d) const;
  Bigint shl(size_t bits) const;

  /// Uniform value with exactly `bits` random bits (top bit not forced).
  static Bigint random_bits(Rng& rng, size_t bits);
  /// Uniform in [0, bound); bound > 0.
  static Bigint random_below(Rng& rng, const Bigint& bound);

 private:
  mpz_t v_;
};

/// Miller-Rabin with `rounds` random bases from the given stream, preceded by
/// trial division against a small-prime table.
bool is_probable_prime(const Bigint& n, int rounds, Rng& rng);

/// Random prime with exactly `bits` bits and the top two bits set.
Bigint random_prime(Rng& rng, size_t bits, int mr_rounds);

}  // namespace fedrf
