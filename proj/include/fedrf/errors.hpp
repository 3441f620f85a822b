#pragma once

#include <stdexcept>
#include <string>

namespace fedrf {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A ciphertext, trapdoor share or partial decryption was combined with
/// material from a different key.
class KeyMismatchError : public Error {
  using Error::Error;
};

/// A plaintext fell outside the encodable domain, or a decryption did not
/// produce a well-formed value (e.g. inconsistent decryption shares).
class DomainError : public Error {
  using Error::Error;
};

/// A party is missing the trapdoor share a protocol step requires.
class ProtocolError : public Error {
  using Error::Error;
};

/// Invalid key-generation or experiment parameters.
class ConfigError : public Error {
  using Error::Error;
};

/// Malformed input file (dataset, schema, key file, forest dump).
class ParseError : public Error {
  using Error::Error;
};

/// The defense rejected every local model; the message carries the
/// per-model diagnostics so a misconfigured threshold is visible.
class EmptyFederationError : public Error {
  using Error::Error;
};

}  // namespace fedrf
