#ifndef SMAE_COMMON_HPP
#define SMAE_COMMON_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace smae {

using index_t = std::int64_t;

// Error taxonomy. Exit-code mapping lives in the CLI: config -> 2,
// numeric -> 3, I/O and format -> 4.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeError : Error {
  using Error::Error;
};

// Violated call contract (bad plan/latent pairing, non-scalar backward, ...).
struct ContractError : Error {
  using Error::Error;
};

// Invalid numeric parameter (L <= 0, sigma < 0, ...).
struct ParamError : Error {
  using Error::Error;
};

struct NumericError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

// Malformed file contents; message carries the byte offset where known.
struct FormatError : Error {
  using Error::Error;
};

}  // namespace smae

#endif  // SMAE_COMMON_HPP
