#pragma once

#include <stdexcept>
#include <string>

namespace midx {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed component values, out-of-range integers, bad byte images.
struct EncodingError : Error {
  using Error::Error;
};

// Invalid experiment/grid configuration or unparseable config text.
struct ConfigError : Error {
  using Error::Error;
};

// Operation requires an entry that does not exist.
struct NotFoundError : Error {
  using Error::Error;
};

// Operation not defined for this backend or join-type combination.
struct UnsupportedError : Error {
  using Error::Error;
};

// Internal cross-structure inconsistency (e.g. view row without its
// supporting index entry).
struct IntegrityError : Error {
  using Error::Error;
};

}  // namespace midx
