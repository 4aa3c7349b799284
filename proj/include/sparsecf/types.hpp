#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sparsecf {

using ItemId = std::uint32_t;
using UserId = std::uint32_t;

// Ordered item pair packed into one key: seed in the high half, candidate in
// the low half.  Sorting keys sorts by (seed, candidate).
using PairKey = std::uint64_t;

constexpr PairKey pair_key(ItemId seed, ItemId cand) {
  return (static_cast<PairKey>(seed) << 32) | cand;
}
constexpr ItemId pair_seed(PairKey k) { return static_cast<ItemId>(k >> 32); }
constexpr ItemId pair_cand(PairKey k) {
  return static_cast<ItemId>(k & 0xffffffffu);
}

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input data (bad transaction line, bad catalog record, ...).
class IngestError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration: out-of-range options, unknown keys, missing files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Operation called outside its domain (unknown item, zero counts, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Training diverged or produced non-finite values.
class TrainError : public Error {
 public:
  using Error::Error;
};

}  // namespace sparsecf
