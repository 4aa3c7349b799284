#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace sparsecf {

// Deterministic random source.  The engine (std::mt19937_64) has a fully
// specified output sequence, and every mapping to doubles / bounded ints /
// permutations is implemented here rather than through std::*_distribution,
// whose algorithms vary between standard libraries.  Same seed, same stream
// of values, on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform in [0, n) without modulo bias (rejection sampling).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Fisher-Yates.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derives an independent stream seed from a master seed and a stream tag.
  // splitmix64 finalizer; distinct tags give well-separated streams.
  static std::uint64_t derive(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

// Stream tags used to derive per-component seeds from one master seed.
namespace seed_stream {
constexpr std::uint64_t pair_sampler = 1;
constexpr std::uint64_t item_sampler = 2;
constexpr std::uint64_t shuffle = 3;
constexpr std::uint64_t validation = 4;
constexpr std::uint64_t init = 5;
constexpr std::uint64_t pool = 6;
constexpr std::uint64_t corpus = 7;
constexpr std::uint64_t eval = 8;
constexpr std::uint64_t train = 9;
}  // namespace seed_stream

}  // namespace sparsecf
