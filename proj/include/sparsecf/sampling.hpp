#pragma once

#include <cstdint>
#include <vector>

#include "sparsecf/corpus.hpp"
#include "sparsecf/rng.hpp"
#include "sparsecf/types.hpp"

namespace sparsecf {

// Walker/Vose alias table: O(n) construction, O(1) draws from a fixed
// categorical distribution.  Weights must be non-negative with a positive,
// finite total (ConfigError otherwise); zero-weight entries are never drawn.
class CategoricalSampler {
 public:
  CategoricalSampler(std::vector<double> weights, std::uint64_t seed);

  std::size_t draw();
  std::size_t size() const { return prob_.size(); }
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<double> weights_;
  std::vector<double> prob_;        // per-column acceptance threshold
  std::vector<std::uint32_t> alias_;
  Rng rng_;
};

// Draws ordered pairs (s, r) with probability n_cp(s, r) / |CP|.
class PairSampler {
 public:
  PairSampler(const CooccurrenceStats& stats, std::uint64_t seed);
  // Explicit support and weights (e.g. with validation pairs held out).
  PairSampler(std::vector<PairKey> support, std::vector<double> weights,
              std::uint64_t seed);
  PairKey draw() { return support_[sampler_.draw()]; }
  std::size_t support_size() const { return support_.size(); }

 private:
  std::vector<PairKey> support_;
  CategoricalSampler sampler_;
};

// Draws items with probability sqrt(n_d(t)) / z over purchased items.
class ItemSampler {
 public:
  ItemSampler(const CooccurrenceStats& stats, std::uint64_t seed);
  ItemId draw() { return support_[sampler_.draw()]; }
  std::size_t support_size() const { return support_.size(); }

 private:
  std::vector<ItemId> support_;
  CategoricalSampler sampler_;
};

// One epoch's worth of subsampled training examples.
struct TrainingBatch {
  std::vector<PairKey> positives;
  std::vector<PairKey> negatives;
  std::int64_t k_cp = 0;
  std::int64_t k_s = 0;
  std::int64_t k_r = 0;
};

// k_cp positives from the pair sampler; k_s * k_r negatives as independent
// (seed, candidate) item draws.
TrainingBatch sample_mc_batch(PairSampler& pairs, ItemSampler& items,
                              std::int64_t k_cp, std::int64_t k_s,
                              std::int64_t k_r);

// k_cp positives; for each, k_r negatives that reuse the positive's seed
// with an independently drawn candidate.
TrainingBatch sample_per_seed_batch(PairSampler& pairs, ItemSampler& items,
                                    std::int64_t k_cp, std::int64_t k_r);

}  // namespace sparsecf
