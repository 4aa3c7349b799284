#include "sparsecf/sampling.hpp"

#include <cmath>
#include <string>

namespace sparsecf {

CategoricalSampler::CategoricalSampler(std::vector<double> weights,
                                       std::uint64_t seed)
    : weights_(std::move(weights)), rng_(seed) {
  const std::size_t n = weights_.size();
  if (n == 0) throw ConfigError("categorical sampler needs >= 1 weight");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ConfigError("categorical weights must be finite and >= 0");
    }
    total += w;
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw ConfigError("categorical weights must have a positive finite sum");
  }

  prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = weights_[i] * static_cast<double>(n) / total;
  }
  std::vector<std::uint32_t> small, large;
  small.reserve(n);
  large.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const std::uint32_t s = small.back();
    small.pop_back();
    const std::uint32_t l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (std::uint32_t i : large) prob_[i] = 1.0;
  for (std::uint32_t i : small) prob_[i] = 1.0;  // numerical leftovers
}

std::size_t CategoricalSampler::draw() {
  const std::size_t col = static_cast<std::size_t>(rng_.below(prob_.size()));
  return rng_.uniform() < prob_[col] ? col : alias_[col];
}

namespace {

std::vector<PairKey> pair_support(const CooccurrenceStats& stats) {
  if (stats.pairs().empty()) {
    throw ConfigError("pair sampler needs at least one co-purchase");
  }
  std::vector<PairKey> support;
  support.reserve(stats.pairs().size());
  for (const auto& kv : stats.pairs()) support.push_back(kv.first);
  return support;
}

std::vector<double> pair_weights(const CooccurrenceStats& stats) {
  std::vector<double> weights;
  weights.reserve(stats.pairs().size());
  for (const auto& kv : stats.pairs()) {
    weights.push_back(static_cast<double>(kv.second));
  }
  return weights;
}

std::vector<ItemId> item_support(const CooccurrenceStats& stats) {
  std::vector<ItemId> support;
  for (ItemId t = 0; t < stats.n_items(); ++t) {
    if (stats.item_count(t) > 0) support.push_back(t);
  }
  if (support.empty()) {
    throw ConfigError("item sampler needs at least one purchased item");
  }
  return support;
}

std::vector<double> item_weights(const CooccurrenceStats& stats) {
  std::vector<double> weights;
  for (ItemId t = 0; t < stats.n_items(); ++t) {
    const std::int64_t c = stats.item_count(t);
    if (c > 0) weights.push_back(std::sqrt(static_cast<double>(c)));
  }
  return weights;
}

}  // namespace

PairSampler::PairSampler(const CooccurrenceStats& stats, std::uint64_t seed)
    : support_(pair_support(stats)), sampler_(pair_weights(stats), seed) {}

PairSampler::PairSampler(std::vector<PairKey> support,
                         std::vector<double> weights, std::uint64_t seed)
    : support_(std::move(support)), sampler_(std::move(weights), seed) {
  if (support_.size() != sampler_.size()) {
    throw ConfigError("pair sampler support and weights differ in length");
  }
}

ItemSampler::ItemSampler(const CooccurrenceStats& stats, std::uint64_t seed)
    : support_(item_support(stats)), sampler_(item_weights(stats), seed) {}

namespace {

void check_batch_sizes(std::int64_t k_cp, std::int64_t k_s, std::int64_t k_r) {
  if (k_cp < 1 || k_s < 1 || k_r < 1) {
    throw ConfigError("batch sizes must be >= 1");
  }
}

}  // namespace

TrainingBatch sample_mc_batch(PairSampler& pairs, ItemSampler& items,
                              std::int64_t k_cp, std::int64_t k_s,
                              std::int64_t k_r) {
  check_batch_sizes(k_cp, k_s, k_r);
  TrainingBatch batch;
  batch.k_cp = k_cp;
  batch.k_s = k_s;
  batch.k_r = k_r;
  batch.positives.reserve(static_cast<std::size_t>(k_cp));
  for (std::int64_t i = 0; i < k_cp; ++i) batch.positives.push_back(pairs.draw());
  batch.negatives.reserve(static_cast<std::size_t>(k_s * k_r));
  for (std::int64_t i = 0; i < k_s; ++i) {
    const ItemId s = items.draw();
    for (std::int64_t j = 0; j < k_r; ++j) {
      batch.negatives.push_back(pair_key(s, items.draw()));
    }
  }
  return batch;
}

TrainingBatch sample_per_seed_batch(PairSampler& pairs, ItemSampler& items,
                                    std::int64_t k_cp, std::int64_t k_r) {
  check_batch_sizes(k_cp, 1, k_r);
  TrainingBatch batch;
  batch.k_cp = k_cp;
  batch.k_s = k_cp;  // every positive contributes its own seed
  batch.k_r = k_r;
  batch.positives.reserve(static_cast<std::size_t>(k_cp));
  batch.negatives.reserve(static_cast<std::size_t>(k_cp * k_r));
  for (std::int64_t i = 0; i < k_cp; ++i) {
    const PairKey pos = pairs.draw();
    batch.positives.push_back(pos);
    const ItemId s = pair_seed(pos);
    for (std::int64_t j = 0; j < k_r; ++j) {
      batch.negatives.push_back(pair_key(s, items.draw()));
    }
  }
  return batch;
}

}  // namespace sparsecf
