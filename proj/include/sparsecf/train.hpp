#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sparsecf/corpus.hpp"
#include "sparsecf/nn.hpp"
#include "sparsecf/sampling.hpp"
#include "sparsecf/types.hpp"

namespace sparsecf {

// Trainable pair scorer: forward caches the activations the next
// accumulate() call needs; apply_accumulated() folds the accumulated
// gradient into the parameters and resets the accumulator.
class PairModel : public PairScorer {
 public:
  // Score with caching for a subsequent accumulate().
  virtual double forward(ItemId seed, ItemId cand) = 0;
  // accumulator += coef * d(h)/d(params) at the last forward.
  virtual void accumulate(double coef) = 0;
  // params += scale * accumulator; accumulator cleared.
  virtual void apply_accumulated(double scale) = 0;
  virtual std::vector<double> snapshot() const = 0;
  virtual void restore(const std::vector<double>& params) = 0;
};

// Linear model + featurizer, generic over the featurizer's feature ids.
class LinearPairModel : public PairModel {
 public:
  using FeatureFn =
      std::function<void(ItemId, ItemId, std::vector<std::uint64_t>&)>;

  LinearPairModel(LinearModel model, FeatureFn features);
  static LinearPairModel indicator(std::size_t n_items);
  static LinearPairModel content(LinearModel model,
                                 const ContentPairFeaturizer& featurizer);

  double score(ItemId seed, ItemId cand) const override;
  double forward(ItemId seed, ItemId cand) override;
  void accumulate(double coef) override;
  void apply_accumulated(double scale) override;
  std::vector<double> snapshot() const override;
  void restore(const std::vector<double>& params) override;

  const LinearModel& model() const { return model_; }
  LinearModel& model() { return model_; }

 private:
  LinearModel model_;
  FeatureFn features_;
  std::vector<std::uint64_t> active_;
  std::map<std::uint64_t, double> acc_;
};

// DcfModel bound to a catalog for id -> features lookup.
class DcfPairModel : public PairModel {
 public:
  DcfPairModel(DcfModel& model, const ItemCatalog& catalog);

  double score(ItemId seed, ItemId cand) const override;
  double forward(ItemId seed, ItemId cand) override;
  void accumulate(double coef) override;
  void apply_accumulated(double scale) override;
  std::vector<double> snapshot() const override;
  void restore(const std::vector<double>& params) override;

 private:
  DcfModel* model_;
  const ItemCatalog* catalog_;
  PairTrace trace_;
  Gradients acc_;
  bool acc_dirty_ = false;
};

enum class LossMode { full, mc, per_seed };

struct TrainConfig {
  LossMode mode = LossMode::full;
  std::int64_t k_cp = 0;  // positives per epoch (mc, per_seed)
  std::int64_t k_s = 0;   // negative seed draws per epoch (mc)
  std::int64_t k_r = 0;   // negative candidates per seed draw (mc, per_seed)
  double learning_rate = 0.1;
  int max_epochs = 200;
  int patience = 10;
  double min_delta = 1e-5;
  std::uint64_t seed = 0;
  double validation_fraction = 0.0;  // held-out share of distinct pairs
  int minibatch = 1;
  // Full mode rescales each pair's combined positive+negative term to this
  // total weight; see Trainer notes below.
  double full_pair_mass = 10.0;
  std::int64_t val_negatives_per_pair = 4;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  std::optional<double> val_loss;
  std::optional<double> rmse;      // filled by the metrics callback
  std::optional<double> spearman;  // filled by the metrics callback
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;  // 1-based; 0 when early stopping was inactive
};

// Called after each epoch to record extra metrics into the epoch row.
using MetricsCallback = std::function<void(const PairScorer&, EpochRecord&)>;

// SGD training over one CooccurrenceStats table.
//
// full mode: one deterministic pass per epoch over all ordered item pairs
// (diagonal included).  Each pair's positive weight n_cp and negative weight
// sqrt(n_d_s * n_d_r) enter a single combined update, rescaled so the pair's
// total weight is full_pair_mass.  The rescale moves neither the per-pair
// optimum (the two weights keep their ratio) nor the fixed point, but keeps
// lr * weight inside the stable region at the published learning rate,
// where raw counts in the tens of thousands would oscillate.
//
// mc / per_seed modes: a fresh batch is sampled each epoch and examples are
// visited in shuffled order, one unit-weight SGD update per example
// (gradients averaged over `minibatch` consecutive examples).
//
// Loss sign: models maximise the reward objective, so updates ascend it;
// reported train/val losses are the negated per-example (or per-pair) means,
// so "lower is better" everywhere outside this class.
class Trainer {
 public:
  Trainer(PairModel& model, const CooccurrenceStats& stats,
          const TrainConfig& config);

  EpochRecord run_epoch();
  TrainHistory fit(const MetricsCallback& metrics = {});

  // Fixed validation batch (empty unless validation is active).
  const TrainingBatch& validation_batch() const { return val_batch_; }
  double validation_loss() const;

 private:
  double epoch_full();
  double epoch_sampled();
  void check_finite(double h, const char* where, PairKey pair);

  PairModel& model_;
  const CooccurrenceStats& stats_;
  TrainConfig config_;
  int epoch_index_ = 0;

  std::unique_ptr<PairSampler> pair_sampler_;
  std::unique_ptr<ItemSampler> item_sampler_;
  Rng shuffle_rng_;
  TrainingBatch val_batch_;
  std::vector<std::pair<PairKey, bool>> examples_;  // scratch: (pair, positive)
};

// Convenience wrapper: construct a Trainer and run fit().
TrainHistory fit_model(PairModel& model, const CooccurrenceStats& stats,
                       const TrainConfig& config,
                       const MetricsCallback& metrics = {});

// History CSV: header `epoch,train_loss,val_loss,rmse,spearman`, empty
// fields for absent values, shortest round-trip float formatting.
void write_history_csv(const std::string& path, const TrainHistory& history);

}  // namespace sparsecf
