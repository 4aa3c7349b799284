#include "sparsecf/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "sparsecf/log.hpp"
#include "sparsecf/objective.hpp"

namespace sparsecf {

// ---------------------------------------------------------------------------
// LinearPairModel

LinearPairModel::LinearPairModel(LinearModel model, FeatureFn features)
    : model_(std::move(model)), features_(std::move(features)) {}

LinearPairModel LinearPairModel::indicator(std::size_t n_items) {
  IndicatorPairFeaturizer feats(n_items);
  return LinearPairModel(
      LinearModel(feats.dim()),
      [feats](ItemId s, ItemId r, std::vector<std::uint64_t>& out) {
        out.assign(1, feats.feature(s, r));
      });
}

LinearPairModel LinearPairModel::content(
    LinearModel model, const ContentPairFeaturizer& featurizer) {
  return LinearPairModel(
      std::move(model),
      [featurizer](ItemId s, ItemId r, std::vector<std::uint64_t>& out) {
        featurizer.features(s, r, out);
      });
}

double LinearPairModel::score(ItemId seed, ItemId cand) const {
  // Local buffer keeps const scoring thread-safe for parallel evaluation.
  std::vector<std::uint64_t> feats;
  features_(seed, cand, feats);
  return model_.score(feats);
}

double LinearPairModel::forward(ItemId seed, ItemId cand) {
  features_(seed, cand, active_);
  return model_.score(active_);
}

void LinearPairModel::accumulate(double coef) {
  for (std::uint64_t f : active_) acc_[f] += coef;
}

void LinearPairModel::apply_accumulated(double scale) {
  for (const auto& [f, g] : acc_) model_.theta()[f] += scale * g;
  acc_.clear();
}

std::vector<double> LinearPairModel::snapshot() const { return model_.theta(); }

void LinearPairModel::restore(const std::vector<double>& params) {
  if (params.size() != model_.dim()) {
    throw ConfigError("parameter snapshot length mismatch");
  }
  model_.theta() = params;
}

// ---------------------------------------------------------------------------
// DcfPairModel

DcfPairModel::DcfPairModel(DcfModel& model, const ItemCatalog& catalog)
    : model_(&model), catalog_(&catalog) {}

double DcfPairModel::score(ItemId seed, ItemId cand) const {
  return model_->predict(catalog_->features(seed), catalog_->features(cand));
}

double DcfPairModel::forward(ItemId seed, ItemId cand) {
  return model_->predict(catalog_->features(seed), catalog_->features(cand),
                         trace_);
}

void DcfPairModel::accumulate(double coef) {
  model_->backward(trace_, coef, acc_);
  acc_dirty_ = true;
}

void DcfPairModel::apply_accumulated(double scale) {
  if (!acc_dirty_) return;
  model_->apply_gradients(acc_, scale);
  acc_.clear();
  acc_dirty_ = false;
}

std::vector<double> DcfPairModel::snapshot() const {
  return model_->flatten_params();
}

void DcfPairModel::restore(const std::vector<double>& params) {
  model_->unflatten_params(params);
}

// ---------------------------------------------------------------------------
// Trainer

namespace {

void validate_config(const TrainConfig& config) {
  if (config.learning_rate < 0.0 || !std::isfinite(config.learning_rate)) {
    throw ConfigError("learning rate must be finite and >= 0");
  }
  if (config.max_epochs < 0) throw ConfigError("max_epochs must be >= 0");
  if (config.patience < 1) throw ConfigError("patience must be >= 1");
  if (config.min_delta < 0.0) throw ConfigError("min_delta must be >= 0");
  if (config.minibatch < 1) throw ConfigError("minibatch must be >= 1");
  if (config.validation_fraction < 0.0 || config.validation_fraction >= 1.0) {
    throw ConfigError("validation_fraction must lie in [0, 1)");
  }
  switch (config.mode) {
    case LossMode::full:
      break;
    case LossMode::mc:
      if (config.k_cp < 1 || config.k_s < 1 || config.k_r < 1) {
        throw ConfigError("mc mode needs k_cp, k_s, k_r >= 1");
      }
      break;
    case LossMode::per_seed:
      if (config.k_cp < 1 || config.k_r < 1) {
        throw ConfigError("per_seed mode needs k_cp, k_r >= 1");
      }
      break;
  }
}

}  // namespace

Trainer::Trainer(PairModel& model, const CooccurrenceStats& stats,
                 const TrainConfig& config)
    : model_(model),
      stats_(stats),
      config_(config),
      shuffle_rng_(Rng::derive(config.seed, seed_stream::shuffle)) {
  validate_config(config_);
  if (config_.mode == LossMode::full) return;

  // Split distinct co-purchase pairs into train and validation.
  const auto& all_pairs = stats_.pairs();
  if (all_pairs.empty()) {
    throw ConfigError("sampled training needs at least one co-purchase");
  }
  std::vector<std::size_t> order(all_pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::size_t n_val = 0;
  if (config_.validation_fraction > 0.0) {
    Rng split_rng(Rng::derive(config_.seed, seed_stream::validation));
    split_rng.shuffle(order);
    n_val = static_cast<std::size_t>(config_.validation_fraction *
                                     static_cast<double>(order.size()));
    n_val = std::max<std::size_t>(n_val, 1);
    if (n_val >= order.size()) {
      throw ConfigError("validation split leaves no training pairs");
    }
  }

  std::vector<PairKey> train_support;
  std::vector<double> train_weights;
  train_support.reserve(order.size() - n_val);
  train_weights.reserve(order.size() - n_val);
  for (std::size_t i = n_val; i < order.size(); ++i) {
    train_support.push_back(all_pairs[order[i]].first);
    train_weights.push_back(
        static_cast<double>(all_pairs[order[i]].second));
  }
  // Keep the sampler's support in sorted-key order regardless of the split
  // shuffle, so equal seeds give equal draw streams.
  std::vector<std::size_t> perm(train_support.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    return train_support[a] < train_support[b];
  });
  std::vector<PairKey> sorted_support(perm.size());
  std::vector<double> sorted_weights(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    sorted_support[i] = train_support[perm[i]];
    sorted_weights[i] = train_weights[perm[i]];
  }
  pair_sampler_ = std::make_unique<PairSampler>(
      std::move(sorted_support), std::move(sorted_weights),
      Rng::derive(config_.seed, seed_stream::pair_sampler));
  item_sampler_ = std::make_unique<ItemSampler>(
      stats_, Rng::derive(config_.seed, seed_stream::item_sampler));

  if (n_val > 0) {
    // Fixed validation batch: held-out positives plus pre-sampled per-seed
    // negatives, so the early-stopping signal is not resampling noise.
    ItemSampler val_items(
        stats_, Rng::derive(config_.seed, seed_stream::validation + 100));
    std::vector<PairKey> val_pairs;
    for (std::size_t i = 0; i < n_val; ++i) {
      val_pairs.push_back(all_pairs[order[i]].first);
    }
    std::sort(val_pairs.begin(), val_pairs.end());
    for (PairKey key : val_pairs) {
      val_batch_.positives.push_back(key);
      for (std::int64_t j = 0; j < config_.val_negatives_per_pair; ++j) {
        val_batch_.negatives.push_back(
            pair_key(pair_seed(key), val_items.draw()));
      }
    }
    val_batch_.k_cp = static_cast<std::int64_t>(val_batch_.positives.size());
    val_batch_.k_s = val_batch_.k_cp;
    val_batch_.k_r = config_.val_negatives_per_pair;
  }
}

void Trainer::check_finite(double h, const char* where, PairKey pair) {
  if (std::isfinite(h)) return;
  const auto params = model_.snapshot();
  double norm = 0.0;
  for (double p : params) norm += p * p;
  throw TrainError(std::string("non-finite score in ") + where + " at epoch " +
                   std::to_string(epoch_index_) + ", pair (" +
                   std::to_string(pair_seed(pair)) + ", " +
                   std::to_string(pair_cand(pair)) + "), parameter L2 norm " +
                   std::to_string(std::sqrt(norm)));
}

double Trainer::epoch_full() {
  const std::size_t n = stats_.n_items();
  const double lr = config_.learning_rate;
  double cost = 0.0;
  std::uint64_t terms = 0;
  for (ItemId s = 0; s < n; ++s) {
    const double sqrt_s =
        std::sqrt(static_cast<double>(stats_.item_count(s)));
    if (sqrt_s == 0.0) continue;
    for (ItemId r = 0; r < n; ++r) {
      const double w_neg =
          sqrt_s * std::sqrt(static_cast<double>(stats_.item_count(r)));
      if (w_neg == 0.0) continue;
      const double w_pos = static_cast<double>(stats_.pair_count(s, r));
      const double h = model_.forward(s, r);
      check_finite(h, "full epoch", pair_key(s, r));
      cost -= w_pos * log_sigmoid(h) + w_neg * log_sigmoid(-h);
      ++terms;
      const double scale = config_.full_pair_mass / (w_pos + w_neg);
      const double dldh =
          scale * (w_pos * sigmoid(-h) - w_neg * sigmoid(h));
      model_.accumulate(dldh);
      model_.apply_accumulated(lr);
    }
  }
  return terms > 0 ? cost / static_cast<double>(terms) : 0.0;
}

double Trainer::epoch_sampled() {
  TrainingBatch batch =
      config_.mode == LossMode::mc
          ? sample_mc_batch(*pair_sampler_, *item_sampler_, config_.k_cp,
                            config_.k_s, config_.k_r)
          : sample_per_seed_batch(*pair_sampler_, *item_sampler_,
                                  config_.k_cp, config_.k_r);
  examples_.clear();
  examples_.reserve(batch.positives.size() + batch.negatives.size());
  for (PairKey k : batch.positives) examples_.emplace_back(k, true);
  for (PairKey k : batch.negatives) examples_.emplace_back(k, false);
  shuffle_rng_.shuffle(examples_);

  const double lr = config_.learning_rate;
  const int m = config_.minibatch;
  double cost = 0.0;
  int pending = 0;
  for (const auto& [key, positive] : examples_) {
    const double h = model_.forward(pair_seed(key), pair_cand(key));
    check_finite(h, "sampled epoch", key);
    cost -= positive ? log_sigmoid(h) : log_sigmoid(-h);
    model_.accumulate(positive ? sigmoid(-h) : -sigmoid(h));
    if (++pending == m) {
      model_.apply_accumulated(lr / static_cast<double>(m));
      pending = 0;
    }
  }
  if (pending > 0) {
    model_.apply_accumulated(lr / static_cast<double>(pending));
  }
  return cost / static_cast<double>(examples_.size());
}

double Trainer::validation_loss() const {
  const std::size_t total =
      val_batch_.positives.size() + val_batch_.negatives.size();
  if (total == 0) throw DomainError("no validation batch configured");
  const double obj = mc_objective(
      [this](ItemId s, ItemId r) { return model_.score(s, r); }, val_batch_);
  return -obj / static_cast<double>(total);
}

EpochRecord Trainer::run_epoch() {
  ++epoch_index_;
  EpochRecord rec;
  rec.epoch = epoch_index_;
  rec.train_loss =
      config_.mode == LossMode::full ? epoch_full() : epoch_sampled();
  if (!std::isfinite(rec.train_loss)) {
    throw TrainError("non-finite training loss at epoch " +
                     std::to_string(epoch_index_));
  }
  if (!val_batch_.positives.empty()) {
    rec.val_loss = validation_loss();
    if (!std::isfinite(*rec.val_loss)) {
      throw TrainError("non-finite validation loss at epoch " +
                       std::to_string(epoch_index_));
    }
  }
  return rec;
}

TrainHistory Trainer::fit(const MetricsCallback& metrics) {
  TrainHistory history;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_params;
  int wait = 0;
  const bool stopping = !val_batch_.positives.empty();
  for (int epoch = 1; epoch <= config_.max_epochs; ++epoch) {
    EpochRecord rec = run_epoch();
    if (metrics) metrics(model_, rec);
    history.epochs.push_back(rec);
    if (!stopping) continue;
    if (*rec.val_loss < best - config_.min_delta) {
      best = *rec.val_loss;
      history.best_epoch = epoch;
      best_params = model_.snapshot();
      wait = 0;
    } else {
      ++wait;
      if (wait >= config_.patience) {
        SCF_INFO("early stop at epoch %d (best %d, val %.6g)", epoch,
                 history.best_epoch, best);
        break;
      }
    }
  }
  if (history.best_epoch > 0 &&
      history.best_epoch < static_cast<int>(history.epochs.size())) {
    model_.restore(best_params);
  }
  return history;
}

TrainHistory fit_model(PairModel& model, const CooccurrenceStats& stats,
                       const TrainConfig& config,
                       const MetricsCallback& metrics) {
  Trainer trainer(model, stats, config);
  return trainer.fit(metrics);
}

void write_history_csv(const std::string& path, const TrainHistory& history) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write history file: " + path);
  out << "epoch,train_loss,val_loss,rmse,spearman\n";
  char buf[32];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const EpochRecord& rec : history.epochs) {
    out << rec.epoch << ',' << fmt(rec.train_loss) << ',';
    if (rec.val_loss) out << fmt(*rec.val_loss);
    out << ',';
    if (rec.rmse) out << fmt(*rec.rmse);
    out << ',';
    if (rec.spearman) out << fmt(*rec.spearman);
    out << '\n';
  }
}

}  // namespace sparsecf
