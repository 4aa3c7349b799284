#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sparsecf/types.hpp"

namespace sparsecf {

class CooccurrenceStats;
struct TrainingBatch;

// Numerically stable sigmoid and log-sigmoid.  log_sigmoid never evaluates
// log(sigmoid(x)) directly: it uses min(x, 0) - log1p(exp(-|x|)), which is
// exact in both tails (no overflow for large |x|, no log(0) underflow).
double sigmoid(double x);
double log_sigmoid(double x);

// Objective values follow the "reward" sign convention: larger is better,
// and the closed-form optima below are maximisers.  Training code minimises
// the negation; that negation happens exactly once, inside the SGD update
// in train.cpp, so all functions here and all gradients share one sign.
//
// Contribution of a single ordered pair:
//   n_cp * log_sigmoid(h) + sqrt(n_d_s * n_d_r) * log_sigmoid(-h)
// Counts must satisfy n_cp >= 0, n_d_s >= 1, n_d_r >= 1.
double pair_objective(double h, std::int64_t n_cp, std::int64_t n_d_s,
                      std::int64_t n_d_r);

// d/dh of one weighted objective term: weight * log_sigmoid(h) for a
// positive label, weight * log_sigmoid(-h) for a negative one.
enum class PairLabel { positive, negative };
double objective_gradient_wrt_h(PairLabel label, double h, double weight);

// Maximiser of pair_objective over h.  Finite value log(n_cp /
// sqrt(n_d_s * n_d_r)) when n_cp > 0; the distinguished negative-infinity
// sentinel when n_cp == 0 (the objective is then strictly decreasing in h).
// Zero or negative item counts are a DomainError.
class OptimalH {
 public:
  static OptimalH finite(double v) { return OptimalH(v, false); }
  static OptimalH neg_inf() { return OptimalH(0.0, true); }

  bool is_neg_inf() const { return neg_inf_; }
  // Finite value; calling this on the sentinel is a DomainError.
  double value() const;
  // Sentinel compares below every finite value.
  friend bool operator<(const OptimalH& a, const OptimalH& b) {
    if (a.neg_inf_) return !b.neg_inf_;
    if (b.neg_inf_) return false;
    return a.value_ < b.value_;
  }
  friend bool operator==(const OptimalH& a, const OptimalH& b) {
    return a.neg_inf_ == b.neg_inf_ && (a.neg_inf_ || a.value_ == b.value_);
  }

 private:
  OptimalH(double v, bool neg_inf) : value_(v), neg_inf_(neg_inf) {}
  double value_;
  bool neg_inf_;
};

OptimalH optimal_h(std::int64_t n_cp, std::int64_t n_d_s, std::int64_t n_d_r);

// Maximiser of the expected subsampled objective for a pair drawn k_cp times
// from the co-purchase distribution against k_s * k_r sqrt-count negatives:
// the exact optimum shifted by log(k_cp / (k_s * k_r)) + log(z^2 / |CP|).
// Sampling sizes must be positive; z and total_pairs positive.
OptimalH mc_optimal_h(std::int64_t n_cp, std::int64_t n_d_s,
                      std::int64_t n_d_r, std::int64_t k_cp, std::int64_t k_s,
                      std::int64_t k_r, double z, std::int64_t total_pairs);

// The shift term alone.
double mc_shift(std::int64_t k_cp, std::int64_t k_s, std::int64_t k_r,
                double z, std::int64_t total_pairs);

using ScoreFn = std::function<double(ItemId, ItemId)>;

// Exact objective summed over all ordered pairs (including self-pairs) of
// `items`, with counts from `stats`.  Quadratic in the item count; refuses
// to evaluate more than max_pair_evals pairs (DomainError).
double full_objective(const ScoreFn& score, const CooccurrenceStats& stats,
                      std::span<const ItemId> items,
                      std::uint64_t max_pair_evals = 100'000'000);

// Subsampled objective: unit-weight log_sigmoid(h) over batch positives plus
// unit-weight log_sigmoid(-h) over batch negatives.
double mc_objective(const ScoreFn& score, const TrainingBatch& batch);

}  // namespace sparsecf
