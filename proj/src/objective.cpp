#include "sparsecf/objective.hpp"

#include <cmath>
#include <string>

#include "sparsecf/corpus.hpp"
#include "sparsecf/sampling.hpp"

namespace sparsecf {

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) {
  return std::fmin(x, 0.0) - std::log1p(std::exp(-std::fabs(x)));
}

namespace {

void check_counts(std::int64_t n_cp, std::int64_t n_d_s, std::int64_t n_d_r) {
  if (n_cp < 0) {
    throw DomainError("co-purchase count must be >= 0, got " +
                      std::to_string(n_cp));
  }
  if (n_d_s < 1 || n_d_r < 1) {
    throw DomainError("purchase counts must be >= 1, got " +
                      std::to_string(n_d_s) + " and " + std::to_string(n_d_r));
  }
}

}  // namespace

double pair_objective(double h, std::int64_t n_cp, std::int64_t n_d_s,
                      std::int64_t n_d_r) {
  check_counts(n_cp, n_d_s, n_d_r);
  const double w_neg = std::sqrt(static_cast<double>(n_d_s)) *
                       std::sqrt(static_cast<double>(n_d_r));
  return static_cast<double>(n_cp) * log_sigmoid(h) + w_neg * log_sigmoid(-h);
}

double objective_gradient_wrt_h(PairLabel label, double h, double weight) {
  // d/dh log_sigmoid(h) = sigmoid(-h); d/dh log_sigmoid(-h) = -sigmoid(h).
  if (label == PairLabel::positive) return weight * sigmoid(-h);
  return -weight * sigmoid(h);
}

double OptimalH::value() const {
  if (neg_inf_) {
    throw DomainError("optimal score is -infinity (no co-purchases)");
  }
  return value_;
}

OptimalH optimal_h(std::int64_t n_cp, std::int64_t n_d_s, std::int64_t n_d_r) {
  check_counts(n_cp, n_d_s, n_d_r);
  if (n_cp == 0) return OptimalH::neg_inf();
  const double cos = static_cast<double>(n_cp) /
                     (std::sqrt(static_cast<double>(n_d_s)) *
                      std::sqrt(static_cast<double>(n_d_r)));
  return OptimalH::finite(std::log(cos));
}

double mc_shift(std::int64_t k_cp, std::int64_t k_s, std::int64_t k_r,
                double z, std::int64_t total_pairs) {
  if (k_cp < 1 || k_s < 1 || k_r < 1) {
    throw DomainError("sampling sizes must be >= 1");
  }
  if (!(z > 0.0) || total_pairs < 1) {
    throw DomainError("mc_shift needs z > 0 and at least one co-purchase");
  }
  return std::log(static_cast<double>(k_cp) /
                  (static_cast<double>(k_s) * static_cast<double>(k_r))) +
         std::log(z * z / static_cast<double>(total_pairs));
}

OptimalH mc_optimal_h(std::int64_t n_cp, std::int64_t n_d_s,
                      std::int64_t n_d_r, std::int64_t k_cp, std::int64_t k_s,
                      std::int64_t k_r, double z, std::int64_t total_pairs) {
  const double shift = mc_shift(k_cp, k_s, k_r, z, total_pairs);
  const OptimalH exact = optimal_h(n_cp, n_d_s, n_d_r);
  if (exact.is_neg_inf()) return exact;
  return OptimalH::finite(exact.value() + shift);
}

double full_objective(const ScoreFn& score, const CooccurrenceStats& stats,
                      std::span<const ItemId> items,
                      std::uint64_t max_pair_evals) {
  const std::uint64_t n = items.size();
  if (n * n > max_pair_evals) {
    throw DomainError("full objective over " + std::to_string(n) +
                      " items exceeds the pair evaluation budget");
  }
  double total = 0.0;
  for (ItemId s : items) {
    const double sqrt_s = std::sqrt(static_cast<double>(stats.item_count(s)));
    for (ItemId r : items) {
      const double w_neg =
          sqrt_s * std::sqrt(static_cast<double>(stats.item_count(r)));
      if (w_neg == 0.0) continue;
      const double h = score(s, r);
      const std::int64_t n_cp = stats.pair_count(s, r);
      if (n_cp > 0) total += static_cast<double>(n_cp) * log_sigmoid(h);
      total += w_neg * log_sigmoid(-h);
    }
  }
  return total;
}

double mc_objective(const ScoreFn& score, const TrainingBatch& batch) {
  double total = 0.0;
  for (PairKey k : batch.positives) {
    total += log_sigmoid(score(pair_seed(k), pair_cand(k)));
  }
  for (PairKey k : batch.negatives) {
    total += log_sigmoid(-score(pair_seed(k), pair_cand(k)));
  }
  return total;
}

}  // namespace sparsecf
