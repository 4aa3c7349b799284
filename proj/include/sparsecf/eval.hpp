#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "sparsecf/nn.hpp"
#include "sparsecf/types.hpp"

namespace sparsecf {

// One-true-item ranking benchmark: for each (seed, true co-purchase) pair,
// the true item is ranked against a shared random candidate pool drawn from
// an item universe disjoint from training items.
struct RankingTask {
  std::vector<std::pair<ItemId, ItemId>> seeds;  // (seed, true item)
  std::vector<ItemId> pool;
  std::size_t pool_size = 0;
};

// Samples `pool_size` items without replacement from `universe` (minus each
// seed's true item at scoring time; the pool itself may contain true items
// of other seeds).  Every universe item must be absent from `train_items`
// and every eval pair must reference universe items (DomainError otherwise).
RankingTask build_ranking_task(
    const std::unordered_set<ItemId>& train_items,
    std::span<const std::pair<ItemId, ItemId>> eval_pairs,
    std::span<const ItemId> universe, std::size_t pool_size,
    std::uint64_t seed);

// Full candidate ordering: descending score, ties by ascending item id.
// Returns (item, rank) with ranks 1..n in rank order.
std::vector<std::pair<ItemId, std::size_t>> rank_candidates(
    const PairScorer& model, ItemId seed, std::span<const ItemId> candidates);

struct RankingReport {
  std::size_t n_seeds = 0;
  std::size_t pool_size = 0;
  std::vector<std::size_t> ranks;  // per seed, rank of the true item
  std::map<int, double> recall;    // k -> recall@k
  double mrr = 0.0;
};

// Ranks each seed's true item against pool + true item (true item joins the
// candidate list if the pool does not already contain it).  Rank is computed
// by counting candidates ordered ahead of the true item, which must agree
// with rank_candidates' full sort.
RankingReport evaluate_ranking(const PairScorer& model,
                               const RankingTask& task,
                               std::span<const int> ks, int workers = 1);

double recall_at_k(std::span<const std::size_t> ranks, int k);
double mrr(std::span<const std::size_t> ranks);  // DomainError on empty

double rmse(std::span<const double> xs, std::span<const double> ys);
// Pearson correlation of tie-averaged ranks; DomainError when either side
// has zero rank variance or fewer than 2 entries.
double spearman(std::span<const double> xs, std::span<const double> ys);

// Deterministic seed-keyed uniform scorer: the random ranking baseline.
class RandomScorer : public PairScorer {
 public:
  explicit RandomScorer(std::uint64_t seed) : seed_(seed) {}
  double score(ItemId seed, ItemId cand) const override;

 private:
  std::uint64_t seed_;
};

// Items at the requested positions (0-based) of the universe sorted by
// ascending Euclidean distance between item embeddings, ties by item id.
// Position at or beyond the universe size is a DomainError.
struct NeighborEntry {
  std::size_t position = 0;
  ItemId item = 0;
  double distance = 0.0;
};
std::vector<NeighborEntry> nearest_neighbors(
    const DcfModel& model, const ItemCatalog& catalog, ItemId anchor,
    std::span<const ItemId> universe, std::span<const std::size_t> positions);

// JSON report: {"n_seeds", "pool_size", "recall": {"k": v}, "mrr", "ranks"}.
void write_ranking_report_json(const std::string& path,
                               const RankingReport& report);

}  // namespace sparsecf
