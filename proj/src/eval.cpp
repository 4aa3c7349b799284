#include "sparsecf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "sparsecf/rng.hpp"

namespace sparsecf {

using json = nlohmann::json;

RankingTask build_ranking_task(
    const std::unordered_set<ItemId>& train_items,
    std::span<const std::pair<ItemId, ItemId>> eval_pairs,
    std::span<const ItemId> universe, std::size_t pool_size,
    std::uint64_t seed) {
  if (eval_pairs.empty()) throw ConfigError("ranking task needs >= 1 seed");
  std::unordered_set<ItemId> in_universe;
  for (ItemId t : universe) {
    if (train_items.count(t) != 0) {
      throw DomainError("evaluation item " + std::to_string(t) +
                        " also appears in the training items");
    }
    in_universe.insert(t);
  }
  for (const auto& [s, r] : eval_pairs) {
    if (in_universe.count(s) == 0 || in_universe.count(r) == 0) {
      throw DomainError("evaluation pair references an item outside the "
                        "evaluation universe");
    }
  }
  if (pool_size > universe.size()) {
    throw DomainError("pool size " + std::to_string(pool_size) +
                      " exceeds the evaluation universe (" +
                      std::to_string(universe.size()) + " items)");
  }
  RankingTask task;
  task.seeds.assign(eval_pairs.begin(), eval_pairs.end());
  task.pool_size = pool_size;
  // Partial Fisher-Yates: the first pool_size entries of a seeded shuffle.
  std::vector<ItemId> items(universe.begin(), universe.end());
  std::sort(items.begin(), items.end());
  Rng rng(Rng::derive(seed, seed_stream::pool));
  for (std::size_t i = 0; i < pool_size; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(rng.below(items.size() - i));
    std::swap(items[i], items[j]);
  }
  task.pool.assign(items.begin(),
                   items.begin() + static_cast<std::ptrdiff_t>(pool_size));
  return task;
}

std::vector<std::pair<ItemId, std::size_t>> rank_candidates(
    const PairScorer& model, ItemId seed, std::span<const ItemId> candidates) {
  std::vector<std::pair<double, ItemId>> scored;
  scored.reserve(candidates.size());
  for (ItemId c : candidates) scored.emplace_back(model.score(seed, c), c);
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::pair<ItemId, std::size_t>> out;
  out.reserve(scored.size());
  for (std::size_t i = 0; i < scored.size(); ++i) {
    out.emplace_back(scored[i].second, i + 1);
  }
  return out;
}

namespace {

// Rank of the true item among pool + true item without sorting: one plus the
// number of candidates scoring higher, or scoring equal with a smaller id.
std::size_t true_item_rank(const PairScorer& model, ItemId seed, ItemId truth,
                           std::span<const ItemId> pool) {
  const double s_true = model.score(seed, truth);
  std::size_t ahead = 0;
  for (ItemId c : pool) {
    if (c == truth) continue;
    const double s = model.score(seed, c);
    if (s > s_true || (s == s_true && c < truth)) ++ahead;
  }
  return ahead + 1;
}

}  // namespace

RankingReport evaluate_ranking(const PairScorer& model,
                               const RankingTask& task,
                               std::span<const int> ks, int workers) {
  if (task.seeds.empty()) throw ConfigError("ranking task has no seeds");
  RankingReport report;
  report.n_seeds = task.seeds.size();
  report.pool_size = task.pool_size;
  report.ranks.assign(task.seeds.size(), 0);

  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      report.ranks[i] = true_item_rank(model, task.seeds[i].first,
                                       task.seeds[i].second, task.pool);
    }
  };
  if (workers <= 1 || task.seeds.size() < 2) {
    run(0, task.seeds.size());
  } else {
    const std::size_t n = task.seeds.size();
    const std::size_t n_threads =
        std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < n_threads; ++t) {
      const std::size_t begin = n * t / n_threads;
      const std::size_t end = n * (t + 1) / n_threads;
      threads.emplace_back(run, begin, end);
    }
    for (auto& th : threads) th.join();
  }

  for (int k : ks) report.recall[k] = recall_at_k(report.ranks, k);
  report.mrr = mrr(report.ranks);
  return report;
}

double recall_at_k(std::span<const std::size_t> ranks, int k) {
  if (k < 1) throw DomainError("recall cutoff must be >= 1");
  if (ranks.empty()) throw DomainError("recall over zero seeds");
  std::size_t hits = 0;
  for (std::size_t r : ranks) {
    if (r <= static_cast<std::size_t>(k)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

double mrr(std::span<const std::size_t> ranks) {
  if (ranks.empty()) throw DomainError("mrr over zero seeds");
  double total = 0.0;
  for (std::size_t r : ranks) {
    if (r < 1) throw DomainError("ranks must be >= 1");
    total += 1.0 / static_cast<double>(r);
  }
  return total / static_cast<double>(ranks.size());
}

double rmse(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DomainError("rmse length mismatch");
  if (xs.empty()) throw DomainError("rmse over zero samples");
  double acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = xs[i] - ys[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(xs.size()));
}

namespace {

// Tie-averaged ranks: equal values share the mean of the positions they
// occupy in sort order (1-based).
std::vector<double> average_ranks(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&xs](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double avg = static_cast<double>(i + j + 2) / 2.0;  // mean of i+1..j+1
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DomainError("spearman length mismatch");
  if (xs.size() < 2) throw DomainError("spearman needs >= 2 samples");
  const std::vector<double> rx = average_ranks(xs);
  const std::vector<double> ry = average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mx;
    const double dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw DomainError("spearman undefined: zero rank variance");
  }
  return sxy / std::sqrt(sxx * syy);
}

double RandomScorer::score(ItemId seed, ItemId cand) const {
  // splitmix64 finalizer over (run seed, pair key): uniform in [0, 1),
  // reproducible, and independent of evaluation order.
  std::uint64_t z = seed_ + 0x9e3779b97f4a7c15ull * (pair_key(seed, cand) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

std::vector<NeighborEntry> nearest_neighbors(
    const DcfModel& model, const ItemCatalog& catalog, ItemId anchor,
    std::span<const ItemId> universe, std::span<const std::size_t> positions) {
  if (universe.empty()) throw DomainError("empty neighbor universe");
  std::vector<double> anchor_emb;
  model.embed(catalog.features(anchor), anchor_emb);
  std::vector<std::pair<double, ItemId>> dists;
  dists.reserve(universe.size());
  std::vector<double> emb;
  for (ItemId t : universe) {
    model.embed(catalog.features(t), emb);
    double acc = 0.0;
    for (std::size_t d = 0; d < emb.size(); ++d) {
      const double diff = emb[d] - anchor_emb[d];
      acc += diff * diff;
    }
    dists.emplace_back(std::sqrt(acc), t);
  }
  std::sort(dists.begin(), dists.end());
  std::vector<NeighborEntry> out;
  for (std::size_t pos : positions) {
    if (pos >= dists.size()) {
      throw DomainError("neighbor position " + std::to_string(pos) +
                        " beyond universe size " +
                        std::to_string(dists.size()));
    }
    out.push_back({pos, dists[pos].second, dists[pos].first});
  }
  return out;
}

void write_ranking_report_json(const std::string& path,
                               const RankingReport& report) {
  json obj;
  obj["n_seeds"] = report.n_seeds;
  obj["pool_size"] = report.pool_size;
  obj["recall"] = json::object();
  for (const auto& [k, v] : report.recall) {
    obj["recall"][std::to_string(k)] = v;
  }
  obj["mrr"] = report.mrr;
  obj["ranks"] = report.ranks;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write ranking report: " + path);
  out << obj.dump(2) << '\n';
}

}  // namespace sparsecf
