#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sparsecf/types.hpp"

namespace sparsecf {

// Interns external string ids to dense ItemIds (first-seen order).
class ItemRegistry {
 public:
  ItemId intern(std::string_view name);
  std::optional<ItemId> find(std::string_view name) const;
  const std::string& name(ItemId id) const;
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, ItemId> index_;
};

// One row of a transactions file, before interning.
struct RawRecord {
  std::string user;
  std::string item;
  std::int64_t timestamp;  // epoch seconds
};

struct PurchaseEvent {
  UserId user;
  ItemId item;
  std::int64_t timestamp;
};

// Ordered co-purchase: `cand` bought at or after `seed` by the same user.
struct CopurchaseEvent {
  UserId user;
  ItemId seed;
  ItemId cand;
};

struct TransactionLog {
  std::vector<PurchaseEvent> purchases;      // one per distinct (user, item)
  std::vector<CopurchaseEvent> copurchases;  // one per distinct (user, seed, cand)
  std::size_t n_users = 0;
};

// Deduplicates purchases per (user, item) and expands each user's history
// into ordered pairs: (a, b) with a != b and timestamp(b) >= timestamp(a).
// Pairs bought at the same instant yield both directions.
TransactionLog ingest_transactions(std::span<const RawRecord> records,
                                   ItemRegistry& items);

// Purchase and co-purchase count table.  All derived quantities the
// objective needs live here: per-item purchase counts n_d, ordered-pair
// co-purchase counts n_cp, |CP|, |D|, and z = sum_t sqrt(n_d(t)).
class CooccurrenceStats {
 public:
  static CooccurrenceStats from_log(const TransactionLog& log,
                                    std::size_t n_items);
  // Direct construction from precomputed counts (synthetic data paths).
  // pair_counts must hold ordered pairs with positive counts.
  static CooccurrenceStats from_counts(
      std::vector<std::int64_t> item_counts,
      std::vector<std::pair<PairKey, std::int64_t>> pair_counts);

  std::size_t n_items() const { return item_counts_.size(); }
  std::int64_t item_count(ItemId t) const;
  std::int64_t pair_count(ItemId s, ItemId r) const;  // 0 when unobserved
  std::int64_t total_pairs() const { return total_pairs_; }      // |CP|
  std::int64_t total_purchases() const { return total_purchases_; }  // |D|
  double z() const { return z_; }

  // Distinct observed pairs with their counts, sorted by key.
  const std::vector<std::pair<PairKey, std::int64_t>>& pairs() const {
    return pairs_;
  }

 private:
  std::vector<std::int64_t> item_counts_;
  std::vector<std::pair<PairKey, std::int64_t>> pairs_;  // sorted by PairKey
  std::unordered_map<PairKey, std::int64_t> pair_index_;
  std::int64_t total_pairs_ = 0;
  std::int64_t total_purchases_ = 0;
  double z_ = 0.0;
};

// Co-purchase cosine: n_cp(s, r) / sqrt(n_d(s) * n_d(r)).
// Zero purchase count for either item is a DomainError.
double cosine_score(const CooccurrenceStats& stats, ItemId s, ItemId r);

// ---------------------------------------------------------------------------
// Item content catalog.

struct FeatureSchema {
  std::vector<std::string> names;  // feature-set names, fixed order
  std::vector<bool> sequential;    // token order meaningful?

  std::size_t size() const { return names.size(); }
  std::optional<std::size_t> index_of(std::string_view name) const;
};

// Token ids per feature set, aligned with the schema.  Id 0 is the
// out-of-vocabulary token in every set.
struct ItemFeatures {
  std::vector<std::vector<std::int32_t>> sets;
};

// One row of a catalog file, before vocabulary mapping.
struct RawItem {
  std::string item_id;
  // feature-set name -> token list; sets may be missing (treated as empty)
  std::map<std::string, std::vector<std::string>> features;
};

// Maps raw token strings to per-set vocabulary ids.  While open, new tokens
// extend the vocabulary; after freeze(), unseen tokens map to id 0 so a
// trained model can score items that were not in the training catalog.
class ItemCatalog {
 public:
  explicit ItemCatalog(FeatureSchema schema);

  const FeatureSchema& schema() const { return schema_; }
  bool frozen() const { return frozen_; }
  void freeze() { frozen_ = true; }

  // Tokenises and stores one item.  A feature-set name not in the schema is
  // an IngestError; re-adding an item id is an IngestError.
  void add_item(ItemId id, const RawItem& raw);

  bool has(ItemId id) const { return items_.count(id) != 0; }
  const ItemFeatures& features(ItemId id) const;  // DomainError when absent

  // Vocabulary size of one set, including the reserved id 0.
  std::size_t vocab_size(std::size_t set_index) const;
  std::vector<std::size_t> vocab_sizes() const;
  // Id of a token (0 when unseen).
  std::int32_t token_id(std::size_t set_index, std::string_view token) const;

 private:
  FeatureSchema schema_;
  std::vector<std::unordered_map<std::string, std::int32_t>> vocabs_;
  std::unordered_map<ItemId, ItemFeatures> items_;
  bool frozen_ = false;
};

// Builds a catalog from raw items, interning ids into `items`.
ItemCatalog build_catalog(std::span<const RawItem> raw_items,
                          const FeatureSchema& schema, ItemRegistry& items);

// ---------------------------------------------------------------------------
// File formats.

// Transactions: TSV `user_id<TAB>item_id<TAB>timestamp`, timestamp either
// integer epoch seconds or ISO-8601 (`2016-01-31`, `2016-01-31T08:00:00Z`).
// Malformed lines raise IngestError naming the line number.
std::vector<RawRecord> load_transactions_tsv(const std::string& path);
void save_transactions_tsv(const std::string& path,
                           std::span<const RawRecord> records);
std::int64_t parse_timestamp(std::string_view text);  // IngestError on failure

// Catalog: JSON lines, one object per item:
//   {"item_id": "...", "features": {"set_name": ["tok", ...], ...}}
std::vector<RawItem> load_catalog_jsonl(const std::string& path);
void save_catalog_jsonl(const std::string& path,
                        std::span<const RawItem> items);

// Feature schema sidecar: TSV `set_name<TAB>sequential|bag`.
FeatureSchema load_schema_tsv(const std::string& path);
void save_schema_tsv(const std::string& path, const FeatureSchema& schema);

}  // namespace sparsecf
