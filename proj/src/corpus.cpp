#include "sparsecf/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sparsecf/log.hpp"

namespace sparsecf {

using json = nlohmann::json;

ItemId ItemRegistry::intern(std::string_view name) {
  auto it = index_.find(std::string(name));
  if (it != index_.end()) return it->second;
  const ItemId id = static_cast<ItemId>(names_.size());
  names_.emplace_back(name);
  index_.emplace(names_.back(), id);
  return id;
}

std::optional<ItemId> ItemRegistry::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& ItemRegistry::name(ItemId id) const {
  if (id >= names_.size()) {
    throw DomainError("unknown item id " + std::to_string(id));
  }
  return names_[id];
}

TransactionLog ingest_transactions(std::span<const RawRecord> records,
                                   ItemRegistry& items) {
  TransactionLog log;
  std::unordered_map<std::string, UserId> users;
  struct Row {
    ItemId item;
    std::int64_t ts;
    std::size_t order;  // input order, tie-break for equal timestamps
  };
  std::vector<std::vector<Row>> per_user;

  for (std::size_t i = 0; i < records.size(); ++i) {
    const RawRecord& rec = records[i];
    auto [it, fresh] =
        users.emplace(rec.user, static_cast<UserId>(users.size()));
    if (fresh) per_user.emplace_back();
    per_user[it->second].push_back(
        {items.intern(rec.item), rec.timestamp, i});
  }

  log.n_users = per_user.size();
  for (UserId u = 0; u < per_user.size(); ++u) {
    auto& rows = per_user[u];
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      if (a.ts != b.ts) return a.ts < b.ts;
      return a.order < b.order;
    });
    // Keep the earliest row per item.
    std::vector<Row> history;
    std::unordered_map<ItemId, std::size_t> seen;
    for (const Row& row : rows) {
      if (seen.emplace(row.item, history.size()).second) {
        history.push_back(row);
      }
    }
    for (const Row& row : history) {
      log.purchases.push_back({u, row.item, row.ts});
    }
    // Ordered pairs: candidate bought at or after the seed.  Items are
    // unique within `history`, so each (user, seed, cand) appears once.
    for (std::size_t a = 0; a < history.size(); ++a) {
      for (std::size_t b = 0; b < history.size(); ++b) {
        if (a == b) continue;
        if (history[b].ts >= history[a].ts) {
          log.copurchases.push_back({u, history[a].item, history[b].item});
        }
      }
    }
  }
  return log;
}

CooccurrenceStats CooccurrenceStats::from_log(const TransactionLog& log,
                                              std::size_t n_items) {
  std::vector<std::int64_t> item_counts(n_items, 0);
  for (const PurchaseEvent& p : log.purchases) {
    if (p.item >= n_items) {
      throw DomainError("purchase references item id " +
                        std::to_string(p.item) + " outside the registry");
    }
    ++item_counts[p.item];
  }
  std::unordered_map<PairKey, std::int64_t> acc;
  for (const CopurchaseEvent& c : log.copurchases) {
    ++acc[pair_key(c.seed, c.cand)];
  }
  std::vector<std::pair<PairKey, std::int64_t>> pairs(acc.begin(), acc.end());
  std::sort(pairs.begin(), pairs.end());
  return from_counts(std::move(item_counts), std::move(pairs));
}

CooccurrenceStats CooccurrenceStats::from_counts(
    std::vector<std::int64_t> item_counts,
    std::vector<std::pair<PairKey, std::int64_t>> pair_counts) {
  CooccurrenceStats stats;
  stats.item_counts_ = std::move(item_counts);
  std::sort(pair_counts.begin(), pair_counts.end());
  for (const auto& [key, count] : pair_counts) {
    if (count <= 0) {
      throw DomainError("co-purchase pair with non-positive count");
    }
    const ItemId s = pair_seed(key), r = pair_cand(key);
    if (s >= stats.item_counts_.size() || r >= stats.item_counts_.size()) {
      throw DomainError("co-purchase pair references unknown item");
    }
    if (stats.item_counts_[s] <= 0 || stats.item_counts_[r] <= 0) {
      throw DomainError("co-purchased item has zero purchase count");
    }
    if (!stats.pair_index_.emplace(key, count).second) {
      throw DomainError("duplicate co-purchase pair in counts");
    }
    stats.total_pairs_ += count;
  }
  stats.pairs_ = std::move(pair_counts);
  for (std::int64_t c : stats.item_counts_) {
    if (c < 0) throw DomainError("negative purchase count");
    stats.total_purchases_ += c;
    stats.z_ += std::sqrt(static_cast<double>(c));
  }
  return stats;
}

std::int64_t CooccurrenceStats::item_count(ItemId t) const {
  if (t >= item_counts_.size()) {
    throw DomainError("unknown item id " + std::to_string(t));
  }
  return item_counts_[t];
}

std::int64_t CooccurrenceStats::pair_count(ItemId s, ItemId r) const {
  if (s >= item_counts_.size() || r >= item_counts_.size()) {
    throw DomainError("unknown item id in pair lookup");
  }
  auto it = pair_index_.find(pair_key(s, r));
  return it == pair_index_.end() ? 0 : it->second;
}

double cosine_score(const CooccurrenceStats& stats, ItemId s, ItemId r) {
  const std::int64_t n_s = stats.item_count(s);
  const std::int64_t n_r = stats.item_count(r);
  if (n_s <= 0 || n_r <= 0) {
    throw DomainError("cosine undefined for items with no purchases");
  }
  return static_cast<double>(stats.pair_count(s, r)) /
         (std::sqrt(static_cast<double>(n_s)) *
          std::sqrt(static_cast<double>(n_r)));
}

// ---------------------------------------------------------------------------

std::optional<std::size_t> FeatureSchema::index_of(
    std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  return std::nullopt;
}

ItemCatalog::ItemCatalog(FeatureSchema schema) : schema_(std::move(schema)) {
  if (schema_.names.size() != schema_.sequential.size()) {
    throw ConfigError("feature schema names and flags differ in length");
  }
  if (schema_.names.empty()) {
    throw ConfigError("feature schema must name at least one set");
  }
  for (std::size_t i = 0; i < schema_.names.size(); ++i) {
    if (schema_.names[i].empty()) {
      throw ConfigError("feature set names must be nonempty");
    }
    for (std::size_t j = i + 1; j < schema_.names.size(); ++j) {
      if (schema_.names[i] == schema_.names[j]) {
        throw ConfigError("duplicate feature set name: " + schema_.names[i]);
      }
    }
  }
  vocabs_.resize(schema_.size());
}

void ItemCatalog::add_item(ItemId id, const RawItem& raw) {
  if (items_.count(id) != 0) {
    throw IngestError("item '" + raw.item_id + "' appears twice in catalog");
  }
  for (const auto& [set_name, tokens] : raw.features) {
    (void)tokens;
    if (!schema_.index_of(set_name)) {
      throw IngestError("item '" + raw.item_id + "' has feature set '" +
                        set_name + "' not in the schema");
    }
  }
  ItemFeatures feats;
  feats.sets.resize(schema_.size());
  for (std::size_t k = 0; k < schema_.size(); ++k) {
    auto it = raw.features.find(schema_.names[k]);
    if (it == raw.features.end()) continue;
    feats.sets[k].reserve(it->second.size());
    for (const std::string& tok : it->second) {
      auto& vocab = vocabs_[k];
      auto found = vocab.find(tok);
      std::int32_t tid;
      if (found != vocab.end()) {
        tid = found->second;
      } else if (!frozen_) {
        // Id 0 stays reserved for out-of-vocabulary tokens.
        tid = static_cast<std::int32_t>(vocab.size()) + 1;
        vocab.emplace(tok, tid);
      } else {
        tid = 0;
      }
      feats.sets[k].push_back(tid);
    }
  }
  items_.emplace(id, std::move(feats));
}

const ItemFeatures& ItemCatalog::features(ItemId id) const {
  auto it = items_.find(id);
  if (it == items_.end()) {
    throw DomainError("item id " + std::to_string(id) + " not in catalog");
  }
  return it->second;
}

std::size_t ItemCatalog::vocab_size(std::size_t set_index) const {
  if (set_index >= vocabs_.size()) {
    throw DomainError("feature set index out of range");
  }
  return vocabs_[set_index].size() + 1;  // +1 for the OOV id
}

std::vector<std::size_t> ItemCatalog::vocab_sizes() const {
  std::vector<std::size_t> out(vocabs_.size());
  for (std::size_t k = 0; k < vocabs_.size(); ++k) out[k] = vocab_size(k);
  return out;
}

std::int32_t ItemCatalog::token_id(std::size_t set_index,
                                   std::string_view token) const {
  if (set_index >= vocabs_.size()) {
    throw DomainError("feature set index out of range");
  }
  auto it = vocabs_[set_index].find(std::string(token));
  return it == vocabs_[set_index].end() ? 0 : it->second;
}

ItemCatalog build_catalog(std::span<const RawItem> raw_items,
                          const FeatureSchema& schema, ItemRegistry& items) {
  ItemCatalog catalog(schema);
  for (const RawItem& raw : raw_items) {
    catalog.add_item(items.intern(raw.item_id), raw);
  }
  return catalog;
}

// ---------------------------------------------------------------------------
// File formats.

namespace {

[[noreturn]] void line_error(const std::string& path, std::size_t line,
                             const std::string& what) {
  throw IngestError(path + ":" + std::to_string(line) + ": " + what);
}

bool parse_int(std::string_view text, std::int64_t& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return static_cast<std::int64_t>(era) * 146097 +
         static_cast<std::int64_t>(doe) - 719468;
}

}  // namespace

std::int64_t parse_timestamp(std::string_view text) {
  std::int64_t epoch;
  if (parse_int(text, epoch)) return epoch;
  int y, mo, d, h = 0, mi = 0, s = 0;
  char sep = 0;
  int consumed = 0;
  const std::string buf(text);
  const int n = std::sscanf(buf.c_str(), "%4d-%2d-%2d%n", &y, &mo, &d,
                            &consumed);
  if (n != 3) {
    throw IngestError("unparseable timestamp '" + buf + "'");
  }
  std::string_view rest = text.substr(static_cast<std::size_t>(consumed));
  if (!rest.empty()) {
    const std::string rbuf(rest);
    int rconsumed = 0;
    if (std::sscanf(rbuf.c_str(), "%c%2d:%2d:%2d%n", &sep, &h, &mi, &s,
                    &rconsumed) != 4 ||
        (sep != 'T' && sep != ' ')) {
      throw IngestError("unparseable timestamp '" + buf + "'");
    }
    std::string_view tail = rest.substr(static_cast<std::size_t>(rconsumed));
    if (!tail.empty() && tail != "Z") {
      throw IngestError("unparseable timestamp '" + buf + "'");
    }
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60) {
    throw IngestError("timestamp field out of range in '" + buf + "'");
  }
  return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

std::vector<RawRecord> load_transactions_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open transactions file: " + path);
  std::vector<RawRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::size_t t1 = line.find('\t');
    const std::size_t t2 = t1 == std::string::npos
                               ? std::string::npos
                               : line.find('\t', t1 + 1);
    if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
      line_error(path, lineno, "expected 3 tab-separated fields");
    }
    RawRecord rec;
    rec.user = line.substr(0, t1);
    rec.item = line.substr(t1 + 1, t2 - t1 - 1);
    if (rec.user.empty() || rec.item.empty()) {
      line_error(path, lineno, "empty user or item id");
    }
    try {
      rec.timestamp = parse_timestamp(
          std::string_view(line).substr(t2 + 1));
    } catch (const IngestError& e) {
      line_error(path, lineno, e.what());
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void save_transactions_tsv(const std::string& path,
                           std::span<const RawRecord> records) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write transactions file: " + path);
  for (const RawRecord& rec : records) {
    out << rec.user << '\t' << rec.item << '\t' << rec.timestamp << '\n';
  }
}

std::vector<RawItem> load_catalog_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open catalog file: " + path);
  std::vector<RawItem> items;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      line_error(path, lineno, "invalid JSON object");
    }
    if (!obj.contains("item_id") || !obj["item_id"].is_string()) {
      line_error(path, lineno, "missing string field 'item_id'");
    }
    RawItem item;
    item.item_id = obj["item_id"].get<std::string>();
    if (obj.contains("features")) {
      if (!obj["features"].is_object()) {
        line_error(path, lineno, "'features' must be an object");
      }
      for (const auto& [set_name, tokens] : obj["features"].items()) {
        if (!tokens.is_array()) {
          line_error(path, lineno,
                     "feature set '" + set_name + "' must be an array");
        }
        std::vector<std::string> toks;
        for (const auto& tok : tokens) {
          if (!tok.is_string()) {
            line_error(path, lineno,
                       "feature set '" + set_name + "' has a non-string token");
          }
          toks.push_back(tok.get<std::string>());
        }
        item.features.emplace(set_name, std::move(toks));
      }
    }
    items.push_back(std::move(item));
  }
  return items;
}

void save_catalog_jsonl(const std::string& path,
                        std::span<const RawItem> items) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write catalog file: " + path);
  for (const RawItem& item : items) {
    json obj;
    obj["item_id"] = item.item_id;
    obj["features"] = json::object();
    for (const auto& [set_name, tokens] : item.features) {
      obj["features"][set_name] = tokens;
    }
    out << obj.dump() << '\n';
  }
}

FeatureSchema load_schema_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schema file: " + path);
  FeatureSchema schema;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos ||
        line.find('\t', tab + 1) != std::string::npos) {
      line_error(path, lineno, "expected 2 tab-separated fields");
    }
    const std::string name = line.substr(0, tab);
    const std::string kind = line.substr(tab + 1);
    if (name.empty()) line_error(path, lineno, "empty feature set name");
    if (kind != "sequential" && kind != "bag") {
      line_error(path, lineno, "kind must be 'sequential' or 'bag'");
    }
    schema.names.push_back(name);
    schema.sequential.push_back(kind == "sequential");
  }
  if (schema.names.empty()) {
    throw IngestError(path + ": schema file is empty");
  }
  return schema;
}

void save_schema_tsv(const std::string& path, const FeatureSchema& schema) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write schema file: " + path);
  for (std::size_t k = 0; k < schema.size(); ++k) {
    out << schema.names[k] << '\t'
        << (schema.sequential[k] ? "sequential" : "bag") << '\n';
  }
}

}  // namespace sparsecf
