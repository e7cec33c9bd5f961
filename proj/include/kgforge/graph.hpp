#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace kgforge {

using EntityId = std::int32_t;
using RelationId = std::int32_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct Triple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

/// Bijective string <-> dense id map. Ids are handed out in first-seen order.
class Vocabulary {
 public:
  std::int32_t intern(std::string_view name);
  /// -1 when absent.
  std::int32_t find(std::string_view name) const;
  const std::string& name(std::int32_t id) const { return names_.at(static_cast<std::size_t>(id)); }
  std::int32_t size() const noexcept { return static_cast<std::int32_t>(names_.size()); }
  std::span<const std::string> names() const noexcept { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::int32_t> index_;
};

/// Packs a triple into one 64-bit key; valid for |E| < 2^26 and |R| < 2^12.
constexpr std::uint64_t triple_key(const Triple& t) noexcept {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(t.head)) << 38) |
         (static_cast<std::uint64_t>(static_cast<std::uint32_t>(t.relation)) << 26) |
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(t.tail));
}

using TripleSet = std::unordered_set<std::uint64_t>;

TripleSet make_triple_set(std::span<const Triple> triples);

struct SplitReport {
  std::size_t lines = 0;
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_dropped = 0;
};

struct KnowledgeGraph {
  Vocabulary entities;
  Vocabulary relations;
  std::vector<Triple> train;
  std::vector<Triple> valid;
  std::vector<Triple> test;
  SplitReport train_report, valid_report, test_report;

  std::int32_t num_entities() const noexcept { return entities.size(); }
  std::int32_t num_relations() const noexcept { return relations.size(); }
};

struct DatasetPaths {
  std::filesystem::path train, valid, test;
};

/// Finds `*train*`, `*valid*` and `*test*` text files inside a dataset
/// directory. Throws when a split is missing or ambiguous.
DatasetPaths resolve_dataset_dir(const std::filesystem::path& dir);

/// Reads three `head<TAB>relation<TAB>tail` files. Ids are assigned in
/// first-appearance order over train, valid, then test. Self-loops are
/// dropped from every split; duplicate train lines are dropped. Both are
/// counted in the per-split reports.
KnowledgeGraph load_dataset(const std::filesystem::path& train_path,
                            const std::filesystem::path& valid_path,
                            const std::filesystem::path& test_path);

inline KnowledgeGraph load_dataset(const DatasetPaths& paths) {
  return load_dataset(paths.train, paths.valid, paths.test);
}

struct GraphStats {
  std::int64_t entities = 0;
  std::int64_t relations = 0;
  std::int64_t train = 0;
  std::int64_t valid = 0;
  std::int64_t test = 0;
  std::int64_t total = 0;
  double density = 0.0;
  // entities referenced by valid/test that never occur in train
  std::int64_t unseen_eval_entities = 0;
  std::int64_t self_loops_dropped = 0;
  std::int64_t duplicates_dropped = 0;
};

GraphStats graph_stats(const KnowledgeGraph& g);

std::string format_stats(const GraphStats& s);

/// `head<TAB>relation<TAB>tail` lines using the graph's names.
std::string serialize_triples(const KnowledgeGraph& g, std::span<const Triple> triples);

/// Reads a triple file whose names must already exist in `g`'s dictionaries
/// (for example an augmented set written by serialize_triples).
std::vector<Triple> load_triples(const KnowledgeGraph& g, const std::filesystem::path& path);

/// `id<TAB>name` lines.
std::string serialize_vocabulary(const Vocabulary& v);

}  // namespace kgforge
