#include "kgforge/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "kgforge/io.hpp"

namespace kgforge {

ParseError::ParseError(const std::string& path, std::size_t line, const std::string& what)
    : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

std::int32_t Vocabulary::intern(std::string_view name) {
  std::string key(name);
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  const auto id = static_cast<std::int32_t>(names_.size());
  names_.push_back(key);
  index_.emplace(std::move(key), id);
  return id;
}

std::int32_t Vocabulary::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? -1 : it->second;
}

TripleSet make_triple_set(std::span<const Triple> triples) {
  TripleSet set;
  set.reserve(triples.size() * 2);
  for (const auto& t : triples) set.insert(triple_key(t));
  return set;
}

namespace {

bool is_split_file(const std::filesystem::path& p, std::string_view tag) {
  const auto name = p.filename().string();
  const auto ext = p.extension().string();
  return name.find(tag) != std::string::npos && (ext == ".txt" || ext == ".tsv");
}

void read_split(const std::filesystem::path& path, KnowledgeGraph& g,
                std::vector<Triple>& out, SplitReport& report, bool dedup) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());

  TripleSet seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (io::trim(line).empty()) continue;
    ++report.lines;
    const auto fields = io::split(line, '\t');
    if (fields.size() != 3) {
      throw ParseError(path.string(), lineno,
                       "expected 3 tab-separated fields, found " + std::to_string(fields.size()));
    }
    const auto h = io::trim(fields[0]);
    const auto r = io::trim(fields[1]);
    const auto t = io::trim(fields[2]);
    if (h.empty() || r.empty() || t.empty()) throw ParseError(path.string(), lineno, "empty field");

    const Triple triple{g.entities.intern(h), g.relations.intern(r), g.entities.intern(t)};
    if (triple.head == triple.tail) {
      ++report.self_loops_dropped;
      continue;
    }
    if (dedup && !seen.insert(triple_key(triple)).second) {
      ++report.duplicates_dropped;
      continue;
    }
    out.push_back(triple);
  }
}

}  // namespace

DatasetPaths resolve_dataset_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error("dataset directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  auto pick = [&](std::string_view tag) {
    std::filesystem::path found;
    for (const auto& f : files) {
      if (!is_split_file(f, tag)) continue;
      if (!found.empty()) throw Error("ambiguous '" + std::string(tag) + "' split in " + dir.string());
      found = f;
    }
    if (found.empty()) throw Error("no '" + std::string(tag) + "' split file in " + dir.string());
    return found;
  };
  return {pick("train"), pick("valid"), pick("test")};
}

KnowledgeGraph load_dataset(const std::filesystem::path& train_path,
                            const std::filesystem::path& valid_path,
                            const std::filesystem::path& test_path) {
  for (const auto* p : {&train_path, &valid_path, &test_path})
    if (!std::filesystem::exists(*p)) throw Error("file not found: " + p->string());

  KnowledgeGraph g;
  read_split(train_path, g, g.train, g.train_report, /*dedup=*/true);
  if (g.train.empty()) throw Error("empty train split after filtering: " + train_path.string());
  read_split(valid_path, g, g.valid, g.valid_report, /*dedup=*/false);
  read_split(test_path, g, g.test, g.test_report, /*dedup=*/false);
  return g;
}

GraphStats graph_stats(const KnowledgeGraph& g) {
  GraphStats s;
  s.entities = g.num_entities();
  s.relations = g.num_relations();
  s.train = static_cast<std::int64_t>(g.train.size());
  s.valid = static_cast<std::int64_t>(g.valid.size());
  s.test = static_cast<std::int64_t>(g.test.size());
  s.total = s.train + s.valid + s.test;
  const double slots = static_cast<double>(s.entities) * static_cast<double>(s.entities - 1) *
                       static_cast<double>(s.relations);
  s.density = slots > 0 ? static_cast<double>(s.train) / slots : 0.0;

  std::vector<char> in_train(static_cast<std::size_t>(s.entities), 0);
  for (const auto& t : g.train) in_train[t.head] = in_train[t.tail] = 1;
  std::vector<char> counted(static_cast<std::size_t>(s.entities), 0);
  for (const auto* split : {&g.valid, &g.test}) {
    for (const auto& t : *split) {
      for (EntityId e : {t.head, t.tail}) {
        if (!in_train[e] && !counted[e]) {
          counted[e] = 1;
          ++s.unseen_eval_entities;
        }
      }
    }
  }
  for (const auto* r : {&g.train_report, &g.valid_report, &g.test_report}) {
    s.self_loops_dropped += static_cast<std::int64_t>(r->self_loops_dropped);
    s.duplicates_dropped += static_cast<std::int64_t>(r->duplicates_dropped);
  }
  return s;
}

std::string format_stats(const GraphStats& s) {
  std::ostringstream os;
  os << "entities\t" << s.entities << '\n'
     << "relations\t" << s.relations << '\n'
     << "train\t" << s.train << '\n'
     << "valid\t" << s.valid << '\n'
     << "test\t" << s.test << '\n'
     << "total\t" << s.total << '\n'
     << "density\t" << io::format_double(s.density) << '\n'
     << "unseen_eval_entities\t" << s.unseen_eval_entities << '\n'
     << "self_loops_dropped\t" << s.self_loops_dropped << '\n'
     << "duplicates_dropped\t" << s.duplicates_dropped << '\n';
  return os.str();
}

std::string serialize_triples(const KnowledgeGraph& g, std::span<const Triple> triples) {
  std::string out;
  for (const auto& t : triples) {
    out += g.entities.name(t.head);
    out += '\t';
    out += g.relations.name(t.relation);
    out += '\t';
    out += g.entities.name(t.tail);
    out += '\n';
  }
  return out;
}

std::vector<Triple> load_triples(const KnowledgeGraph& g, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<Triple> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (io::trim(line).empty()) continue;
    const auto fields = io::split(line, '\t');
    if (fields.size() != 3) throw ParseError(path.string(), lineno, "expected 3 tab-separated fields");
    const Triple t{g.entities.find(io::trim(fields[0])), g.relations.find(io::trim(fields[1])),
                   g.entities.find(io::trim(fields[2]))};
    if (t.head < 0 || t.relation < 0 || t.tail < 0) throw ParseError(path.string(), lineno, "unknown entity or relation");
    if (t.head == t.tail) throw ParseError(path.string(), lineno, "self-loop");
    out.push_back(t);
  }
  return out;
}

std::string serialize_vocabulary(const Vocabulary& v) {
  std::string out;
  for (std::int32_t i = 0; i < v.size(); ++i) {
    out += std::to_string(i);
    out += '\t';
    out += v.name(i);
    out += '\n';
  }
  return out;
}

}  // namespace kgforge
