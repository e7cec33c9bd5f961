#include "kgforge/eval.hpp"

#include <sstream>

#include "json.hpp"

#include "kgforge/io.hpp"

namespace kgforge {

RankMode parse_rank_mode(const std::string& name) {
  if (name == "raw") return RankMode::Raw;
  if (name == "filtered") return RankMode::Filtered;
  throw Error("unknown eval mode '" + name + "' (expected raw or filtered)");
}

std::string to_string(RankMode m) { return m == RankMode::Raw ? "raw" : "filtered"; }

double RankingMetrics::hits_at(int r) const {
  for (std::size_t i = 0; i < kHitsAt.size(); ++i)
    if (kHitsAt[i] == r) return hits[i];
  throw Error("hits@" + std::to_string(r) + " is not tracked");
}

double rank_from_scores(const Eigen::VectorXd& scores, EntityId truth, EntityId fixed,
                        const std::vector<char>* excluded) {
  const double target = scores[truth];
  std::size_t better = 0, tied = 0;
  for (Eigen::Index c = 0; c < scores.size(); ++c) {
    if (c == truth || c == fixed) continue;
    if (excluded && (*excluded)[static_cast<std::size_t>(c)]) continue;
    if (scores[c] > target) ++better;
    else if (scores[c] == target) ++tied;
  }
  return 1.0 + static_cast<double>(better) + 0.5 * static_cast<double>(tied);
}

std::vector<char> filtered_mask(const Triple& t, Side side, std::int32_t n_entities, const TripleSet& known) {
  std::vector<char> mask(static_cast<std::size_t>(n_entities), 0);
  Triple probe = t;
  EntityId& slot = side == Side::Head ? probe.head : probe.tail;
  const EntityId truth = slot;
  for (EntityId c = 0; c < n_entities; ++c) {
    if (c == truth) continue;
    slot = c;
    if (known.contains(triple_key(probe))) mask[static_cast<std::size_t>(c)] = 1;
  }
  return mask;
}

RankingMetrics metrics_from_ranks(std::span<const double> ranks) {
  if (ranks.empty()) throw Error("no ranks to summarize");
  RankingMetrics m;
  m.ranks = ranks.size();
  std::array<std::size_t, 4> hit_counts{};
  for (double r : ranks) {
    m.mrr += 1.0 / r;
    m.mr += r;
    for (std::size_t i = 0; i < kHitsAt.size(); ++i)
      if (r <= kHitsAt[i]) ++hit_counts[i];
  }
  const auto n = static_cast<double>(ranks.size());
  m.mrr /= n;
  m.mr /= n;
  for (std::size_t i = 0; i < kHitsAt.size(); ++i) m.hits[i] = 100.0 * static_cast<double>(hit_counts[i]) / n;
  return m;
}

TripleSet known_triples(const KnowledgeGraph& g) {
  TripleSet known;
  known.reserve(2 * (g.train.size() + g.valid.size() + g.test.size()));
  for (const auto* split : {&g.train, &g.valid, &g.test})
    for (const auto& t : *split) known.insert(triple_key(t));
  return known;
}

std::string metrics_json(const RankingMetrics& m) {
  nlohmann::ordered_json j;
  j["mrr"] = m.mrr;
  j["mr"] = m.mr;
  for (std::size_t i = 0; i < kHitsAt.size(); ++i) j["hits@" + std::to_string(kHitsAt[i])] = m.hits[i];
  j["ranks"] = m.ranks;
  return j.dump();
}

std::string metrics_table(const RankingMetrics& m) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  os << "MRR      " << m.mrr << '\n' << "MR       " << m.mr << '\n';
  os.precision(2);
  for (std::size_t i = 0; i < kHitsAt.size(); ++i) os << "Hits@" << kHitsAt[i] << (kHitsAt[i] < 10 ? "   " : "  ") << m.hits[i] << '\n';
  return os.str();
}

std::string ranks_csv(std::span<const double> ranks) {
  std::string out = "index,side,rank\n";
  for (std::size_t i = 0; i < ranks.size(); ++i)
    out += std::to_string(i / 2) + (i % 2 == 0 ? ",head," : ",tail,") + io::format_double(ranks[i]) + '\n';
  return out;
}

}  // namespace kgforge
