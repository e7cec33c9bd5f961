#pragma once

#include <array>
#include <concepts>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Core>

#include "kgforge/graph.hpp"
#include "kgforge/linkpred.hpp"
#include "kgforge/parallel.hpp"

namespace kgforge {

enum class RankMode { Raw, Filtered };

RankMode parse_rank_mode(const std::string& name);
std::string to_string(RankMode m);

/// Anything that can score all |E| completions of one side of a triple.
template <typename S>
concept CandidateScorer = requires(const S& s, const Triple& t, Side side) {
  { s.score_candidates(t, side) } -> std::convertible_to<Eigen::VectorXd>;
};

inline constexpr std::array<int, 4> kHitsAt = {1, 3, 5, 10};

struct RankingMetrics {
  double mrr = 0.0;
  double mr = 0.0;
  std::array<double, 4> hits{};  // percentages, aligned with kHitsAt
  std::size_t ranks = 0;

  double hits_at(int r) const;
};

/// Rank of `truth` among candidate scores (higher is better). Candidates equal
/// to `fixed` (self-loops) and those flagged in `excluded` are skipped; ties
/// share the average rank of their block.
double rank_from_scores(const Eigen::VectorXd& scores, EntityId truth, EntityId fixed,
                        const std::vector<char>* excluded = nullptr);

/// Candidates whose completed triple is in `known` (other than `truth` itself).
std::vector<char> filtered_mask(const Triple& t, Side side, std::int32_t n_entities, const TripleSet& known);

template <CandidateScorer Scorer>
double rank_triple(const Scorer& scorer, const Triple& t, Side side, RankMode mode, const TripleSet* known) {
  const Eigen::VectorXd scores = scorer.score_candidates(t, side);
  const EntityId truth = side == Side::Head ? t.head : t.tail;
  const EntityId fixed = side == Side::Head ? t.tail : t.head;
  if (mode == RankMode::Filtered) {
    if (!known) throw Error("filtered ranking needs the set of known triples");
    const auto mask = filtered_mask(t, side, static_cast<std::int32_t>(scores.size()), *known);
    return rank_from_scores(scores, truth, fixed, &mask);
  }
  return rank_from_scores(scores, truth, fixed);
}

/// Head-side then tail-side rank for every test triple (2 |test| values, in
/// test order). Triples are ranked on up to `threads` workers.
template <CandidateScorer Scorer>
std::vector<double> collect_ranks(const Scorer& scorer, std::span<const Triple> test, RankMode mode,
                                  const TripleSet* known, int threads = 1) {
  std::vector<double> ranks(2 * test.size());
  parallel_for(test.size(), threads, [&](std::size_t i) {
    ranks[2 * i] = rank_triple(scorer, test[i], Side::Head, mode, known);
    ranks[2 * i + 1] = rank_triple(scorer, test[i], Side::Tail, mode, known);
  });
  return ranks;
}

/// Throws on an empty rank list.
RankingMetrics metrics_from_ranks(std::span<const double> ranks);

/// Every triple of train, valid and test.
TripleSet known_triples(const KnowledgeGraph& g);

template <CandidateScorer Scorer>
RankingMetrics evaluate(const Scorer& scorer, std::span<const Triple> test, RankMode mode,
                        const KnowledgeGraph& g, int threads = 1) {
  if (test.empty()) throw Error("evaluate: empty test set");
  TripleSet known;
  if (mode == RankMode::Filtered) known = known_triples(g);
  const auto ranks = collect_ranks(scorer, test, mode, mode == RankMode::Filtered ? &known : nullptr, threads);
  return metrics_from_ranks(ranks);
}

/// {"mrr":..,"mr":..,"hits@1":..,...}
std::string metrics_json(const RankingMetrics& m);
std::string metrics_table(const RankingMetrics& m);
/// CSV `index,side,rank`.
std::string ranks_csv(std::span<const double> ranks);

}  // namespace kgforge
