#include <map>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "kgforge/eval.hpp"
#include "kgforge/linkpred.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace kgforge;

namespace {

// Fixed score vectors per (test triple, side).
struct TableScorer {
  std::map<std::tuple<int, int, int, int>, Eigen::VectorXd> table;

  void set(const Triple& t, Side side, std::vector<double> s) {
    table[{t.head, t.relation, t.tail, int(side)}] = Eigen::Map<Eigen::VectorXd>(s.data(), Eigen::Index(s.size()));
  }
  Eigen::VectorXd score_candidates(const Triple& t, Side side) const {
    return table.at({t.head, t.relation, t.tail, int(side)});
  }
};

template <typename Inner, typename F>
struct Transformed {
  const Inner& inner;
  F f;
  Eigen::VectorXd score_candidates(const Triple& t, Side side) const {
    return inner.score_candidates(t, side).unaryExpr(f);
  }
};

double oracle_rank(const EmbeddingModel& m, const Triple& t, Side side, const TripleSet* known) {
  const int n = m.num_entities();
  std::vector<double> scores(n);
  std::vector<bool> skip(n, false);
  for (int e = 0; e < n; ++e) {
    Triple c = t;
    (side == Side::Head ? c.head : c.tail) = e;
    scores[e] = m.score(c);
    if (c.head == c.tail) skip[e] = true;
    if (known && known->count(triple_key(c)) && c != t) skip[e] = true;
  }
  return oracle::sorted_rank(scores, side == Side::Head ? t.head : t.tail, skip);
}

}  // namespace

TEST_CASE("rank of a strictly best candidate is 1") {
  Eigen::VectorXd s(4);
  s << 0.1, 0.9, 0.3, 0.2;
  CHECK(rank_from_scores(s, 1, 0) == 1.0);
}

TEST_CASE("a full tie takes the average rank of the block") {
  // the fixed entity is not a candidate, so |E| - 1 entries tie
  const Eigen::VectorXd s = Eigen::VectorXd::Constant(6, 0.5);
  CHECK(rank_from_scores(s, 2, 0) == doctest::Approx(3.0));
  CHECK(rank_from_scores(s, 2, 0) == doctest::Approx(6.0 / 2));
}

TEST_CASE("four-entity hand-scored model") {
  TableScorer scorer;
  const Triple a{0, 0, 1}, b{2, 0, 3};
  scorer.set(a, Side::Head, {0.4, 9.0, 0.3, 0.1});  // truth 0 strictly best -> 1
  scorer.set(a, Side::Tail, {0.9, 0.5, 0.7, 0.2});  // 2 beats truth 1 -> 2
  scorer.set(b, Side::Head, {0.3, 0.3, 0.3, 7.0});  // truth 2 in a three-way tie -> 2
  scorer.set(b, Side::Tail, {0.3, 0.3, 5.0, 0.3});  // three-way tie -> 2
  const std::vector<Triple> test{a, b};

  const auto ranks = collect_ranks(scorer, test, RankMode::Raw, nullptr);
  CHECK(ranks == std::vector<double>{1.0, 2.0, 2.0, 2.0});
  const auto m = metrics_from_ranks(ranks);
  CHECK(m.mrr == 0.625);
  CHECK(m.mr == 1.75);
  CHECK(m.hits_at(1) == 25.0);
  CHECK(m.hits_at(3) == 100.0);
  CHECK(m.hits_at(5) == 100.0);
  CHECK(m.hits_at(10) == 100.0);

  // filtering (0, 0, 2) removes the only candidate above a's tail
  const TripleSet known = make_triple_set(std::vector<Triple>{{0, 0, 2}, a, b});
  const auto filtered = collect_ranks(scorer, test, RankMode::Filtered, &known);
  CHECK(filtered == std::vector<double>{1.0, 1.0, 2.0, 2.0});
  CHECK_THROWS_AS(collect_ranks(scorer, test, RankMode::Filtered, nullptr), Error);
}

TEST_CASE("metric arithmetic") {
  const std::vector<double> ones(6, 1.0);
  const auto perfect = metrics_from_ranks(ones);
  CHECK(perfect.mrr == 1.0);
  CHECK(perfect.mr == 1.0);
  for (int r : kHitsAt) CHECK(perfect.hits_at(r) == 100.0);

  const std::vector<double> two{1.0, 4.0};
  const auto m = metrics_from_ranks(two);
  CHECK(m.mrr == 0.625);
  CHECK(m.mr == 2.5);
  CHECK(m.hits_at(1) == 50.0);
  CHECK(m.hits_at(3) == 50.0);
  CHECK(m.hits_at(5) == 100.0);
  CHECK(m.hits_at(10) == 100.0);
  CHECK_THROWS_AS(metrics_from_ranks(std::vector<double>{}), Error);
}

TEST_CASE("empty test set is an error") {
  Rng rng(1);
  const auto model = init_model(ModelKind::TransE, 4, 1, 3, 1, 1.0, rng);
  const auto g = testing::make_graph(4, 1, {{0, 0, 1}});
  CHECK_THROWS_AS(evaluate(model, std::vector<Triple>{}, RankMode::Raw, g), Error);
}

TEST_CASE("ranks agree with an enumerate-and-sort oracle") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const auto kind = seed % 2 ? ModelKind::RotatE : ModelKind::TransE;
    const auto model = init_model(kind, 15, 3, 4, 1 + int(seed % 2), 2.0, rng);
    std::mt19937_64 pick(seed);
    std::uniform_int_distribution<int> e(0, 14), r(0, 2);
    std::vector<Triple> train, test;
    while (train.size() < 40) {
      Triple t{e(pick), r(pick), e(pick)};
      if (t.head != t.tail) train.push_back(t);
    }
    while (test.size() < 3) {
      Triple t{e(pick), r(pick), e(pick)};
      if (t.head != t.tail) test.push_back(t);
    }
    const auto g = testing::make_graph(15, 3, train, test);
    const auto known = known_triples(g);
    for (auto mode : {RankMode::Raw, RankMode::Filtered}) {
      const auto ranks = collect_ranks(model, test, mode, &known);
      for (std::size_t i = 0; i < test.size(); ++i) {
        const TripleSet* k = mode == RankMode::Filtered ? &known : nullptr;
        CHECK(ranks[2 * i] == oracle_rank(model, test[i], Side::Head, k));
        CHECK(ranks[2 * i + 1] == oracle_rank(model, test[i], Side::Tail, k));
      }
    }
  }
}

TEST_CASE("filtered ranks never exceed raw ranks; thread count does not matter") {
  Rng rng(5);
  const auto model = init_model(ModelKind::TransE, 14, 55, 8, 1, 2.0, rng);
  const auto g = load_dataset(resolve_dataset_dir(testing::nations_dir()));
  const auto known = known_triples(g);
  const auto raw = collect_ranks(model, g.test, RankMode::Raw, nullptr);
  const auto filtered = collect_ranks(model, g.test, RankMode::Filtered, &known);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    CHECK(filtered[i] <= raw[i]);
    CHECK(raw[i] >= 1.0);
    CHECK(raw[i] <= 13.0);
  }
  CHECK(collect_ranks(model, g.test, RankMode::Filtered, &known, 3) == filtered);
}

TEST_CASE("strictly increasing score transforms leave metrics unchanged") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const auto model = init_model(ModelKind::TransE, 12, 2, 4, 2, 2.0, rng);
    const auto g = testing::make_graph(12, 2, {{0, 0, 1}}, {{1, 0, 2}, {3, 1, 4}, {5, 0, 9}});
    const auto base = evaluate(model, g.test, RankMode::Raw, g);
    const auto f = [](double x) { return std::exp(x) * 3.0 + x; };
    const Transformed<EmbeddingModel, decltype(f)> moved{model, f};
    const auto after = evaluate(moved, g.test, RankMode::Raw, g);
    CHECK(after.mrr == base.mrr);
    CHECK(after.mr == base.mr);
    CHECK(after.hits == base.hits);
  }
}

TEST_CASE("metrics json carries every field") {
  const auto m = metrics_from_ranks(std::vector<double>{1.0, 2.0});
  const auto j = nlohmann::json::parse(metrics_json(m));
  CHECK(j["mrr"].get<double>() == 0.75);
  CHECK(j["mr"].get<double>() == 1.5);
  CHECK(j["hits@1"].get<double>() == 50.0);
  CHECK(j["hits@10"].get<double>() == 100.0);
  CHECK(parse_rank_mode("filtered") == RankMode::Filtered);
  CHECK_THROWS_AS(parse_rank_mode("strict"), Error);
  CHECK(ranks_csv(std::vector<double>{1.0, 2.5}) == "index,side,rank\n0,head,1\n0,tail,2.5\n");
}
