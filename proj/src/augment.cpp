#include "kgforge/augment.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <thread>

namespace kgforge {

void SamplerConfig::validate() const {
  if (target_count < 0) throw Error("sampler: target count must be >= 0");
  if (max_attempts < 0) throw Error("sampler: max_attempts must be >= 0");
  if (max_attempts > 0 && max_attempts < target_count) throw Error("sampler: max_attempts must be >= L");
  if (workers < 1) throw Error("sampler: workers must be >= 1");
}

TripleSampler::TripleSampler(const Partition& partition, const SparseCountMatrix& head_relation,
                             const SparseCountMatrix& tail_relation)
    : members_(partition.members()), head_relation_(head_relation), tail_relation_(tail_relation) {
  for (std::size_t c = 0; c < members_.size(); ++c)
    if (members_[c].size() >= 2) eligible_.push_back(static_cast<std::int32_t>(c));
  if (eligible_.empty()) throw Error("no cluster holds two or more entities; nothing can be sampled");
}

std::int32_t TripleSampler::sample_cluster(Rng& rng) const {
  return eligible_[uniform_index(rng, eligible_.size())];
}

std::pair<EntityId, EntityId> TripleSampler::sample_pair(std::int32_t cluster, Rng& rng) const {
  const auto& m = members(cluster);
  if (m.size() < 2) throw Error("sample_pair: cluster has fewer than two members");
  const auto i = uniform_index(rng, m.size());
  auto j = uniform_index(rng, m.size() - 1);
  if (j >= i) ++j;
  return {m[i], m[j]};
}

std::optional<RelationId> TripleSampler::sample_relation(EntityId h, EntityId t, Rng& rng) const {
  return kgforge::sample_relation(head_relation_, tail_relation_, h, t, rng);
}

std::optional<Triple> TripleSampler::draw(Rng& rng, std::int32_t* cluster_out) const {
  const auto c = sample_cluster(rng);
  const auto [h, t] = sample_pair(c, rng);
  const auto r = sample_relation(h, t, rng);
  if (!r) return std::nullopt;
  if (cluster_out) *cluster_out = c;
  return Triple{h, *r, t};
}

std::int32_t sample_cluster(const Partition& partition, Rng& rng) {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(partition.n_clusters), 0);
  for (auto c : partition.assignment) ++sizes[static_cast<std::size_t>(c)];
  std::vector<std::int32_t> eligible;
  for (std::size_t c = 0; c < sizes.size(); ++c)
    if (sizes[c] >= 2) eligible.push_back(static_cast<std::int32_t>(c));
  if (eligible.empty()) throw Error("no cluster holds two or more entities; nothing can be sampled");
  return eligible[uniform_index(rng, eligible.size())];
}

std::pair<EntityId, EntityId> sample_pair(const Partition& partition, std::int32_t cluster, Rng& rng) {
  std::vector<EntityId> m;
  for (std::size_t i = 0; i < partition.assignment.size(); ++i)
    if (partition.assignment[i] == cluster) m.push_back(static_cast<EntityId>(i));
  if (m.size() < 2) throw Error("sample_pair: cluster has fewer than two members");
  const auto i = uniform_index(rng, m.size());
  auto j = uniform_index(rng, m.size() - 1);
  if (j >= i) ++j;
  return {m[i], m[j]};
}

namespace {

struct WorkerOutput {
  std::vector<Triple> triples;
  std::vector<std::int32_t> clusters;
  RejectionCounts rejections;
  bool exhausted = false;
};

WorkerOutput run_worker(const TripleSampler& sampler, const TripleSet* train, std::int64_t quota,
                        std::int64_t budget, Rng rng, TripleSet seen = {}) {
  WorkerOutput out;
  while (static_cast<std::int64_t>(out.triples.size()) < quota) {
    if (out.rejections.attempts >= budget) {
      out.exhausted = true;
      break;
    }
    ++out.rejections.attempts;
    std::int32_t cluster = -1;
    const auto t = sampler.draw(rng, &cluster);
    if (!t) {
      ++out.rejections.no_support;
      continue;
    }
    const auto key = triple_key(*t);
    if (train && train->contains(key)) {
      ++out.rejections.in_train;
      continue;
    }
    if (!seen.insert(key).second) {
      ++out.rejections.duplicate;
      continue;
    }
    out.triples.push_back(*t);
    out.clusters.push_back(cluster);
  }
  return out;
}

}  // namespace

AugmentedSet generate(const KnowledgeGraph& g, const Partition& partition,
                      const SparseCountMatrix& head_relation, const SparseCountMatrix& tail_relation,
                      const SamplerConfig& cfg) {
  cfg.validate();
  AugmentedSet result;
  if (cfg.target_count == 0) return result;
  if (static_cast<std::int64_t>(partition.size()) != g.num_entities())
    throw Error("partition size does not match the entity count");

  const TripleSampler sampler(partition, head_relation, tail_relation);
  const TripleSet train_set = cfg.exclude_train ? make_triple_set(g.train) : TripleSet{};
  const TripleSet* train = cfg.exclude_train ? &train_set : nullptr;
  const std::int64_t budget = cfg.attempt_budget();

  std::vector<WorkerOutput> outputs(static_cast<std::size_t>(cfg.workers));
  if (cfg.workers == 1) {
    outputs[0] = run_worker(sampler, train, cfg.target_count, budget, make_rng(cfg.seed, "sampler"));
  } else {
    const std::int64_t w = cfg.workers;
    const std::int64_t quota = (cfg.target_count + w - 1) / w;
    const std::int64_t worker_budget = (budget + w - 1) / w;
    std::vector<std::thread> threads;
    for (std::int64_t i = 0; i < w; ++i) {
      threads.emplace_back([&, i] {
        outputs[static_cast<std::size_t>(i)] =
            run_worker(sampler, train, quota, worker_budget, make_rng(cfg.seed, "sampler-worker", static_cast<std::uint64_t>(i)));
      });
    }
    for (auto& t : threads) t.join();
  }

  TripleSet merged;
  for (const auto& out : outputs) {
    result.rejections.attempts += out.rejections.attempts;
    result.rejections.no_support += out.rejections.no_support;
    result.rejections.in_train += out.rejections.in_train;
    result.rejections.duplicate += out.rejections.duplicate;
    for (std::size_t i = 0; i < out.triples.size(); ++i) {
      if (static_cast<std::int64_t>(result.triples.size()) >= cfg.target_count) break;
      if (!merged.insert(triple_key(out.triples[i])).second) {
        ++result.rejections.duplicate;
        continue;
      }
      result.triples.push_back(out.triples[i]);
      result.cluster_of.push_back(out.clusters[i]);
    }
  }
  // Workers cannot see each other's draws, so cross-worker duplicates leave
  // a shortfall; refill it sequentially from the unspent budget.
  const auto missing = cfg.target_count - static_cast<std::int64_t>(result.triples.size());
  if (missing > 0 && result.rejections.attempts < budget) {
    const auto extra = run_worker(sampler, train, missing, budget - result.rejections.attempts,
                                  make_rng(cfg.seed, "sampler-topup"), std::move(merged));
    result.rejections.attempts += extra.rejections.attempts;
    result.rejections.no_support += extra.rejections.no_support;
    result.rejections.in_train += extra.rejections.in_train;
    result.rejections.duplicate += extra.rejections.duplicate;
    result.triples.insert(result.triples.end(), extra.triples.begin(), extra.triples.end());
    result.cluster_of.insert(result.cluster_of.end(), extra.clusters.begin(), extra.clusters.end());
  }
  result.exhausted = static_cast<std::int64_t>(result.triples.size()) < cfg.target_count;
  if (result.triples.empty())
    throw Error("augmentation produced no triples within " + std::to_string(budget) + " attempts");

  std::vector<std::size_t> order(result.triples.size());
  std::iota(order.begin(), order.end(), 0);
  auto shuffle_rng = make_rng(cfg.seed, "sampler-shuffle");
  std::shuffle(order.begin(), order.end(), shuffle_rng);
  AugmentedSet shuffled;
  shuffled.rejections = result.rejections;
  shuffled.exhausted = result.exhausted;
  for (auto i : order) {
    shuffled.triples.push_back(result.triples[i]);
    shuffled.cluster_of.push_back(result.cluster_of[i]);
  }
  return shuffled;
}

std::string augment_metadata(const AugmentedSet& s, const SamplerConfig& cfg, std::int32_t n_clusters) {
  std::ostringstream os;
  os << "seed=" << cfg.seed << '\n'
     << "target_count=" << cfg.target_count << '\n'
     << "generated=" << s.size() << '\n'
     << "n_clusters=" << n_clusters << '\n'
     << "exclude_train=" << (cfg.exclude_train ? "true" : "false") << '\n'
     << "workers=" << cfg.workers << '\n'
     << "attempts=" << s.rejections.attempts << '\n'
     << "rejected_duplicate=" << s.rejections.duplicate << '\n'
     << "rejected_no_support=" << s.rejections.no_support << '\n'
     << "rejected_in_train=" << s.rejections.in_train << '\n'
     << "exhausted=" << (s.exhausted ? "true" : "false") << '\n';
  return os.str();
}

}  // namespace kgforge
