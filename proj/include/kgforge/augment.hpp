#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kgforge/cluster.hpp"
#include "kgforge/cooccur.hpp"
#include "kgforge/graph.hpp"
#include "kgforge/rng.hpp"

namespace kgforge {

struct SamplerConfig {
  std::int64_t target_count = 0;  // L
  std::uint64_t seed = 0;
  bool exclude_train = false;
  /// 0 means 100 * target_count.
  std::int64_t max_attempts = 0;
  /// Independent generators whose outputs are merged; 1 is fully sequential.
  int workers = 1;

  std::int64_t attempt_budget() const { return max_attempts > 0 ? max_attempts : 100 * target_count; }
  void validate() const;
};

struct RejectionCounts {
  std::int64_t attempts = 0;
  std::int64_t duplicate = 0;
  std::int64_t no_support = 0;
  std::int64_t in_train = 0;
};

struct AugmentedSet {
  /// Shuffled once after generation; consumers take prefixes of this order.
  std::vector<Triple> triples;
  /// Cluster each triple was drawn from, parallel to `triples`.
  std::vector<std::int32_t> cluster_of;
  RejectionCounts rejections;
  /// Generation stopped at the attempt budget before reaching L.
  bool exhausted = false;

  std::size_t size() const { return triples.size(); }
  bool empty() const { return triples.empty(); }
};

/// Draws triples from p(cluster) p(h, t | cluster) p(r | h, t) with p(cluster)
/// uniform over clusters holding at least two entities and p(h, t | cluster)
/// uniform over ordered pairs of distinct members.
class TripleSampler {
 public:
  /// Throws when no cluster has two or more members.
  TripleSampler(const Partition& partition, const SparseCountMatrix& head_relation,
                const SparseCountMatrix& tail_relation);

  std::int32_t sample_cluster(Rng& rng) const;
  std::pair<EntityId, EntityId> sample_pair(std::int32_t cluster, Rng& rng) const;
  std::optional<RelationId> sample_relation(EntityId h, EntityId t, Rng& rng) const;

  /// One full draw; nullopt when the sampled pair has no relation support.
  std::optional<Triple> draw(Rng& rng, std::int32_t* cluster_out = nullptr) const;

  const std::vector<std::int32_t>& eligible_clusters() const { return eligible_; }
  const std::vector<EntityId>& members(std::int32_t cluster) const { return members_.at(static_cast<std::size_t>(cluster)); }

 private:
  std::vector<std::vector<EntityId>> members_;
  std::vector<std::int32_t> eligible_;
  const SparseCountMatrix& head_relation_;
  const SparseCountMatrix& tail_relation_;
};

/// Free-function forms of the sampler steps.
std::int32_t sample_cluster(const Partition& partition, Rng& rng);
std::pair<EntityId, EntityId> sample_pair(const Partition& partition, std::int32_t cluster, Rng& rng);

/// Draws until L distinct triples are collected or the attempt budget runs
/// out. Duplicates, pairs without relation support and (optionally) train
/// members are rejected and redrawn. With several workers each owns a seeded
/// stream; their outputs are merged in worker order, deduplicated, truncated
/// to L, and shuffled with the master seed.
AugmentedSet generate(const KnowledgeGraph& g, const Partition& partition,
                      const SparseCountMatrix& head_relation, const SparseCountMatrix& tail_relation,
                      const SamplerConfig& cfg);

/// key=value metadata sidecar for an augmented set.
std::string augment_metadata(const AugmentedSet& s, const SamplerConfig& cfg, std::int32_t n_clusters);

}  // namespace kgforge
