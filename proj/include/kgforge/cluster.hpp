#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kgforge/graph.hpp"
#include "kgforge/nnmf.hpp"

namespace kgforge {

/// Row-major so each entity's feature vector is contiguous.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Disjoint, covering assignment of entities to clusters 0..n_clusters-1,
/// every cluster non-empty.
struct Partition {
  std::vector<std::int32_t> assignment;
  std::int32_t n_clusters = 0;

  std::size_t size() const { return assignment.size(); }
  std::vector<std::vector<EntityId>> members() const;
  /// Throws when the invariants above do not hold.
  void validate() const;
};

/// Relabels clusters in order of their smallest member, so two partitions
/// that agree up to relabeling compare equal afterwards.
Partition canonicalize(std::vector<std::int32_t> labels);

/// W' = [W1 | W2^T]: entity i's head-role factors followed by its tail-role factors.
FeatureMatrix concat_factors(const FactorPair& f);

enum class Linkage { Ward, Average };

Linkage parse_linkage(const std::string& name);
std::string to_string(Linkage l);

/// One merge of the dendrogram: clusters `a` and `b` (slot ids) joined at `height`.
struct Merge {
  std::int32_t a = 0;
  std::int32_t b = 0;
  double height = 0.0;
};

/// Full dendrogram by nearest-neighbor chain. Ward works on centroids and
/// sizes in O(n) memory; average linkage keeps a condensed distance matrix.
/// Merges are returned in chain order, not sorted by height.
std::vector<Merge> nn_chain(const FeatureMatrix& x, Linkage linkage);

/// Hierarchical clustering cut at exactly n_clusters clusters.
/// Throws when n_clusters is outside [1, rows].
Partition agglomerative(const FeatureMatrix& x, std::int32_t n_clusters,
                        Linkage linkage = Linkage::Ward);

/// Standard DBSCAN on Euclidean distance. Noise points become singleton
/// clusters so the result is a valid partition.
Partition dbscan(const FeatureMatrix& x, double eps, std::int32_t min_pts);

/// max(2, round(sqrt(n))) clamped to n.
std::int32_t default_cluster_count(std::int32_t n_entities);

/// `entity_id<TAB>cluster_id` lines.
std::string serialize_partition(const Partition& p);

}  // namespace kgforge
