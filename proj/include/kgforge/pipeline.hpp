#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kgforge/augment.hpp"
#include "kgforge/cluster.hpp"
#include "kgforge/cooccur.hpp"
#include "kgforge/eval.hpp"
#include "kgforge/graph.hpp"
#include "kgforge/linkpred.hpp"
#include "kgforge/nnmf.hpp"

namespace kgforge {

enum class ClusterAlgorithm { Agglomerative, Dbscan };

ClusterAlgorithm parse_cluster_algorithm(const std::string& name);
std::string to_string(ClusterAlgorithm a);

struct ClusterConfig {
  ClusterAlgorithm algorithm = ClusterAlgorithm::Agglomerative;
  std::int32_t n_clusters = 0;  // 0: max(2, round(sqrt(|E|)))
  Linkage linkage = Linkage::Ward;
  double eps = 0.0;             // DBSCAN radius; 0: median distance to the min_pts-th neighbor
  std::int32_t min_pts = 5;     // DBSCAN density threshold
};

/// Everything one end-to-end run needs. Component seeds are derived from
/// `seed` through named sub-streams (see with_seed).
struct RunConfig {
  std::filesystem::path dataset;
  NnmfConfig nnmf;
  ClusterConfig cluster;
  SamplerConfig sampler;
  TrainConfig train;
  ModelKind model = ModelKind::TransE;
  RankMode eval_mode = RankMode::Raw;
  std::uint64_t seed = 0;
  int threads = 1;

  /// Copy with nnmf, sampler and trainer seeds derived from `global_seed`.
  RunConfig with_seed(std::uint64_t global_seed) const;
  void validate() const;
};

/// Co-occurrence statistics, factors and entity partition for one graph.
struct EntityClusters {
  SparseCountMatrix head_relation;
  SparseCountMatrix tail_relation;
  FactorPair factors;
  Partition partition;
};

/// Builds A and B, factorizes C = A B^T and clusters W' = [W1 | W2^T].
EntityClusters fit_entity_clusters(const KnowledgeGraph& g, const RunConfig& cfg);

/// Re-partitions already factorized entities (used when only the clustering changes).
Partition cluster_entities(const FactorPair& factors, const ClusterConfig& cfg, std::int32_t n_entities);

AugmentedSet augment_graph(const KnowledgeGraph& g, const EntityClusters& clusters, const RunConfig& cfg);

struct TrainEvalResult {
  TrainResult trained;
  RankingMetrics metrics;
};

/// Trains on train + scheduled prefixes of `augmented`, then ranks the test split.
TrainEvalResult train_and_evaluate(const KnowledgeGraph& g, std::span<const Triple> augmented, const RunConfig& cfg);

/// One JSON line: variant, model, seed, eval mode and the metrics.
std::string metrics_record(const std::string& variant, const RunConfig& cfg, std::uint64_t seed,
                           const RankingMetrics& m);
/// Mean and sample standard deviation rows over several seeds.
std::string aggregate_records(const std::string& variant, const RunConfig& cfg,
                              const std::vector<RankingMetrics>& runs);

enum class SweepAxis { NumAug, ExponentK, ClusterAlgo };

SweepAxis parse_sweep_axis(const std::string& name);
std::string to_string(SweepAxis a);

struct SweepRow {
  std::string value;
  std::uint64_t seed = 0;
  RankingMetrics metrics;
};

/// One axis per call; everything else stays at `cfg`. Cluster-algo values are
/// `agglomerative`, `agglomerative-average` or `dbscan`.
std::vector<SweepRow> run_sweep(const KnowledgeGraph& g, const RunConfig& cfg, SweepAxis axis,
                                const std::vector<std::string>& values, const std::vector<std::uint64_t>& seeds);

/// `axis,value,seed,mrr,mr,h1,h3,h5,h10`
std::string sweep_csv(SweepAxis axis, const std::vector<SweepRow>& rows);

/// Turns a sectioned key=value config file into `--flag=value` arguments.
/// Unknown sections or keys are errors.
std::vector<std::string> config_file_args(const std::filesystem::path& path);

}  // namespace kgforge
