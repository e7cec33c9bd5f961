#include "kgforge/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <tuple>

#include "json.hpp"

#include "kgforge/io.hpp"

namespace kgforge {

ClusterAlgorithm parse_cluster_algorithm(const std::string& name) {
  if (name == "agglomerative") return ClusterAlgorithm::Agglomerative;
  if (name == "dbscan") return ClusterAlgorithm::Dbscan;
  throw Error("unknown clustering algorithm '" + name + "' (expected agglomerative or dbscan)");
}

std::string to_string(ClusterAlgorithm a) { return a == ClusterAlgorithm::Agglomerative ? "agglomerative" : "dbscan"; }

RunConfig RunConfig::with_seed(std::uint64_t global_seed) const {
  RunConfig c = *this;
  c.seed = global_seed;
  c.nnmf.seed = derive_seed(global_seed, "nnmf");
  c.sampler.seed = derive_seed(global_seed, "sampler");
  c.train.seed = derive_seed(global_seed, "trainer");
  return c;
}

void RunConfig::validate() const {
  nnmf.validate();
  sampler.validate();
  train.validate();
  if (cluster.n_clusters < 0) throw Error("n_clusters must be >= 0 (0 selects the default)");
  if (cluster.eps < 0) throw Error("dbscan eps must be >= 0 (0 selects it from the data)");
  if (cluster.min_pts < 1) throw Error("dbscan min_pts must be >= 1");
  if (threads < 1) throw Error("threads must be >= 1");
}

namespace {

// Median distance from each point to its min_pts-th nearest neighbor.
double auto_eps(const FeatureMatrix& x, std::int32_t min_pts) {
  const auto n = x.rows();
  const auto k = std::min<Eigen::Index>(std::max(min_pts - 1, 1), n - 1);
  if (k < 1) return 1.0;
  std::vector<double> kth(static_cast<std::size_t>(n));
  std::vector<double> d(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) d[j] = (x.row(i) - x.row(j)).norm();
    std::nth_element(d.begin(), d.begin() + k, d.end());  // d[0] is the point itself
    kth[i] = d[k];
  }
  std::nth_element(kth.begin(), kth.begin() + n / 2, kth.end());
  const double eps = kth[n / 2];
  return eps > 0.0 ? eps : 1e-12;
}

}  // namespace

Partition cluster_entities(const FactorPair& factors, const ClusterConfig& cfg, std::int32_t n_entities) {
  const FeatureMatrix features = concat_factors(factors);
  if (cfg.algorithm == ClusterAlgorithm::Dbscan) {
    const double eps = cfg.eps > 0.0 ? cfg.eps : auto_eps(features, cfg.min_pts);
    return dbscan(features, eps, cfg.min_pts);
  }
  const auto n = cfg.n_clusters > 0 ? cfg.n_clusters : default_cluster_count(n_entities);
  return agglomerative(features, n, cfg.linkage);
}

EntityClusters fit_entity_clusters(const KnowledgeGraph& g, const RunConfig& cfg) {
  EntityClusters out;
  out.head_relation = build_head_relation(g);
  out.tail_relation = build_tail_relation(g);
  if (cfg.nnmf.rank > g.num_entities())
    throw Error("nnmf rank " + std::to_string(cfg.nnmf.rank) + " exceeds the entity count " +
                std::to_string(g.num_entities()) + "; lower --rank");
  out.factors = nnmf(make_affinity_product(out.head_relation, out.tail_relation), cfg.nnmf);
  out.partition = cluster_entities(out.factors, cfg.cluster, g.num_entities());
  return out;
}

AugmentedSet augment_graph(const KnowledgeGraph& g, const EntityClusters& clusters, const RunConfig& cfg) {
  return generate(g, clusters.partition, clusters.head_relation, clusters.tail_relation, cfg.sampler);
}

TrainEvalResult train_and_evaluate(const KnowledgeGraph& g, std::span<const Triple> augmented, const RunConfig& cfg) {
  TrainEvalResult out;
  Validator validator;
  if (cfg.train.validate_every > 0 && !g.valid.empty()) {
    validator = [&](const EmbeddingModel& m) { return evaluate(m, g.valid, cfg.eval_mode, g, cfg.threads).mrr; };
  }
  out.trained = train(g, augmented, cfg.train, cfg.model, validator);
  out.metrics = evaluate(out.trained.model, g.test, cfg.eval_mode, g, cfg.threads);
  return out;
}

namespace {

nlohmann::ordered_json record_header(const std::string& variant, const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["variant"] = variant;
  j["model"] = to_string(cfg.model);
  j["eval_mode"] = to_string(cfg.eval_mode);
  return j;
}

void put_metrics(nlohmann::ordered_json& j, const RankingMetrics& m) {
  j["mrr"] = m.mrr;
  j["mr"] = m.mr;
  for (std::size_t i = 0; i < kHitsAt.size(); ++i) j["hits@" + std::to_string(kHitsAt[i])] = m.hits[i];
}

}  // namespace

std::string metrics_record(const std::string& variant, const RunConfig& cfg, std::uint64_t seed,
                           const RankingMetrics& m) {
  auto j = record_header(variant, cfg);
  j["seed"] = seed;
  put_metrics(j, m);
  return j.dump();
}

std::string aggregate_records(const std::string& variant, const RunConfig& cfg,
                              const std::vector<RankingMetrics>& runs) {
  if (runs.empty()) return {};
  auto stat = [&](auto field) {
    double mean = 0.0;
    for (const auto& r : runs) mean += field(r);
    mean /= static_cast<double>(runs.size());
    double var = 0.0;
    for (const auto& r : runs) var += (field(r) - mean) * (field(r) - mean);
    const double sd = runs.size() > 1 ? std::sqrt(var / static_cast<double>(runs.size() - 1)) : 0.0;
    return std::pair{mean, sd};
  };
  RankingMetrics mean, sd;
  std::tie(mean.mrr, sd.mrr) = stat([](const RankingMetrics& r) { return r.mrr; });
  std::tie(mean.mr, sd.mr) = stat([](const RankingMetrics& r) { return r.mr; });
  for (std::size_t i = 0; i < kHitsAt.size(); ++i)
    std::tie(mean.hits[i], sd.hits[i]) = stat([i](const RankingMetrics& r) { return r.hits[i]; });

  std::string out;
  for (const auto& [name, m] : {std::pair{"mean", mean}, std::pair{"std", sd}}) {
    auto j = record_header(variant, cfg);
    j["aggregate"] = name;
    j["runs"] = runs.size();
    put_metrics(j, m);
    out += j.dump() + '\n';
  }
  return out;
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "num-aug") return SweepAxis::NumAug;
  if (name == "exponent-k") return SweepAxis::ExponentK;
  if (name == "cluster-algo") return SweepAxis::ClusterAlgo;
  throw Error("unknown sweep axis '" + name + "' (expected num-aug, exponent-k or cluster-algo)");
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::NumAug: return "num-aug";
    case SweepAxis::ExponentK: return "exponent-k";
    case SweepAxis::ClusterAlgo: return "cluster-algo";
  }
  return {};
}

namespace {

ClusterConfig cluster_variant(const ClusterConfig& base, const std::string& value) {
  ClusterConfig c = base;
  if (value == "agglomerative") {
    c.algorithm = ClusterAlgorithm::Agglomerative;
    c.linkage = Linkage::Ward;
  } else if (value == "agglomerative-average") {
    c.algorithm = ClusterAlgorithm::Agglomerative;
    c.linkage = Linkage::Average;
  } else if (value == "dbscan") {
    c.algorithm = ClusterAlgorithm::Dbscan;
  } else {
    throw Error("unknown cluster-algo sweep value '" + value + "'");
  }
  return c;
}

std::int64_t parse_count(const std::string& v) {
  std::size_t used = 0;
  const auto n = std::stoll(v, &used);
  if (used != v.size() || n < 0) throw Error("sweep value '" + v + "' is not a non-negative integer");
  return n;
}

}  // namespace

std::vector<SweepRow> run_sweep(const KnowledgeGraph& g, const RunConfig& base, SweepAxis axis,
                                const std::vector<std::string>& values, const std::vector<std::uint64_t>& seeds) {
  if (values.empty()) throw Error("sweep needs at least one value");
  if (seeds.empty()) throw Error("sweep needs at least one seed");
  // Validate every value before spending time on training.
  for (const auto& v : values) {
    if (axis == SweepAxis::ClusterAlgo) cluster_variant(base.cluster, v);
    else parse_count(v);
  }

  std::vector<SweepRow> rows;
  for (auto seed : seeds) {
    const RunConfig cfg = base.with_seed(seed);
    std::optional<EntityClusters> clusters;
    auto fitted = [&]() -> EntityClusters& {
      if (!clusters) clusters = fit_entity_clusters(g, cfg);
      return *clusters;
    };
    std::optional<AugmentedSet> fixed_set;  // shared by the exponent-k axis

    for (const auto& value : values) {
      RunConfig point = cfg;
      AugmentedSet set;
      switch (axis) {
        case SweepAxis::NumAug:
          point.sampler.target_count = parse_count(value);
          if (point.sampler.target_count > 0) set = augment_graph(g, fitted(), point);
          break;
        case SweepAxis::ExponentK:
          point.train.exponent_k = static_cast<int>(parse_count(value));
          if (point.sampler.target_count > 0) {
            if (!fixed_set) fixed_set = augment_graph(g, fitted(), point);
            set = *fixed_set;
          }
          break;
        case SweepAxis::ClusterAlgo: {
          point.cluster = cluster_variant(cfg.cluster, value);
          if (point.sampler.target_count > 0) {
            EntityClusters variant = fitted();
            variant.partition = cluster_entities(variant.factors, point.cluster, g.num_entities());
            set = augment_graph(g, variant, point);
          }
          break;
        }
      }
      auto result = train_and_evaluate(g, set.triples, point);
      rows.push_back({value, seed, result.metrics});
    }
  }
  return rows;
}

std::string sweep_csv(SweepAxis axis, const std::vector<SweepRow>& rows) {
  std::string out = "axis,value,seed,mrr,mr,h1,h3,h5,h10\n";
  for (const auto& r : rows) {
    out += to_string(axis) + ',' + r.value + ',' + std::to_string(r.seed) + ',' + io::format_double(r.metrics.mrr) +
           ',' + io::format_double(r.metrics.mr);
    for (double h : r.metrics.hits) out += ',' + io::format_double(h);
    out += '\n';
  }
  return out;
}

std::vector<std::string> config_file_args(const std::filesystem::path& path) {
  // section -> accepted keys; each key is the long flag name without dashes.
  static const std::map<std::string, std::vector<std::string>> schema = {
      {"run", {"dataset", "out", "seed", "seeds", "threads"}},
      {"nnmf", {"rank", "alpha", "l1-mix", "nnmf-iters", "nnmf-tol"}},
      {"cluster", {"cluster-algo", "n-clusters", "linkage", "eps", "min-pts"}},
      {"sampler", {"num-aug", "exclude-train", "max-attempts", "workers"}},
      {"train", {"model", "epochs", "exponent-k", "batch-size", "lr", "margin", "negatives", "norm", "dim",
                 "validate-every"}},
      {"eval", {"eval-mode"}},
  };

  const std::string text = io::read_file(path);
  std::vector<std::string> args;
  std::string section;
  std::size_t lineno = 0;
  for (auto raw : io::split(text, '\n')) {
    ++lineno;
    auto line = io::trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(path.string(), lineno, "unterminated section header");
      section = std::string(io::trim(line.substr(1, line.size() - 2)));
      if (!schema.contains(section)) throw ParseError(path.string(), lineno, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(path.string(), lineno, "expected key = value");
    std::string key(io::trim(line.substr(0, eq)));
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string value(io::trim(line.substr(eq + 1)));
    if (section.empty()) throw ParseError(path.string(), lineno, "key outside of a section");
    const auto& keys = schema.at(section);
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ParseError(path.string(), lineno, "unknown key '" + key + "' in [" + section + "]");
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

}  // namespace kgforge
