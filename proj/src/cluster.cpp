#include "kgforge/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace kgforge {

std::vector<std::vector<EntityId>> Partition::members() const {
  std::vector<std::vector<EntityId>> out(static_cast<std::size_t>(n_clusters));
  for (std::size_t i = 0; i < assignment.size(); ++i)
    out[static_cast<std::size_t>(assignment[i])].push_back(static_cast<EntityId>(i));
  return out;
}

void Partition::validate() const {
  if (n_clusters < 1 && !assignment.empty()) throw Error("partition: no clusters");
  std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(n_clusters, 0)), 0);
  for (auto c : assignment) {
    if (c < 0 || c >= n_clusters) throw Error("partition: cluster index out of range");
    ++counts[static_cast<std::size_t>(c)];
  }
  for (auto n : counts)
    if (n == 0) throw Error("partition: empty cluster");
}

Partition canonicalize(std::vector<std::int32_t> labels) {
  Partition p;
  std::unordered_map<std::int32_t, std::int32_t> remap;
  for (auto& l : labels) {
    auto [it, inserted] = remap.try_emplace(l, p.n_clusters);
    if (inserted) ++p.n_clusters;
    l = it->second;
  }
  p.assignment = std::move(labels);
  return p;
}

FeatureMatrix concat_factors(const FactorPair& f) {
  if (f.W1.rows() != f.W2.cols()) throw Error("concat_factors: W1 rows differ from W2 columns");
  FeatureMatrix w(f.W1.rows(), f.W1.cols() + f.W2.rows());
  w << f.W1, f.W2.transpose();
  return w;
}

Linkage parse_linkage(const std::string& name) {
  if (name == "ward") return Linkage::Ward;
  if (name == "average") return Linkage::Average;
  throw Error("unknown linkage '" + name + "' (expected ward or average)");
}

std::string to_string(Linkage l) { return l == Linkage::Ward ? "ward" : "average"; }

namespace {

// Ward: squared merge height 2 na nb / (na + nb) * ||ca - cb||^2, from centroids.
class WardState {
 public:
  explicit WardState(const FeatureMatrix& x) : centroid_(x), size_(static_cast<std::size_t>(x.rows()), 1.0) {}

  double cost(std::int32_t a, std::int32_t b) const {
    const double na = size_[a], nb = size_[b];
    return 2.0 * na * nb / (na + nb) * (centroid_.row(a) - centroid_.row(b)).squaredNorm();
  }
  // Cluster b is folded into slot a.
  void merge(std::int32_t a, std::int32_t b) {
    const double na = size_[a], nb = size_[b];
    centroid_.row(a) = (na * centroid_.row(a) + nb * centroid_.row(b)) / (na + nb);
    size_[a] = na + nb;
  }
  static double height(double cost) { return std::sqrt(cost); }

 private:
  FeatureMatrix centroid_;
  std::vector<double> size_;
};

// Average linkage over a condensed Euclidean distance matrix.
class AverageState {
 public:
  explicit AverageState(const FeatureMatrix& x)
      : n_(static_cast<std::size_t>(x.rows())), dist_(n_ * (n_ - 1) / 2), size_(n_, 1.0) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j)
        dist_[index(i, j)] = (x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j))).norm();
  }

  double cost(std::int32_t a, std::int32_t b) const { return dist_[index(a, b)]; }
  void merge(std::int32_t a, std::int32_t b, const std::vector<std::int32_t>& active) {
    const double na = size_[a], nb = size_[b];
    for (auto k : active) {
      if (k == a || k == b) continue;
      dist_[index(a, k)] = (na * dist_[index(a, k)] + nb * dist_[index(b, k)]) / (na + nb);
    }
    size_[a] = na + nb;
  }
  static double height(double cost) { return cost; }

 private:
  std::size_t index(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return i * n_ - i * (i + 1) / 2 + (j - i - 1);
  }
  std::size_t n_;
  std::vector<double> dist_;
  std::vector<double> size_;
};

template <typename State, typename MergeFn>
std::vector<Merge> run_chain(std::int32_t n, State& state, MergeFn merge) {
  std::vector<Merge> merges;
  merges.reserve(static_cast<std::size_t>(std::max(n - 1, 0)));
  std::vector<std::int32_t> active(static_cast<std::size_t>(n));
  std::iota(active.begin(), active.end(), 0);
  std::vector<std::int32_t> chain;

  while (active.size() > 1) {
    if (chain.empty()) chain.push_back(active.front());
    const auto a = chain.back();
    const auto prev = chain.size() >= 2 ? chain[chain.size() - 2] : -1;

    // The chain predecessor wins ties, which guarantees termination; otherwise
    // the smallest slot id wins.
    std::int32_t best = prev;
    double best_cost = prev >= 0 ? state.cost(a, prev) : std::numeric_limits<double>::infinity();
    for (auto j : active) {
      if (j == a) continue;
      const double c = state.cost(a, j);
      if (c < best_cost) {
        best_cost = c;
        best = j;
      }
    }

    if (best != prev) {
      chain.push_back(best);
      continue;
    }
    chain.pop_back();
    chain.pop_back();
    const auto keep = std::min(a, prev), drop = std::max(a, prev);
    merges.push_back({keep, drop, State::height(best_cost)});
    merge(keep, drop, active);
    active.erase(std::lower_bound(active.begin(), active.end(), drop));
  }
  return merges;
}

std::int32_t find_root(std::vector<std::int32_t>& parent, std::int32_t i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

std::vector<Merge> nn_chain(const FeatureMatrix& x, Linkage linkage) {
  const auto n = static_cast<std::int32_t>(x.rows());
  if (linkage == Linkage::Ward) {
    WardState state(x);
    return run_chain(n, state, [&](std::int32_t a, std::int32_t b, const auto&) { state.merge(a, b); });
  }
  AverageState state(x);
  return run_chain(n, state, [&](std::int32_t a, std::int32_t b, const auto& active) { state.merge(a, b, active); });
}

Partition agglomerative(const FeatureMatrix& x, std::int32_t n_clusters, Linkage linkage) {
  const auto n = static_cast<std::int32_t>(x.rows());
  if (n_clusters < 1 || n_clusters > n)
    throw Error("agglomerative: n_clusters " + std::to_string(n_clusters) + " outside [1, " +
                std::to_string(n) + "]");

  auto merges = nn_chain(x, linkage);
  // Chain order already places children before parents; a stable sort keeps
  // that order among equal heights.
  std::stable_sort(merges.begin(), merges.end(),
                   [](const Merge& l, const Merge& r) { return l.height < r.height; });

  std::vector<std::int32_t> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  for (std::int32_t k = 0; k < n - n_clusters; ++k) {
    const auto ra = find_root(parent, merges[k].a), rb = find_root(parent, merges[k].b);
    parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::vector<std::int32_t> labels(static_cast<std::size_t>(n));
  for (std::int32_t i = 0; i < n; ++i) labels[i] = find_root(parent, i);
  return canonicalize(std::move(labels));
}

Partition dbscan(const FeatureMatrix& x, double eps, std::int32_t min_pts) {
  if (!(eps > 0.0)) throw Error("dbscan: eps must be > 0");
  if (min_pts < 1) throw Error("dbscan: min_pts must be >= 1");
  const auto n = static_cast<std::int32_t>(x.rows());
  const double eps_sq = eps * eps;

  auto region = [&](std::int32_t p) {
    std::vector<std::int32_t> out;
    for (std::int32_t q = 0; q < n; ++q)
      if ((x.row(p) - x.row(q)).squaredNorm() <= eps_sq) out.push_back(q);
    return out;
  };

  constexpr std::int32_t kUnvisited = -1, kNoise = -2;
  std::vector<std::int32_t> label(static_cast<std::size_t>(n), kUnvisited);
  std::int32_t next = 0;
  for (std::int32_t p = 0; p < n; ++p) {
    if (label[p] != kUnvisited) continue;
    auto seeds = region(p);
    if (static_cast<std::int32_t>(seeds.size()) < min_pts) {
      label[p] = kNoise;
      continue;
    }
    const auto c = next++;
    label[p] = c;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const auto q = seeds[i];
      if (label[q] == kNoise) label[q] = c;  // border point
      if (label[q] != kUnvisited) continue;
      label[q] = c;
      auto more = region(q);
      if (static_cast<std::int32_t>(more.size()) >= min_pts) seeds.insert(seeds.end(), more.begin(), more.end());
    }
  }
  for (auto& l : label)
    if (l == kNoise) l = next++;
  return canonicalize(std::move(label));
}

std::int32_t default_cluster_count(std::int32_t n_entities) {
  const auto guess = static_cast<std::int32_t>(std::lround(std::sqrt(static_cast<double>(n_entities))));
  return std::min(std::max(2, guess), std::max(n_entities, 1));
}

std::string serialize_partition(const Partition& p) {
  std::string out;
  for (std::size_t i = 0; i < p.assignment.size(); ++i)
    out += std::to_string(i) + '\t' + std::to_string(p.assignment[i]) + '\n';
  return out;
}

}  // namespace kgforge
