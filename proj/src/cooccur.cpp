#include "kgforge/cooccur.hpp"

#include <algorithm>
#include <vector>

#include "kgforge/io.hpp"

namespace kgforge {

namespace {

template <typename RoleOf>
SparseCountMatrix count_by_role(const KnowledgeGraph& g, RoleOf role) {
  std::vector<Eigen::Triplet<double, std::int64_t>> entries;
  entries.reserve(g.train.size());
  for (const auto& t : g.train) entries.emplace_back(role(t), t.relation, 1.0);
  SparseCountMatrix m(g.num_entities(), g.num_relations());
  m.setFromTriplets(entries.begin(), entries.end());  // duplicates are summed
  m.makeCompressed();
  return m;
}

// Value of m(row, col) for a row-major sparse matrix, by binary search.
double coeff(const SparseCountMatrix& m, Eigen::Index row, Eigen::Index col) {
  const auto* outer = m.outerIndexPtr();
  const auto* inner = m.innerIndexPtr();
  const auto* first = inner + outer[row];
  const auto* last = inner + outer[row + 1];
  const auto* it = std::lower_bound(first, last, static_cast<std::int64_t>(col));
  return (it != last && *it == col) ? m.valuePtr()[it - inner] : 0.0;
}

void check_pair(const SparseCountMatrix& A, const SparseCountMatrix& B, EntityId h, EntityId t) {
  if (h == t) throw Error("relation distribution requested for a self pair");
  if (h < 0 || h >= A.rows() || t < 0 || t >= B.rows()) throw Error("entity id out of range");
}

}  // namespace

SparseCountMatrix build_head_relation(const KnowledgeGraph& g) {
  return count_by_role(g, [](const Triple& t) { return t.head; });
}

SparseCountMatrix build_tail_relation(const KnowledgeGraph& g) {
  return count_by_role(g, [](const Triple& t) { return t.tail; });
}

SparseCountMatrix build_affinity(const SparseCountMatrix& A, const SparseCountMatrix& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw Error("affinity: head-relation and tail-relation shapes differ");
  SparseCountMatrix C = A * B.transpose();
  C.prune(0.0);
  C.makeCompressed();
  return C;
}

AffinityProduct make_affinity_product(const SparseCountMatrix& A, const SparseCountMatrix& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw Error("affinity: head-relation and tail-relation shapes differ");
  return {A, B};
}

RelationDistribution relation_distribution(const SparseCountMatrix& A, const SparseCountMatrix& B,
                                           EntityId h, EntityId t) {
  check_pair(A, B, h, t);
  RelationDistribution d;
  d.probs = Eigen::VectorXd::Zero(A.cols());
  for (SparseCountMatrix::InnerIterator it(A, h); it; ++it)
    d.probs[it.col()] = it.value() * coeff(B, t, it.col());
  const double total = d.probs.sum();
  if (total > 0) d.probs /= total;
  return d;
}

std::optional<RelationId> sample_relation(const SparseCountMatrix& A, const SparseCountMatrix& B,
                                          EntityId h, EntityId t, Rng& rng) {
  check_pair(A, B, h, t);
  // Rows of A are short (at most |R| entries), so a two-pass scan is cheap.
  double total = 0.0;
  for (SparseCountMatrix::InnerIterator it(A, h); it; ++it) total += it.value() * coeff(B, t, it.col());
  if (total <= 0.0) return std::nullopt;

  const double u = uniform01(rng) * total;
  double acc = 0.0;
  std::optional<RelationId> last;
  for (SparseCountMatrix::InnerIterator it(A, h); it; ++it) {
    const double w = it.value() * coeff(B, t, it.col());
    if (w <= 0.0) continue;
    last = static_cast<RelationId>(it.col());
    acc += w;
    if (u < acc) return last;
  }
  return last;  // u landed on the rounding edge of the last bucket
}

std::string serialize_coordinates(const SparseCountMatrix& m) {
  std::string out;
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    for (SparseCountMatrix::InnerIterator it(m, r); it; ++it) {
      out += std::to_string(it.row());
      out += '\t';
      out += std::to_string(it.col());
      out += '\t';
      out += io::format_double(it.value());
      out += '\n';
    }
  }
  return out;
}

}  // namespace kgforge
