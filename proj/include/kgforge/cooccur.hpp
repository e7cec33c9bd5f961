#pragma once

#include <optional>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "kgforge/graph.hpp"
#include "kgforge/rng.hpp"

namespace kgforge {

/// Non-negative count matrix; integer counts are stored exactly in doubles
/// and explicit zeros are never stored.
using SparseCountMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, std::int64_t>;

/// A[i][j] = number of train triples with head i and relation j (|E| x |R|).
SparseCountMatrix build_head_relation(const KnowledgeGraph& g);

/// B[i][j] = number of train triples with tail i and relation j (|E| x |R|).
SparseCountMatrix build_tail_relation(const KnowledgeGraph& g);

/// C = A * B^T (|E| x |E|). C[h][t] is the relation-marginalized number of
/// (head h, tail t) co-occurrences. Throws on shape mismatch.
SparseCountMatrix build_affinity(const SparseCountMatrix& A, const SparseCountMatrix& B);

/// C = A * B^T held in factored form. Exact same linear operator as
/// build_affinity(A, B), but never materialized: on large graphs C is
/// close to dense.
struct AffinityProduct {
  const SparseCountMatrix& head_relation;
  const SparseCountMatrix& tail_relation;

  Eigen::Index rows() const { return head_relation.rows(); }
  Eigen::Index cols() const { return tail_relation.rows(); }
};

AffinityProduct make_affinity_product(const SparseCountMatrix& A, const SparseCountMatrix& B);

/// p(r | h, t): elementwise product of row h of A and row t of B, normalized.
struct RelationDistribution {
  Eigen::VectorXd probs;
  bool empty() const { return probs.size() == 0 || probs.sum() == 0.0; }
};

/// Throws when h == t. Returns an all-zero (empty) distribution when the pair
/// shares no relation.
RelationDistribution relation_distribution(const SparseCountMatrix& A, const SparseCountMatrix& B,
                                           EntityId h, EntityId t);

/// Draws r ~ p(r | h, t) without materializing the full vector. nullopt when
/// the pair has no support.
std::optional<RelationId> sample_relation(const SparseCountMatrix& A, const SparseCountMatrix& B,
                                          EntityId h, EntityId t, Rng& rng);

/// `row<TAB>col<TAB>value` lines, row-major.
std::string serialize_coordinates(const SparseCountMatrix& m);

}  // namespace kgforge
