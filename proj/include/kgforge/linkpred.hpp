#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kgforge/graph.hpp"
#include "kgforge/rng.hpp"

namespace kgforge {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class ModelKind { TransE, RotatE };

ModelKind parse_model_kind(const std::string& name);
std::string to_string(ModelKind k);

/// Which end of a triple is being replaced.
enum class Side { Head, Tail };

// ---------------------------------------------------------------------------
// Scoring kernels. Generic over Eigen expressions so they work on rows of the
// embedding tables and on plain vectors alike.

/// -||h + r - t||_p, p in {1, 2}.
template <typename H, typename R, typename T>
typename H::Scalar transe_score(const Eigen::MatrixBase<H>& h, const Eigen::MatrixBase<R>& r,
                                const Eigen::MatrixBase<T>& t, int norm_order) {
  const auto diff = (h + r - t).eval();
  return norm_order == 1 ? -diff.template lpNorm<1>() : -diff.norm();
}

/// Gradient of the TransE score. d/dr equals d/dh and d/dt is its negation.
/// The L1 subgradient uses sign(0) = 0.
template <typename H, typename R, typename T>
Eigen::Matrix<typename H::Scalar, Eigen::Dynamic, 1> transe_score_grad_head(
    const Eigen::MatrixBase<H>& h, const Eigen::MatrixBase<R>& r, const Eigen::MatrixBase<T>& t, int norm_order) {
  using Scalar = typename H::Scalar;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> diff = (h + r - t).eval().reshaped();
  if (norm_order == 1) return -diff.array().sign().matrix();
  const Scalar n = diff.norm();
  if (n == Scalar(0)) return Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(diff.size());
  return -diff / n;
}

/// -||h o r - t||^2 with h, t complex (given as real and imaginary parts) and
/// r_i = exp(i * phase_i), so |r_i| = 1 by construction.
template <typename HR, typename HI, typename P, typename TR, typename TI>
typename HR::Scalar rotate_score(const Eigen::MatrixBase<HR>& h_re, const Eigen::MatrixBase<HI>& h_im,
                                 const Eigen::MatrixBase<P>& phase, const Eigen::MatrixBase<TR>& t_re,
                                 const Eigen::MatrixBase<TI>& t_im) {
  const auto c = phase.array().cos();
  const auto s = phase.array().sin();
  const auto u = h_re.array() * c - h_im.array() * s - t_re.array();
  const auto v = h_re.array() * s + h_im.array() * c - t_im.array();
  return -(u.square() + v.square()).sum();
}

template <typename Scalar>
struct RotatEGrad {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> head_re, head_im, phase, tail_re, tail_im;
};

template <typename HR, typename HI, typename P, typename TR, typename TI>
RotatEGrad<typename HR::Scalar> rotate_score_grad(const Eigen::MatrixBase<HR>& h_re, const Eigen::MatrixBase<HI>& h_im,
                                                  const Eigen::MatrixBase<P>& phase, const Eigen::MatrixBase<TR>& t_re,
                                                  const Eigen::MatrixBase<TI>& t_im) {
  using Vec = Eigen::Array<typename HR::Scalar, Eigen::Dynamic, 1>;
  const Vec a = h_re.reshaped().array(), b = h_im.reshaped().array();
  const Vec c = phase.reshaped().array().cos(), s = phase.reshaped().array().sin();
  const Vec u = a * c - b * s - t_re.reshaped().array();
  const Vec v = a * s + b * c - t_im.reshaped().array();
  RotatEGrad<typename HR::Scalar> g;
  g.head_re = (-2.0 * (u * c + v * s)).matrix();
  g.head_im = (-2.0 * (-u * s + v * c)).matrix();
  g.phase = (-2.0 * (u * (-a * s - b * c) + v * (a * c - b * s))).matrix();
  g.tail_re = (2.0 * u).matrix();
  g.tail_im = (2.0 * v).matrix();
  return g;
}

// ---------------------------------------------------------------------------

/// Entity and relation tables. TransE: entity |E| x d, relation |R| x d.
/// RotatE: entity |E| x 2d laid out as [real | imaginary], relation |R| x d
/// phase angles.
struct EmbeddingModel {
  ModelKind kind = ModelKind::TransE;
  int dim = 0;
  int norm_order = 1;  // TransE only
  RowMatrix entity;
  RowMatrix relation;

  std::int32_t num_entities() const { return static_cast<std::int32_t>(entity.rows()); }
  std::int32_t num_relations() const { return static_cast<std::int32_t>(relation.rows()); }

  double score(const Triple& t) const;
  /// Score of every entity placed at `side`, the other two slots fixed.
  Eigen::VectorXd score_candidates(const Triple& t, Side side) const;
  bool all_finite() const { return entity.allFinite() && relation.allFinite(); }
};

EmbeddingModel init_model(ModelKind kind, std::int32_t n_entities, std::int32_t n_relations, int dim,
                          int norm_order, double margin, Rng& rng);

/// Throw when the model is not TransE (resp. RotatE).
double score_transe(const EmbeddingModel& m, EntityId h, RelationId r, EntityId t);
double score_rotate(const EmbeddingModel& m, EntityId h, RelationId r, EntityId t);

std::string serialize_model(const EmbeddingModel& m);
EmbeddingModel parse_model(const std::string& text);

// ---------------------------------------------------------------------------

struct TrainConfig {
  int epochs = 100;          // E
  int exponent_k = 1;        // schedule exponent
  int batch_size = 128;
  double learning_rate = 0.01;
  double margin = 2.0;       // gamma
  int negatives = 4;         // per positive
  int norm_order = 1;        // TransE
  int dim = 64;
  std::uint64_t seed = 0;
  int validate_every = 0;    // epochs between validation MRR checks; 0 disables

  void validate() const;
};

struct TrainHistory {
  std::vector<double> loss;              // mean hinge loss per (positive, negative) pair
  std::vector<std::int64_t> augmented;   // r(e)
  std::vector<double> val_mrr;           // NaN where not evaluated
};

struct TrainResult {
  EmbeddingModel model;
  TrainHistory history;
};

/// floor((e / E)^k * s), computed exactly. Throws unless 1 <= e <= E, k >= 1.
std::int64_t schedule_size(std::int64_t epoch, std::int64_t epochs, int k, std::int64_t s);

/// Corrupts head or tail (fair coin) with a uniform entity different from
/// both the replaced entity and the kept one, so the result never equals the
/// positive and never is a self-loop. Needs at least three entities.
std::vector<Triple> negative_sample(std::int32_t n_entities, const Triple& positive, Rng& rng, int count);

using Validator = std::function<double(const EmbeddingModel&)>;

/// Margin-ranking SGD. Epoch e trains on train + the first schedule_size(e)
/// triples of `augmented`. Deterministic for a fixed seed.
TrainResult train(const KnowledgeGraph& g, std::span<const Triple> augmented, const TrainConfig& cfg,
                  ModelKind kind, const Validator& validator = {});

/// CSV `epoch,loss,r_e,val_mrr`.
std::string serialize_history(const TrainHistory& h);

}  // namespace kgforge
