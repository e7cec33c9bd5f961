#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "kgforge/cooccur.hpp"
#include "kgforge/graph.hpp"
#include "kgforge/rng.hpp"

namespace kgforge {

struct NnmfConfig {
  int rank = 64;          // p
  double alpha = 0.01;    // regularization weight
  double l1_mix = 0.5;    // c: share of the L1 penalty
  int max_iters = 300;    // q
  double rel_tol = 1e-5;  // stop when relative objective improvement drops below this
  std::uint64_t seed = 0;

  void validate() const;
};

/// M ~= W1 * W2 with W1 (rows x p) and W2 (p x cols), both non-negative.
struct FactorPair {
  Eigen::MatrixXd W1;
  Eigen::MatrixXd W2;
  /// Objective at initialization, then after every completed iteration.
  std::vector<double> loss_trace;

  int iterations() const { return static_cast<int>(loss_trace.size()) - 1; }
};

// Operator interface the solver needs from M: M*X, M^T*Y, ||M||_F^2 and sum(M).
// Any dense or sparse Eigen matrix works, as does the factored affinity product.

template <typename Derived>
Eigen::MatrixXd times(const Eigen::EigenBase<Derived>& m, const Eigen::MatrixXd& x) {
  return m.derived() * x;
}
template <typename Derived>
Eigen::MatrixXd transpose_times(const Eigen::EigenBase<Derived>& m, const Eigen::MatrixXd& y) {
  return m.derived().transpose() * y;
}
template <typename Derived>
double squared_norm(const Eigen::EigenBase<Derived>& m) {
  return m.derived().squaredNorm();
}
template <typename Derived>
double total(const Eigen::EigenBase<Derived>& m) {
  return m.derived().sum();
}

inline Eigen::MatrixXd times(const AffinityProduct& c, const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd bx = c.tail_relation.transpose() * x;
  return c.head_relation * bx;
}
inline Eigen::MatrixXd transpose_times(const AffinityProduct& c, const Eigen::MatrixXd& y) {
  const Eigen::MatrixXd ay = c.head_relation.transpose() * y;
  return c.tail_relation * ay;
}
inline double squared_norm(const AffinityProduct& c) {
  // ||A B^T||^2 = <A^T A, B^T B>
  const Eigen::MatrixXd ga = Eigen::MatrixXd(c.head_relation.transpose() * c.head_relation);
  const Eigen::MatrixXd gb = Eigen::MatrixXd(c.tail_relation.transpose() * c.tail_relation);
  return ga.cwiseProduct(gb).sum();
}
inline double total(const AffinityProduct& c) {
  const Eigen::VectorXd ones_a = Eigen::VectorXd::Ones(c.head_relation.rows());
  const Eigen::VectorXd ones_b = Eigen::VectorXd::Ones(c.tail_relation.rows());
  const Eigen::VectorXd col_a = c.head_relation.transpose() * ones_a;
  const Eigen::VectorXd col_b = c.tail_relation.transpose() * ones_b;
  return col_a.dot(col_b);
}

/// alpha * (c * (|W1|_1 + |W2|_1) + 0.5 * (1 - c) * (||W1||^2 + ||W2||^2))
inline double nnmf_penalty(const Eigen::MatrixXd& W1, const Eigen::MatrixXd& W2, const NnmfConfig& cfg) {
  const double l1 = W1.cwiseAbs().sum() + W2.cwiseAbs().sum();
  const double l2 = W1.squaredNorm() + W2.squaredNorm();
  return cfg.alpha * (cfg.l1_mix * l1 + 0.5 * (1.0 - cfg.l1_mix) * l2);
}

namespace detail {

// 0.5 * ||M - W1 W2||^2 expanded as ||M||^2 - 2<M, W1 W2> + ||W1 W2||^2 so the
// residual is never densified. `m_w2t` is M * W2^T.
inline double half_residual(double m_sq, const Eigen::MatrixXd& W1, const Eigen::MatrixXd& W2,
                            const Eigen::MatrixXd& m_w2t) {
  const double cross = W1.cwiseProduct(m_w2t).sum();
  const Eigen::MatrixXd g1 = W1.transpose() * W1;
  const Eigen::MatrixXd g2 = W2 * W2.transpose();
  const double model_sq = g1.cwiseProduct(g2).sum();
  return 0.5 * std::max(0.0, m_sq - 2.0 * cross + model_sq);
}

template <typename Matrix>
void check_shapes(const Matrix& m, const Eigen::MatrixXd& W1, const Eigen::MatrixXd& W2) {
  if (W1.rows() != m.rows() || W2.cols() != m.cols() || W1.cols() != W2.rows())
    throw Error("nnmf: factor shapes do not conform to the target matrix");
}

}  // namespace detail

/// 0.5 * ||M - W1 W2||_F^2 + alpha * Omega(W1, W2), evaluated without densifying M.
template <typename Matrix>
double nnmf_objective(const Eigen::MatrixXd& W1, const Eigen::MatrixXd& W2, const Matrix& m,
                      const NnmfConfig& cfg) {
  detail::check_shapes(m, W1, W2);
  const Eigen::MatrixXd w2t = W2.transpose();
  return detail::half_residual(squared_norm(m), W1, W2, times(m, w2t)) + nnmf_penalty(W1, W2, cfg);
}

/// Alternating multiplicative updates on the regularized Frobenius objective.
///
///   W1 <- W1 .* (M W2^T) ./ (W1 W2 W2^T + alpha c + alpha (1-c) W1)
///   W2 <- W2 .* (W1^T M) ./ (W1^T W1 W2 + alpha c + alpha (1-c) W2)
///
/// Entries start uniform in (0, s], s = sqrt(mean(M) / p), and are floored at
/// eps * s so no entry locks at zero. Stops after max_iters or once the
/// relative objective improvement falls below rel_tol.
template <typename Matrix>
FactorPair nnmf(const Matrix& m, const NnmfConfig& cfg) {
  cfg.validate();
  const Eigen::Index rows = m.rows(), cols = m.cols(), p = cfg.rank;
  if (p > std::min(rows, cols)) throw Error("nnmf: rank exceeds min(rows, cols)");

  FactorPair f;
  const double mean = total(m) / (static_cast<double>(rows) * static_cast<double>(cols));
  const double scale = std::sqrt(std::max(mean, 0.0) / static_cast<double>(p));
  if (!(scale > 0.0)) {
    f.W1 = Eigen::MatrixXd::Zero(rows, p);
    f.W2 = Eigen::MatrixXd::Zero(p, cols);
    f.loss_trace.push_back(nnmf_objective(f.W1, f.W2, m, cfg));
    return f;
  }

  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&] { return (1.0 - unit(rng)) * scale; };  // (0, s]
  f.W1 = Eigen::MatrixXd::NullaryExpr(rows, p, draw);
  f.W2 = Eigen::MatrixXd::NullaryExpr(p, cols, draw);

  const double floor = std::numeric_limits<double>::epsilon() * scale;
  const double l1 = cfg.alpha * cfg.l1_mix;
  const double l2 = cfg.alpha * (1.0 - cfg.l1_mix);
  const double m_sq = squared_norm(m);
  auto objective = [&](const Eigen::MatrixXd& m_w2t) {
    return detail::half_residual(m_sq, f.W1, f.W2, m_w2t) + nnmf_penalty(f.W1, f.W2, cfg);
  };

  Eigen::MatrixXd m_w2t = times(m, Eigen::MatrixXd(f.W2.transpose()));
  f.loss_trace.push_back(objective(m_w2t));

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    {
      const Eigen::MatrixXd g2 = f.W2 * f.W2.transpose();
      const Eigen::MatrixXd denom = ((f.W1 * g2).array() + l1 + l2 * f.W1.array()).matrix();
      f.W1 = (f.W1.array() * m_w2t.array() / denom.array().max(floor * floor)).max(floor).matrix();
    }
    {
      const Eigen::MatrixXd w1t_m = transpose_times(m, f.W1).transpose();
      const Eigen::MatrixXd g1 = f.W1.transpose() * f.W1;
      const Eigen::MatrixXd denom = ((g1 * f.W2).array() + l1 + l2 * f.W2.array()).matrix();
      f.W2 = (f.W2.array() * w1t_m.array() / denom.array().max(floor * floor)).max(floor).matrix();
    }
    m_w2t = times(m, Eigen::MatrixXd(f.W2.transpose()));
    const double prev = f.loss_trace.back();
    const double cur = objective(m_w2t);
    if (!std::isfinite(cur)) throw Error("nnmf: objective became non-finite at iteration " + std::to_string(iter + 1));
    f.loss_trace.push_back(cur);
    if (prev <= 0.0 || (prev - cur) < cfg.rel_tol * prev) break;
  }
  return f;
}

/// ||M - W1 W2||_F / ||M||_F (0 when M is zero).
template <typename Matrix>
double relative_error(const Matrix& m, const FactorPair& f) {
  const double m_sq = squared_norm(m);
  if (m_sq == 0.0) return 0.0;
  const Eigen::MatrixXd m_w2t = times(m, Eigen::MatrixXd(f.W2.transpose()));
  return std::sqrt(2.0 * detail::half_residual(m_sq, f.W1, f.W2, m_w2t) / m_sq);
}

/// Header `rows cols p`, then W1 and W2 row by row.
std::string serialize_factors(const FactorPair& f);
FactorPair parse_factors(const std::string& text);
/// CSV `iter,objective`.
std::string serialize_loss_trace(const FactorPair& f);

}  // namespace kgforge
