#include "kgforge/linkpred.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "kgforge/io.hpp"

namespace kgforge {

ModelKind parse_model_kind(const std::string& name) {
  if (name == "transe") return ModelKind::TransE;
  if (name == "rotate") return ModelKind::RotatE;
  throw Error("unknown model '" + name + "' (expected transe or rotate)");
}

std::string to_string(ModelKind k) { return k == ModelKind::TransE ? "transe" : "rotate"; }

namespace {

void check_ids(const EmbeddingModel& m, EntityId h, RelationId r, EntityId t) {
  if (h < 0 || h >= m.num_entities() || t < 0 || t >= m.num_entities() || r < 0 || r >= m.num_relations())
    throw Error("triple id out of range for model");
}

}  // namespace

double score_transe(const EmbeddingModel& m, EntityId h, RelationId r, EntityId t) {
  if (m.kind != ModelKind::TransE) throw Error("score_transe called on a " + to_string(m.kind) + " model");
  check_ids(m, h, r, t);
  return transe_score(m.entity.row(h), m.relation.row(r), m.entity.row(t), m.norm_order);
}

double score_rotate(const EmbeddingModel& m, EntityId h, RelationId r, EntityId t) {
  if (m.kind != ModelKind::RotatE) throw Error("score_rotate called on a " + to_string(m.kind) + " model");
  check_ids(m, h, r, t);
  const int d = m.dim;
  return rotate_score(m.entity.row(h).head(d), m.entity.row(h).tail(d), m.relation.row(r),
                      m.entity.row(t).head(d), m.entity.row(t).tail(d));
}

double EmbeddingModel::score(const Triple& t) const {
  return kind == ModelKind::TransE ? score_transe(*this, t.head, t.relation, t.tail)
                                   : score_rotate(*this, t.head, t.relation, t.tail);
}

Eigen::VectorXd EmbeddingModel::score_candidates(const Triple& t, Side side) const {
  check_ids(*this, t.head, t.relation, t.tail);
  if (kind == ModelKind::TransE) {
    // head side: ||c + (r - t)||, tail side: ||(h + r) - c||
    const Eigen::RowVectorXd anchor = side == Side::Tail
                                          ? Eigen::RowVectorXd(entity.row(t.head) + relation.row(t.relation))
                                          : Eigen::RowVectorXd(entity.row(t.tail) - relation.row(t.relation));
    const RowMatrix diff = entity.rowwise() - anchor;
    if (norm_order == 1) return -diff.cwiseAbs().rowwise().sum();
    return -diff.rowwise().norm();
  }

  const int d = dim;
  const Eigen::ArrayXXd cos_r = relation.row(t.relation).array().cos();
  const Eigen::ArrayXXd sin_r = relation.row(t.relation).array().sin();
  const auto re = entity.leftCols(d).array();
  const auto im = entity.rightCols(d).array();
  if (side == Side::Tail) {
    const Eigen::ArrayXXd h_re = entity.row(t.head).head(d).array();
    const Eigen::ArrayXXd h_im = entity.row(t.head).tail(d).array();
    const Eigen::RowVectorXd rot_re = (h_re * cos_r - h_im * sin_r).matrix();
    const Eigen::RowVectorXd rot_im = (h_re * sin_r + h_im * cos_r).matrix();
    const Eigen::ArrayXXd u = (-re).rowwise() + rot_re.array();
    const Eigen::ArrayXXd v = (-im).rowwise() + rot_im.array();
    return -(u.square() + v.square()).rowwise().sum().matrix();
  }
  const Eigen::RowVectorXd t_re = entity.row(t.tail).head(d);
  const Eigen::RowVectorXd t_im = entity.row(t.tail).tail(d);
  const Eigen::ArrayXXd rot_re = re.rowwise() * cos_r.row(0) - im.rowwise() * sin_r.row(0);
  const Eigen::ArrayXXd rot_im = re.rowwise() * sin_r.row(0) + im.rowwise() * cos_r.row(0);
  const Eigen::ArrayXXd u = rot_re.rowwise() - t_re.array();
  const Eigen::ArrayXXd v = rot_im.rowwise() - t_im.array();
  return -(u.square() + v.square()).rowwise().sum().matrix();
}

EmbeddingModel init_model(ModelKind kind, std::int32_t n_entities, std::int32_t n_relations, int dim,
                          int norm_order, double margin, Rng& rng) {
  if (dim < 1) throw Error("embedding dimension must be >= 1");
  if (n_entities < 1 || n_relations < 1) throw Error("model needs at least one entity and relation");
  EmbeddingModel m;
  m.kind = kind;
  m.dim = dim;
  m.norm_order = norm_order;
  auto uniform = [&rng](double lo, double hi) {
    return [&rng, lo, hi] { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  };
  if (kind == ModelKind::TransE) {
    const double bound = 6.0 / std::sqrt(static_cast<double>(dim));
    m.entity = RowMatrix::NullaryExpr(n_entities, dim, uniform(-bound, bound));
    m.relation = RowMatrix::NullaryExpr(n_relations, dim, uniform(-bound, bound));
    m.relation.rowwise().normalize();
    m.entity.rowwise().normalize();
  } else {
    const double bound = (margin + 2.0) / static_cast<double>(dim);
    m.entity = RowMatrix::NullaryExpr(n_entities, 2 * dim, uniform(-bound, bound));
    m.relation = RowMatrix::NullaryExpr(n_relations, dim, uniform(-std::numbers::pi, std::numbers::pi));
  }
  return m;
}

std::string serialize_model(const EmbeddingModel& m) {
  std::string out = "kgforge-model " + to_string(m.kind) + ' ' + std::to_string(m.num_entities()) + ' ' +
                    std::to_string(m.num_relations()) + ' ' + std::to_string(m.dim) + ' ' +
                    std::to_string(m.norm_order) + '\n';
  for (const auto* table : {&m.entity, &m.relation}) {
    for (Eigen::Index i = 0; i < table->rows(); ++i) {
      for (Eigen::Index j = 0; j < table->cols(); ++j) {
        if (j) out += ' ';
        out += io::format_double((*table)(i, j));
      }
      out += '\n';
    }
  }
  return out;
}

EmbeddingModel parse_model(const std::string& text) {
  std::istringstream in(text);
  std::string magic, kind;
  std::int32_t ne = 0, nr = 0;
  EmbeddingModel m;
  if (!(in >> magic >> kind >> ne >> nr >> m.dim >> m.norm_order) || magic != "kgforge-model" || ne < 1 ||
      nr < 1 || m.dim < 1)
    throw Error("model checkpoint: bad header");
  m.kind = parse_model_kind(kind);
  m.entity.resize(ne, m.kind == ModelKind::TransE ? m.dim : 2 * m.dim);
  m.relation.resize(nr, m.dim);
  for (auto* table : {&m.entity, &m.relation})
    for (Eigen::Index i = 0; i < table->rows(); ++i)
      for (Eigen::Index j = 0; j < table->cols(); ++j)
        if (!(in >> (*table)(i, j))) throw Error("model checkpoint: truncated table");
  return m;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw Error("train: epochs must be >= 1");
  if (exponent_k < 1) throw Error("train: exponent k must be >= 1");
  if (batch_size < 1) throw Error("train: batch size must be >= 1");
  if (!(learning_rate > 0.0)) throw Error("train: learning rate must be > 0");
  if (!(margin >= 0.0)) throw Error("train: margin must be >= 0");
  if (negatives < 1) throw Error("train: negatives must be >= 1");
  if (norm_order != 1 && norm_order != 2) throw Error("train: norm order must be 1 or 2");
  if (dim < 1) throw Error("train: dim must be >= 1");
  if (validate_every < 0) throw Error("train: validate_every must be >= 0");
}

std::int64_t schedule_size(std::int64_t epoch, std::int64_t epochs, int k, std::int64_t s) {
  if (epochs < 1 || epoch < 1 || epoch > epochs) throw Error("schedule: epoch outside [1, E]");
  if (k < 1) throw Error("schedule: exponent k must be >= 1");
  if (s < 0) throw Error("schedule: negative set size");
  if (epoch == epochs) return s;

  using u128 = unsigned __int128;
  constexpr u128 limit = ~u128(0);
  u128 num = static_cast<u128>(s), den = 1;
  bool exact = true;
  for (int i = 0; i < k && exact; ++i) {
    if (num > limit / static_cast<u128>(epoch) || den > limit / static_cast<u128>(epochs)) {
      exact = false;
      break;
    }
    num *= static_cast<u128>(epoch);
    den *= static_cast<u128>(epochs);
  }
  if (exact) return static_cast<std::int64_t>(num / den);
  // Only reachable for very large k; (e/E)^k is then far below 1/s or
  // representable with enough headroom for the floor to be right.
  const long double ratio = static_cast<long double>(epoch) / static_cast<long double>(epochs);
  return static_cast<std::int64_t>(std::floor(std::pow(ratio, static_cast<long double>(k)) * static_cast<long double>(s)));
}

std::vector<Triple> negative_sample(std::int32_t n_entities, const Triple& positive, Rng& rng, int count) {
  if (count < 1) throw Error("negative_sample: count must be >= 1");
  if (n_entities < 3) throw Error("negative_sample: needs at least three entities");
  std::vector<Triple> out;
  out.reserve(static_cast<std::size_t>(count));
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < count; ++i) {
    Triple neg = positive;
    const bool corrupt_head = coin(rng);
    const EntityId replaced = corrupt_head ? positive.head : positive.tail;
    const EntityId kept = corrupt_head ? positive.tail : positive.head;
    // Uniform over the n - 2 entities other than `replaced` and `kept`.
    EntityId e = uniform_index(rng, n_entities - 2);
    const EntityId lo = std::min(replaced, kept), hi = std::max(replaced, kept);
    if (e >= lo) ++e;
    if (e >= hi) ++e;
    (corrupt_head ? neg.head : neg.tail) = e;
    out.push_back(neg);
  }
  return out;
}

namespace {

// Gradient buffers that remember which rows were written so only those are
// applied and cleared.
class SparseGrad {
 public:
  SparseGrad(Eigen::Index rows, Eigen::Index cols) : grad_(RowMatrix::Zero(rows, cols)), touched_(static_cast<std::size_t>(rows), 0) {}

  template <typename Derived>
  void add(std::int32_t row, const Eigen::MatrixBase<Derived>& g) {
    if (!touched_[row]) {
      touched_[row] = 1;
      rows_.push_back(row);
    }
    grad_.row(row) += g.reshaped().transpose();
  }
  template <typename Derived>
  void add_segment(std::int32_t row, Eigen::Index start, const Eigen::MatrixBase<Derived>& g) {
    if (!touched_[row]) {
      touched_[row] = 1;
      rows_.push_back(row);
    }
    grad_.row(row).segment(start, g.size()) += g.reshaped().transpose();
  }

  // params -= lr * grad, then clear. Returns the touched rows.
  std::vector<std::int32_t> apply(RowMatrix& params, double lr) {
    for (auto r : rows_) {
      params.row(r) -= lr * grad_.row(r);
      grad_.row(r).setZero();
      touched_[r] = 0;
    }
    std::vector<std::int32_t> rows;
    rows.swap(rows_);
    return rows;
  }

 private:
  RowMatrix grad_;
  std::vector<char> touched_;
  std::vector<std::int32_t> rows_;
};

// Accumulates sign * d(score)/d(params) of one triple.
void accumulate_score_grad(const EmbeddingModel& m, const Triple& t, double sign, SparseGrad& ge, SparseGrad& gr) {
  if (m.kind == ModelKind::TransE) {
    const Eigen::VectorXd g =
        sign * transe_score_grad_head(m.entity.row(t.head), m.relation.row(t.relation), m.entity.row(t.tail), m.norm_order);
    ge.add(t.head, g);
    gr.add(t.relation, g);
    ge.add(t.tail, -g);
    return;
  }
  const int d = m.dim;
  const auto g = rotate_score_grad(m.entity.row(t.head).head(d), m.entity.row(t.head).tail(d),
                                   m.relation.row(t.relation), m.entity.row(t.tail).head(d),
                                   m.entity.row(t.tail).tail(d));
  ge.add_segment(t.head, 0, sign * g.head_re);
  ge.add_segment(t.head, d, sign * g.head_im);
  gr.add(t.relation, sign * g.phase);
  ge.add_segment(t.tail, 0, sign * g.tail_re);
  ge.add_segment(t.tail, d, sign * g.tail_im);
}

}  // namespace

TrainResult train(const KnowledgeGraph& g, std::span<const Triple> augmented, const TrainConfig& cfg,
                  ModelKind kind, const Validator& validator) {
  cfg.validate();
  auto init_rng = make_rng(cfg.seed, "model-init");
  TrainResult result{init_model(kind, g.num_entities(), g.num_relations(), cfg.dim, cfg.norm_order, cfg.margin, init_rng), {}};
  auto& model = result.model;
  auto& history = result.history;

  SparseGrad grad_entity(model.entity.rows(), model.entity.cols());
  SparseGrad grad_relation(model.relation.rows(), model.relation.cols());
  std::vector<Triple> positives(g.train.begin(), g.train.end());
  const auto s_size = static_cast<std::int64_t>(augmented.size());

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto r_e = schedule_size(epoch, cfg.epochs, cfg.exponent_k, s_size);
    positives.resize(g.train.size());
    positives.insert(positives.end(), augmented.begin(), augmented.begin() + r_e);

    std::vector<std::size_t> order(positives.size());
    std::iota(order.begin(), order.end(), 0);
    auto order_rng = make_rng(cfg.seed, "trainer", static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), order_rng);
    auto neg_rng = make_rng(cfg.seed, "negatives", static_cast<std::uint64_t>(epoch));

    double loss_sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const auto stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      for (std::size_t i = start; i < stop; ++i) {
        const Triple& pos = positives[order[i]];
        const double pos_score = model.score(pos);
        for (const auto& neg : negative_sample(g.num_entities(), pos, neg_rng, cfg.negatives)) {
          const double hinge = cfg.margin + model.score(neg) - pos_score;
          ++pairs;
          if (hinge <= 0.0) continue;
          loss_sum += hinge;
          accumulate_score_grad(model, neg, 1.0, grad_entity, grad_relation);
          accumulate_score_grad(model, pos, -1.0, grad_entity, grad_relation);
        }
      }
      if (!std::isfinite(loss_sum))
        throw Error("training diverged: non-finite loss at epoch " + std::to_string(epoch) + ", batch starting at " +
                    std::to_string(start) + " (try a smaller learning rate)");

      const auto touched = grad_entity.apply(model.entity, cfg.learning_rate);
      grad_relation.apply(model.relation, cfg.learning_rate);
      if (kind == ModelKind::TransE) {
        for (auto r : touched) {
          const double n = model.entity.row(r).norm();
          if (n > 0.0) model.entity.row(r) /= n;
        }
      }
    }
    if (!model.all_finite()) throw Error("training diverged: non-finite parameters at epoch " + std::to_string(epoch));

    history.loss.push_back(pairs ? loss_sum / static_cast<double>(pairs) : 0.0);
    history.augmented.push_back(r_e);
    const bool check = validator && cfg.validate_every > 0 && (epoch % cfg.validate_every == 0 || epoch == cfg.epochs);
    history.val_mrr.push_back(check ? validator(model) : std::numeric_limits<double>::quiet_NaN());
  }
  return result;
}

std::string serialize_history(const TrainHistory& h) {
  std::string out = "epoch,loss,r_e,val_mrr\n";
  for (std::size_t i = 0; i < h.loss.size(); ++i) {
    out += std::to_string(i + 1) + ',' + io::format_double(h.loss[i]) + ',' + std::to_string(h.augmented[i]) + ',';
    if (!std::isnan(h.val_mrr[i])) out += io::format_double(h.val_mrr[i]);
    out += '\n';
  }
  return out;
}

}  // namespace kgforge
