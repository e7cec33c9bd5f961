#include "kgforge/nnmf.hpp"

#include <sstream>

#include "kgforge/io.hpp"

namespace kgforge {

void NnmfConfig::validate() const {
  if (rank < 1) throw Error("nnmf: rank must be >= 1");
  if (!(alpha >= 0.0)) throw Error("nnmf: alpha must be >= 0");
  if (!(l1_mix >= 0.0 && l1_mix <= 1.0)) throw Error("nnmf: l1_mix must lie in [0, 1]");
  if (max_iters < 1) throw Error("nnmf: max_iters must be >= 1");
  if (!(rel_tol > 0.0)) throw Error("nnmf: rel_tol must be > 0");
}

namespace {

void write_rows(std::string& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ' ';
      out += io::format_double(m(i, j));
    }
    out += '\n';
  }
}

}  // namespace

std::string serialize_factors(const FactorPair& f) {
  std::string out = std::to_string(f.W1.rows()) + ' ' + std::to_string(f.W2.cols()) + ' ' +
                    std::to_string(f.W1.cols()) + '\n';
  write_rows(out, f.W1);
  write_rows(out, f.W2);
  return out;
}

FactorPair parse_factors(const std::string& text) {
  std::istringstream in(text);
  Eigen::Index rows = 0, cols = 0, p = 0;
  if (!(in >> rows >> cols >> p) || rows < 0 || cols < 0 || p < 0)
    throw Error("factor checkpoint: bad header");
  FactorPair f;
  f.W1.resize(rows, p);
  f.W2.resize(p, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      if (!(in >> f.W1(i, j))) throw Error("factor checkpoint: truncated W1");
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      if (!(in >> f.W2(i, j))) throw Error("factor checkpoint: truncated W2");
  return f;
}

std::string serialize_loss_trace(const FactorPair& f) {
  std::string out = "iter,objective\n";
  for (std::size_t i = 0; i < f.loss_trace.size(); ++i)
    out += std::to_string(i) + ',' + io::format_double(f.loss_trace[i]) + '\n';
  return out;
}

}  // namespace kgforge
