#include "freedst/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "freedst/error.hpp"

namespace freedst::kernels {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

void check_inner(std::size_t lhs, std::size_t rhs, const char* op) {
  if (lhs != rhs) {
    throw Error(Errc::DimensionMismatch, std::string(op) + ": inner dimensions " + std::to_string(lhs) +
                                             " and " + std::to_string(rhs) + " differ");
  }
}

// Row i of A B.
inline void matmul_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
  auto out = c.row(i);
  for (std::size_t k = 0; k < a.cols(); ++k) {
    const double aik = a(i, k);
    if (aik == 0.0) continue;
    const auto brow = b.row(k);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += aik * brow[j];
  }
}

// Row p of A^T B.
inline void matmul_tn_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t p) {
  auto out = c.row(p);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double aip = a(i, p);
    if (aip == 0.0) continue;
    const auto brow = b.row(i);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += aip * brow[j];
  }
}

// Row i of A B^T.
inline void matmul_nt_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
  const auto arow = a.row(i);
  for (std::size_t j = 0; j < b.rows(); ++j) {
    const auto brow = b.row(j);
    double s = 0.0;
    for (std::size_t k = 0; k < arow.size(); ++k) s += arow[k] * brow[k];
    c(i, j) = s;
  }
}

// Clamping p to [c, 1 - c] is clamping the logit to [-L, L] with L = logit(1 - c).
// Working on logits keeps -log(1 - p) accurate when p rounds towards 1.
const double kLogitClamp = std::log((1.0 - kProbClamp) / kProbClamp);

inline double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

// Row i of the weighted BCE; returns the row's loss sum and fills grad row (unscaled).
inline double bce_row(const Matrix& logits, const Matrix& targets, double pos_weight, Matrix& grad, std::size_t i) {
  double row_sum = 0.0;
  for (std::size_t j = 0; j < logits.cols(); ++j) {
    const double x = logits(i, j);
    const double xc = std::clamp(x, -kLogitClamp, kLogitClamp);
    const bool clamped = xc != x;
    if (targets(i, j) > 0.5) {
      row_sum += pos_weight * softplus(-xc);
      grad(i, j) = clamped ? 0.0 : -pos_weight * sigmoid(-x);
    } else {
      row_sum += softplus(xc);
      grad(i, j) = clamped ? 0.0 : sigmoid(x);
    }
  }
  return row_sum;
}

void check_bce(const Matrix& logits, const Matrix& targets) {
  if (!logits.same_shape(targets)) throw Error(Errc::DimensionMismatch, "weighted_bce: logits/targets shape differ");
}

BceResult finish_bce(std::vector<double>& row_sums, Matrix grad) {
  const double pairs = static_cast<double>(grad.size());
  double total = 0.0;
  for (double r : row_sums) total += r;
  BceResult out;
  if (pairs == 0.0) return out;
  for (auto& g : grad.data()) g /= pairs;
  out.loss = total / pairs;
  out.grad = std::move(grad);
  return out;
}

using Index = long long;

}  // namespace

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.rows(), "matmul");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) matmul_row(a, b, c, i);
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  check_inner(a.rows(), b.rows(), "matmul_tn");
  Matrix c(a.cols(), b.cols());
  for (std::size_t p = 0; p < a.cols(); ++p) matmul_tn_row(a, b, c, p);
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.cols(), "matmul_nt");
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) matmul_nt_row(a, b, c, i);
  return c;
}

BceResult weighted_bce(const Matrix& logits, const Matrix& targets, double pos_weight) {
  check_bce(logits, targets);
  Matrix grad(logits.rows(), logits.cols());
  std::vector<double> row_sums(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) row_sums[i] = bce_row(logits, targets, pos_weight, grad, i);
  return finish_bce(row_sums, std::move(grad));
}

}  // namespace serial

namespace parallel {

Matrix matmul(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.rows(), "matmul");
  Matrix c(a.rows(), b.cols());
  const auto n = static_cast<Index>(a.rows());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) matmul_row(a, b, c, static_cast<std::size_t>(i));
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  check_inner(a.rows(), b.rows(), "matmul_tn");
  Matrix c(a.cols(), b.cols());
  const auto n = static_cast<Index>(a.cols());
#pragma omp parallel for schedule(static)
  for (Index p = 0; p < n; ++p) matmul_tn_row(a, b, c, static_cast<std::size_t>(p));
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.cols(), "matmul_nt");
  Matrix c(a.rows(), b.rows());
  const auto n = static_cast<Index>(a.rows());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) matmul_nt_row(a, b, c, static_cast<std::size_t>(i));
  return c;
}

BceResult weighted_bce(const Matrix& logits, const Matrix& targets, double pos_weight) {
  check_bce(logits, targets);
  Matrix grad(logits.rows(), logits.cols());
  std::vector<double> row_sums(logits.rows());
  const auto n = static_cast<Index>(logits.rows());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    row_sums[r] = bce_row(logits, targets, pos_weight, grad, r);
  }
  return finish_bce(row_sums, std::move(grad));
}

}  // namespace parallel

}  // namespace freedst::kernels
