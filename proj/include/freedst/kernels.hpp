#pragma once

// Dense kernels used by the VGAE forward/backward passes.
//
// Every kernel exists twice: `serial` is the reference, `parallel` splits the
// outer loop across OpenMP threads. Both evaluate each output element with the
// same operation order, so results are bit-identical for any thread count.
// Reductions go through per-row partials summed serially in row order.

#include "freedst/matrix.hpp"

namespace freedst::kernels {

struct BceResult {
  double loss = 0.0;  // mean over all ordered pairs
  Matrix grad;        // d loss / d logits
};

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b);     // A B
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // A^T B
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // A B^T

/// Weighted BCE between targets and sigmoid(logits); probabilities clamped to
/// [1e-12, 1 - 1e-12] before the log (zero gradient where the clamp is active).
BceResult weighted_bce(const Matrix& logits, const Matrix& targets, double pos_weight);

}  // namespace serial

namespace parallel {

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);
BceResult weighted_bce(const Matrix& logits, const Matrix& targets, double pos_weight);

}  // namespace parallel

// Default dispatch used by the model code.
using parallel::matmul;
using parallel::matmul_nt;
using parallel::matmul_tn;
using parallel::weighted_bce;

inline constexpr double kProbClamp = 1e-12;

double sigmoid(double x);

}  // namespace freedst::kernels
