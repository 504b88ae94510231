// Small shared utilities: dense matrix, deterministic reductions, error types.
#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spatvine {

struct input_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Row-major dense matrix of doubles.
class Matrix {
public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int r, int c) { return a_[static_cast<size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return a_[static_cast<size_t>(r) * cols_ + c]; }
  double* row(int r) { return a_.data() + static_cast<size_t>(r) * cols_; }
  const double* row(int r) const { return a_.data() + static_cast<size_t>(r) * cols_; }
  std::vector<double>& data() { return a_; }
  const std::vector<double>& data() const { return a_; }

  std::vector<double> column(int c) const {
    std::vector<double> out(rows_);
    for (int r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

// Pairwise (tree) summation. Result is independent of how the inputs were
// produced, so parallel producers + this reducer give thread-count-invariant
// totals.
inline double pairwise_sum(std::span<const double> x) {
  const size_t n = x.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const size_t half = n / 2;
  return pairwise_sum(x.subspan(0, half)) + pairwise_sum(x.subspan(half));
}

inline double clamp_unit(double u, double eps = 1e-10) {
  if (u < eps) return eps;
  if (u > 1.0 - eps) return 1.0 - eps;
  return u;
}

}  // namespace spatvine
