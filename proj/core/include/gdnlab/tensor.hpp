#pragma once

#include <cassert>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "gdnlab/rng.hpp"

namespace gdnlab {

// Dense row-major matrix of doubles. Everything the lab trains fits in a
// few hundred KB, so plain loops are enough.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, fill) {}

  static Mat from_rows(const std::vector<std::vector<double>>& rows_in);

  double& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }

  double* row(int r) { return a.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const { return a.data() + static_cast<std::size_t>(r) * cols; }

  std::size_t size() const { return a.size(); }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
  void fill(double v) { std::fill(a.begin(), a.end(), v); }

  friend bool operator==(const Mat& x, const Mat& y) {
    return x.rows == y.rows && x.cols == y.cols && x.a == y.a;
  }
};

// out (+)= a * b
void matmul_acc(const Mat& a, const Mat& b, Mat& out, bool accumulate);
Mat matmul(const Mat& a, const Mat& b);
// out (+)= a * b^T
void matmul_nt_acc(const Mat& a, const Mat& b, Mat& out, bool accumulate);
// out (+)= a^T * b
void matmul_tn_acc(const Mat& a, const Mat& b, Mat& out, bool accumulate);

Mat permute_rows(const Mat& m, const std::vector<int>& image);  // row i -> row image[i]

double max_abs_diff(const Mat& a, const Mat& b);

// Named parameter tensors plus matching gradient accumulators.
class ParamStore {
 public:
  int add(const std::string& name, Mat value) {
    values_.push_back(std::move(value));
    grads_.emplace_back(values_.back().rows, values_.back().cols);
    names_.push_back(name);
    return static_cast<int>(values_.size()) - 1;
  }

  int count() const { return static_cast<int>(values_.size()); }
  const std::string& name(int i) const { return names_[i]; }
  Mat& value(int i) { return values_[i]; }
  const Mat& value(int i) const { return values_[i]; }
  Mat& grad(int i) { return grads_[i]; }
  const Mat& grad(int i) const { return grads_[i]; }

  std::size_t scalar_count() const;
  void zero_grads();
  double grad_norm() const;

  // plain SGD with global gradient-norm clipping
  void sgd_step(double lrate, double clip_norm);

 private:
  std::vector<std::string> names_;
  std::vector<Mat> values_;
  std::vector<Mat> grads_;
};

Mat uniform_init(int rows, int cols, double scale, Rng& rng);

}  // namespace gdnlab
