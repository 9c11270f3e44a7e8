#include "gdnlab/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace gdnlab {

Mat Mat::from_rows(const std::vector<std::vector<double>>& rows_in) {
  if (rows_in.empty()) return Mat();
  Mat m(static_cast<int>(rows_in.size()), static_cast<int>(rows_in[0].size()));
  for (int r = 0; r < m.rows; ++r) {
    if (static_cast<int>(rows_in[r].size()) != m.cols)
      throw std::invalid_argument("ragged rows in Mat::from_rows");
    std::copy(rows_in[r].begin(), rows_in[r].end(), m.row(r));
  }
  return m;
}

void matmul_acc(const Mat& a, const Mat& b, Mat& out, bool accumulate) {
  assert(a.cols == b.rows);
  if (!accumulate) {
    out = Mat(a.rows, b.cols);
  }
  assert(out.rows == a.rows && out.cols == b.cols);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (int k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = b.row(k);
      for (int j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
    }
  }
}

Mat matmul(const Mat& a, const Mat& b) {
  Mat out;
  matmul_acc(a, b, out, false);
  return out;
}

void matmul_nt_acc(const Mat& a, const Mat& b, Mat& out, bool accumulate) {
  assert(a.cols == b.cols);
  if (!accumulate) out = Mat(a.rows, b.rows);
  assert(out.rows == a.rows && out.cols == b.rows);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (int j = 0; j < b.rows; ++j) {
      const double* brow = b.row(j);
      double s = 0.0;
      for (int k = 0; k < a.cols; ++k) s += arow[k] * brow[k];
      orow[j] += s;
    }
  }
}

void matmul_tn_acc(const Mat& a, const Mat& b, Mat& out, bool accumulate) {
  assert(a.rows == b.rows);
  if (!accumulate) out = Mat(a.cols, b.cols);
  assert(out.rows == a.cols && out.cols == b.cols);
  for (int k = 0; k < a.rows; ++k) {
    const double* arow = a.row(k);
    const double* brow = b.row(k);
    for (int i = 0; i < a.cols; ++i) {
      const double aki = arow[i];
      if (aki == 0.0) continue;
      double* orow = out.row(i);
      for (int j = 0; j < b.cols; ++j) orow[j] += aki * brow[j];
    }
  }
}

Mat permute_rows(const Mat& m, const std::vector<int>& image) {
  assert(static_cast<int>(image.size()) == m.rows);
  Mat out(m.rows, m.cols);
  for (int i = 0; i < m.rows; ++i)
    std::copy(m.row(i), m.row(i) + m.cols, out.row(image[i]));
  return out;
}

double max_abs_diff(const Mat& a, const Mat& b) {
  assert(a.same_shape(b));
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.a[i] - b.a[i]));
  return d;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const Mat& v : values_) n += v.size();
  return n;
}

void ParamStore::zero_grads() {
  for (Mat& g : grads_) g.fill(0.0);
}

double ParamStore::grad_norm() const {
  double sq = 0.0;
  for (const Mat& g : grads_)
    for (double x : g.a) sq += x * x;
  return std::sqrt(sq);
}

void ParamStore::sgd_step(double lrate, double clip_norm) {
  double scale = 1.0;
  if (clip_norm > 0.0) {
    const double norm = grad_norm();
    if (norm > clip_norm) scale = clip_norm / norm;
  }
  for (int i = 0; i < count(); ++i) {
    Mat& v = values_[i];
    const Mat& g = grads_[i];
    for (std::size_t k = 0; k < v.size(); ++k) v.a[k] -= lrate * scale * g.a[k];
  }
}

Mat uniform_init(int rows, int cols, double scale, Rng& rng) {
  Mat m(rows, cols);
  for (double& x : m.a) x = rng.uniform(-scale, scale);
  return m;
}

}  // namespace gdnlab
