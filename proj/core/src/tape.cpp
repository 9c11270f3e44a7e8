#include "gdnlab/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace gdnlab {

namespace {
void check(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}
}  // namespace

Tape::Id Tape::input(Mat value) {
  Node n{Op::kInput};
  n.val = std::move(value);
  return push(std::move(n));
}

Tape::Id Tape::param(ParamStore& store, int param_idx) {
  const std::uint64_t key =
      (reinterpret_cast<std::uint64_t>(&store) << 16) ^ static_cast<std::uint64_t>(param_idx);
  auto it = param_cache_.find(key);
  if (it != param_cache_.end()) return it->second;
  Node n{Op::kParam};
  n.val = store.value(param_idx);
  n.param_idx = param_idx;
  n.store = &store;
  Id id = push(std::move(n));
  param_cache_.emplace(key, id);
  return id;
}

Tape::Id Tape::matmul(Id a, Id b) {
  check(value(a).cols == value(b).rows, "matmul shape mismatch");
  Node n{Op::kMatMul, a, b};
  n.val = gdnlab::matmul(value(a), value(b));
  return push(std::move(n));
}

Tape::Id Tape::matmul_nt(Id a, Id b) {
  check(value(a).cols == value(b).cols, "matmul_nt shape mismatch");
  Node n{Op::kMatMulNT, a, b};
  matmul_nt_acc(value(a), value(b), n.val, false);
  return push(std::move(n));
}

Tape::Id Tape::add(Id a, Id b) {
  check(value(a).same_shape(value(b)), "add shape mismatch");
  Node n{Op::kAdd, a, b};
  n.val = value(a);
  for (std::size_t i = 0; i < n.val.size(); ++i) n.val.a[i] += value(b).a[i];
  return push(std::move(n));
}

Tape::Id Tape::add_rowvec(Id a, Id v) {
  check(value(v).rows == 1 && value(v).cols == value(a).cols, "add_rowvec shape mismatch");
  Node n{Op::kAddRowVec, a, v};
  n.val = value(a);
  for (int r = 0; r < n.val.rows; ++r)
    for (int c = 0; c < n.val.cols; ++c) n.val(r, c) += value(v)(0, c);
  return push(std::move(n));
}

Tape::Id Tape::sub(Id a, Id b) {
  check(value(a).same_shape(value(b)), "sub shape mismatch");
  Node n{Op::kSub, a, b};
  n.val = value(a);
  for (std::size_t i = 0; i < n.val.size(); ++i) n.val.a[i] -= value(b).a[i];
  return push(std::move(n));
}

Tape::Id Tape::hadamard(Id a, Id b) {
  check(value(a).same_shape(value(b)), "hadamard shape mismatch");
  Node n{Op::kHadamard, a, b};
  n.val = value(a);
  for (std::size_t i = 0; i < n.val.size(); ++i) n.val.a[i] *= value(b).a[i];
  return push(std::move(n));
}

Tape::Id Tape::scale(Id a, double c) {
  Node n{Op::kScale, a};
  n.scalar = c;
  n.val = value(a);
  for (double& x : n.val.a) x *= c;
  return push(std::move(n));
}

Tape::Id Tape::tanh_(Id a) {
  Node n{Op::kTanh, a};
  n.val = value(a);
  for (double& x : n.val.a) x = std::tanh(x);
  return push(std::move(n));
}

Tape::Id Tape::sigmoid_(Id a) {
  Node n{Op::kSigmoid, a};
  n.val = value(a);
  for (double& x : n.val.a) x = 1.0 / (1.0 + std::exp(-x));
  return push(std::move(n));
}

Tape::Id Tape::scale_rows(Id a, Id g) {
  check(value(g).cols == 1 && value(g).rows == value(a).rows, "scale_rows shape mismatch");
  Node n{Op::kScaleRows, a, g};
  n.val = value(a);
  for (int r = 0; r < n.val.rows; ++r) {
    const double s = value(g)(r, 0);
    for (int c = 0; c < n.val.cols; ++c) n.val(r, c) *= s;
  }
  return push(std::move(n));
}

Tape::Id Tape::const_matmul(Mat c, Id a) {
  check(c.cols == value(a).rows, "const_matmul shape mismatch");
  Node n{Op::kConstMatMul, a};
  n.cmat = std::make_shared<const Mat>(std::move(c));
  n.val = gdnlab::matmul(*n.cmat, value(a));
  return push(std::move(n));
}

Tape::Id Tape::masked_softmax_rows(Id a, std::vector<std::uint8_t> mask) {
  const Mat& x = value(a);
  check(static_cast<int>(mask.size()) == x.rows * x.cols, "softmax mask size mismatch");
  Node n{Op::kMaskedSoftmax, a};
  n.mask = std::make_shared<const std::vector<std::uint8_t>>(std::move(mask));
  n.val = Mat(x.rows, x.cols);
  const auto& m = *n.mask;
  for (int r = 0; r < x.rows; ++r) {
    double mx = -1e300;
    bool any = false;
    for (int c = 0; c < x.cols; ++c)
      if (m[r * x.cols + c]) {
        mx = std::max(mx, x(r, c));
        any = true;
      }
    if (!any) continue;  // row stays all zero
    double z = 0.0;
    for (int c = 0; c < x.cols; ++c)
      if (m[r * x.cols + c]) z += std::exp(x(r, c) - mx);
    for (int c = 0; c < x.cols; ++c)
      if (m[r * x.cols + c]) n.val(r, c) = std::exp(x(r, c) - mx) / z;
  }
  return push(std::move(n));
}

Tape::Id Tape::log_softmax_rows(Id a) {
  const Mat& x = value(a);
  Node n{Op::kLogSoftmax, a};
  n.val = Mat(x.rows, x.cols);
  for (int r = 0; r < x.rows; ++r) {
    double mx = -1e300;
    for (int c = 0; c < x.cols; ++c) mx = std::max(mx, x(r, c));
    double z = 0.0;
    for (int c = 0; c < x.cols; ++c) z += std::exp(x(r, c) - mx);
    const double logz = mx + std::log(z);
    for (int c = 0; c < x.cols; ++c) n.val(r, c) = x(r, c) - logz;
  }
  return push(std::move(n));
}

Tape::Id Tape::pick(Id a, std::vector<std::pair<int, int>> entries) {
  const Mat& x = value(a);
  Node n{Op::kPick, a};
  n.picks = std::make_shared<const std::vector<std::pair<int, int>>>(std::move(entries));
  n.val = Mat(static_cast<int>(n.picks->size()), 1);
  for (std::size_t i = 0; i < n.picks->size(); ++i) {
    const auto& [r, c] = (*n.picks)[i];
    check(r >= 0 && r < x.rows && c >= 0 && c < x.cols, "pick entry out of range");
    n.val(static_cast<int>(i), 0) = x(r, c);
  }
  return push(std::move(n));
}

Tape::Id Tape::sum_all(Id a) {
  Node n{Op::kSumAll, a};
  n.val = Mat(1, 1);
  for (double x : value(a).a) n.val(0, 0) += x;
  return push(std::move(n));
}

void Tape::backward(Id loss) {
  check(loss >= 0 && loss < node_count(), "bad loss node");
  check(value(loss).rows == 1 && value(loss).cols == 1, "loss must be scalar");
  std::vector<Mat> grads(nodes_.size());
  std::vector<char> live(nodes_.size(), 0);
  auto touch = [&](Id id) -> Mat& {
    if (!live[id]) {
      grads[id] = Mat(nodes_[id].val.rows, nodes_[id].val.cols);
      live[id] = 1;
    }
    return grads[id];
  };
  touch(loss)(0, 0) = 1.0;

  for (Id id = loss; id >= 0; --id) {
    if (!live[id]) continue;
    const Node& n = nodes_[id];
    const Mat& g = grads[id];
    switch (n.op) {
      case Op::kInput:
        break;
      case Op::kParam: {
        Mat& pg = n.store->grad(n.param_idx);
        for (std::size_t i = 0; i < g.size(); ++i) pg.a[i] += g.a[i];
        break;
      }
      case Op::kMatMul:
        matmul_nt_acc(g, nodes_[n.p1].val, touch(n.p0), true);
        matmul_tn_acc(nodes_[n.p0].val, g, touch(n.p1), true);
        break;
      case Op::kMatMulNT:
        matmul_acc(g, nodes_[n.p1].val, touch(n.p0), true);
        matmul_tn_acc(g, nodes_[n.p0].val, touch(n.p1), true);
        break;
      case Op::kAdd: {
        Mat& ga = touch(n.p0);
        Mat& gb = touch(n.p1);
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga.a[i] += g.a[i];
          gb.a[i] += g.a[i];
        }
        break;
      }
      case Op::kAddRowVec: {
        Mat& ga = touch(n.p0);
        Mat& gv = touch(n.p1);
        for (std::size_t i = 0; i < g.size(); ++i) ga.a[i] += g.a[i];
        for (int r = 0; r < g.rows; ++r)
          for (int c = 0; c < g.cols; ++c) gv(0, c) += g(r, c);
        break;
      }
      case Op::kSub: {
        Mat& ga = touch(n.p0);
        Mat& gb = touch(n.p1);
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga.a[i] += g.a[i];
          gb.a[i] -= g.a[i];
        }
        break;
      }
      case Op::kHadamard: {
        Mat& ga = touch(n.p0);
        Mat& gb = touch(n.p1);
        const Mat& va = nodes_[n.p0].val;
        const Mat& vb = nodes_[n.p1].val;
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga.a[i] += g.a[i] * vb.a[i];
          gb.a[i] += g.a[i] * va.a[i];
        }
        break;
      }
      case Op::kScale: {
        Mat& ga = touch(n.p0);
        for (std::size_t i = 0; i < g.size(); ++i) ga.a[i] += n.scalar * g.a[i];
        break;
      }
      case Op::kTanh: {
        Mat& ga = touch(n.p0);
        for (std::size_t i = 0; i < g.size(); ++i)
          ga.a[i] += g.a[i] * (1.0 - n.val.a[i] * n.val.a[i]);
        break;
      }
      case Op::kSigmoid: {
        Mat& ga = touch(n.p0);
        for (std::size_t i = 0; i < g.size(); ++i)
          ga.a[i] += g.a[i] * n.val.a[i] * (1.0 - n.val.a[i]);
        break;
      }
      case Op::kScaleRows: {
        Mat& ga = touch(n.p0);
        Mat& gg = touch(n.p1);
        const Mat& va = nodes_[n.p0].val;
        const Mat& vg = nodes_[n.p1].val;
        for (int r = 0; r < g.rows; ++r) {
          const double s = vg(r, 0);
          double acc = 0.0;
          for (int c = 0; c < g.cols; ++c) {
            ga(r, c) += g(r, c) * s;
            acc += g(r, c) * va(r, c);
          }
          gg(r, 0) += acc;
        }
        break;
      }
      case Op::kConstMatMul:
        matmul_tn_acc(*n.cmat, g, touch(n.p0), true);
        break;
      case Op::kMaskedSoftmax: {
        Mat& ga = touch(n.p0);
        const auto& m = *n.mask;
        for (int r = 0; r < g.rows; ++r) {
          double dot = 0.0;
          for (int c = 0; c < g.cols; ++c) dot += g(r, c) * n.val(r, c);
          for (int c = 0; c < g.cols; ++c)
            if (m[r * g.cols + c]) ga(r, c) += n.val(r, c) * (g(r, c) - dot);
        }
        break;
      }
      case Op::kLogSoftmax: {
        Mat& ga = touch(n.p0);
        for (int r = 0; r < g.rows; ++r) {
          double rowsum = 0.0;
          for (int c = 0; c < g.cols; ++c) rowsum += g(r, c);
          for (int c = 0; c < g.cols; ++c)
            ga(r, c) += g(r, c) - std::exp(n.val(r, c)) * rowsum;
        }
        break;
      }
      case Op::kPick: {
        Mat& ga = touch(n.p0);
        for (std::size_t i = 0; i < n.picks->size(); ++i) {
          const auto& [r, c] = (*n.picks)[i];
          ga(r, c) += g(static_cast<int>(i), 0);
        }
        break;
      }
      case Op::kSumAll: {
        Mat& ga = touch(n.p0);
        const double s = g(0, 0);
        for (double& x : ga.a) x += s;
        break;
      }
    }
  }
}

}  // namespace gdnlab
