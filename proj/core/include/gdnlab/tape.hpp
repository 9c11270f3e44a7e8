#pragma once

#include <cstdint>
#include <memory>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gdnlab/tensor.hpp"

namespace gdnlab {

// Reverse-mode autodiff over matrix operations. Nodes live in one arena per
// tape; backward() runs a single reverse sweep and accumulates parameter
// gradients into the ParamStore the param nodes were created from.
class Tape {
 public:
  using Id = std::int32_t;

  Id input(Mat value);
  Id param(ParamStore& store, int param_idx);  // memoized per tape

  Id matmul(Id a, Id b);       // a * b
  Id matmul_nt(Id a, Id b);    // a * b^T
  Id add(Id a, Id b);          // same shape
  Id add_rowvec(Id a, Id v);   // v is 1 x c, broadcast over rows
  Id sub(Id a, Id b);
  Id hadamard(Id a, Id b);
  Id scale(Id a, double c);
  Id tanh_(Id a);
  Id sigmoid_(Id a);
  Id scale_rows(Id a, Id g);   // g is n x 1, scales row i by g(i)
  Id const_matmul(Mat c, Id a);  // c * a, no gradient through c
  // rowwise softmax over entries with mask != 0; fully masked rows give zeros
  Id masked_softmax_rows(Id a, std::vector<std::uint8_t> mask);
  Id log_softmax_rows(Id a);
  Id pick(Id a, std::vector<std::pair<int, int>> entries);  // k x 1 gather
  Id sum_all(Id a);  // 1 x 1

  const Mat& value(Id id) const { return nodes_[id].val; }
  int node_count() const { return static_cast<int>(nodes_.size()); }

  // d(loss)/d(param) accumulated into each param's ParamStore gradient;
  // loss must be 1 x 1
  void backward(Id loss);

 private:
  enum class Op : std::uint8_t {
    kInput, kParam, kMatMul, kMatMulNT, kAdd, kAddRowVec, kSub, kHadamard,
    kScale, kTanh, kSigmoid, kScaleRows, kConstMatMul, kMaskedSoftmax,
    kLogSoftmax, kPick, kSumAll,
  };

  struct Node {
    Op op;
    Id p0 = -1;
    Id p1 = -1;
    Mat val;
    double scalar = 0.0;
    int param_idx = -1;
    ParamStore* store = nullptr;
    std::shared_ptr<const Mat> cmat;
    std::shared_ptr<const std::vector<std::uint8_t>> mask;
    std::shared_ptr<const std::vector<std::pair<int, int>>> picks;
  };

  Id push(Node node) {
    nodes_.push_back(std::move(node));
    return static_cast<Id>(nodes_.size()) - 1;
  }

  std::vector<Node> nodes_;
  std::unordered_map<std::uint64_t, Id> param_cache_;
};

}  // namespace gdnlab
