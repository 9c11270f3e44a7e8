#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gdnlab/graph.hpp"
#include "gdnlab/tape.hpp"
#include "gdnlab/tensor.hpp"

namespace gdnlab {

struct ModelError : std::runtime_error {
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

enum class LayerKind { kMeanAgg, kSumAgg, kAttention, kGatedMean, kGatedAttention };

const char* layer_kind_name(LayerKind kind);
LayerKind layer_kind_from_name(const std::string& name);

// One message-passing round. Fields hold parameter indices into the model's
// ParamStore; -1 marks parts the kind does not use.
struct LayerSpec {
  LayerKind kind = LayerKind::kMeanAgg;
  int in_dim = 0;
  int out_dim = 0;
  int w_self = -1, w_agg = -1, bias = -1;
  int w_key = -1, w_query = -1, w_value = -1;  // attention projections
  int w_gate = -1, b_gate = -1;                // per-source soft gate
  int w_read = -1;                             // optional global readout
  int qk_dim = 16;
  int value_dim = 32;
};

// Gated recurrent cell combining the observation with the carried hidden
// state before layer 0; the new hidden state is the last layer's output.
struct RecurrentSpec {
  int in_dim = 0;
  int hidden_dim = 0;
  int wz = -1, uz = -1, bz = -1;
  int wr = -1, ur = -1, br = -1;
  int wh = -1, uh = -1, bh = -1;
};

struct ModelConfig {
  LayerKind kind = LayerKind::kMeanAgg;
  int rounds = 4;
  int hidden = 128;
  int obs_dim = 0;    // observation size after augmentation
  int n_actions = 0;
  bool recurrent = false;
  bool global_readout = false;
  bool value_head = true;  // critic output for the policy-gradient path
  int qk_dim = 16;
  int value_dim = 32;
};

struct GdnModel {
  ModelConfig config;
  ParamStore params;
  std::vector<LayerSpec> layers;
  std::optional<RecurrentSpec> recurrent;
  int head_w = -1, head_b = -1;    // shared actor head: logits or Q-values
  int vhead_w = -1, vhead_b = -1;

  int hidden_dim() const { return layers.empty() ? 0 : layers.back().out_dim; }
};

GdnModel make_gdn_model(const ModelConfig& config, Rng& rng);

enum class AugmentationMode { kNone, kUniqueId, kRni };

struct AugmentationConfig {
  AugmentationMode mode = AugmentationMode::kNone;
  double rni_ratio = 0.25;  // fraction of the augmented observation that is noise
  int max_agents = 0;       // one-hot width for unique ids
};

int augmented_dim(int obs_dim, const AugmentationConfig& cfg);
// Appends the configured augmentation to each agent row. RNI entries are
// freshly sampled from [-1, 1] on every call.
Mat augment(const Mat& obs, const AugmentationConfig& cfg, Rng& rng);

struct ForwardNodes {
  Tape::Id final_values = -1;  // n x hidden
  Tape::Id outputs = -1;       // n x n_actions, shared actor head
  Tape::Id value = -1;         // n x 1 when the model has a value head
  Tape::Id hidden = -1;        // n x hidden when the model is recurrent
};

ForwardNodes forward_on_tape(Tape& tape, GdnModel& model, const AttributedGraph& comm,
                             Tape::Id obs, Tape::Id hidden = -1);

struct ForwardResult {
  Mat outputs;
  Mat value;
  Mat hidden;
};

ForwardResult forward(GdnModel& model, const AttributedGraph& comm, const Mat& obs,
                      const Mat* hidden = nullptr);

Mat zero_hidden(const GdnModel& model, int nagents);

// Max over agents and components of |forward(sigma . inputs) - sigma . forward(inputs)|.
double equivariance_check(GdnModel& model, const AttributedGraph& comm, const Mat& obs,
                          const NodePermutation& sigma, const Mat* hidden = nullptr);

// Checkpoints round-trip bit-exactly (hexfloat text with shape headers).
void save_model(std::ostream& out, const GdnModel& model);
void save_model_file(const std::string& path, const GdnModel& model);
GdnModel load_model(std::istream& in);
GdnModel load_model_file(const std::string& path);

}  // namespace gdnlab
