#include "gdnlab/model.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace gdnlab {

const char* layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::kMeanAgg: return "mean-agg";
    case LayerKind::kSumAgg: return "sum-agg";
    case LayerKind::kAttention: return "attention";
    case LayerKind::kGatedMean: return "gated-mean";
    case LayerKind::kGatedAttention: return "gated-attention";
  }
  return "?";
}

LayerKind layer_kind_from_name(const std::string& name) {
  if (name == "mean-agg") return LayerKind::kMeanAgg;
  if (name == "sum-agg") return LayerKind::kSumAgg;
  if (name == "attention") return LayerKind::kAttention;
  if (name == "gated-mean") return LayerKind::kGatedMean;
  if (name == "gated-attention") return LayerKind::kGatedAttention;
  throw ModelError("unknown layer kind: " + name);
}

namespace {

bool uses_attention(LayerKind kind) {
  return kind == LayerKind::kAttention || kind == LayerKind::kGatedAttention;
}

bool uses_gate(LayerKind kind) {
  return kind == LayerKind::kGatedMean || kind == LayerKind::kGatedAttention;
}

int add_weight(ParamStore& params, const std::string& name, int in, int out, Rng& rng) {
  return params.add(name, uniform_init(in, out, 1.0 / std::sqrt(static_cast<double>(in)), rng));
}

}  // namespace

GdnModel make_gdn_model(const ModelConfig& config, Rng& rng) {
  if (config.obs_dim <= 0) throw ModelError("obs_dim must be positive");
  if (config.n_actions <= 0) throw ModelError("n_actions must be positive");
  if (config.rounds < 1) throw ModelError("at least one message-passing round required");

  GdnModel model;
  model.config = config;
  ParamStore& p = model.params;

  if (config.recurrent) {
    RecurrentSpec cell;
    cell.in_dim = config.obs_dim;
    cell.hidden_dim = config.hidden;
    cell.wz = add_weight(p, "cell.wz", cell.in_dim, cell.hidden_dim, rng);
    cell.uz = add_weight(p, "cell.uz", cell.hidden_dim, cell.hidden_dim, rng);
    cell.bz = p.add("cell.bz", Mat(1, cell.hidden_dim));
    cell.wr = add_weight(p, "cell.wr", cell.in_dim, cell.hidden_dim, rng);
    cell.ur = add_weight(p, "cell.ur", cell.hidden_dim, cell.hidden_dim, rng);
    cell.br = p.add("cell.br", Mat(1, cell.hidden_dim));
    cell.wh = add_weight(p, "cell.wh", cell.in_dim, cell.hidden_dim, rng);
    cell.uh = add_weight(p, "cell.uh", cell.hidden_dim, cell.hidden_dim, rng);
    cell.bh = p.add("cell.bh", Mat(1, cell.hidden_dim));
    model.recurrent = cell;
  }

  int in_dim = config.recurrent ? config.hidden : config.obs_dim;
  for (int m = 0; m < config.rounds; ++m) {
    LayerSpec layer;
    layer.kind = config.kind;
    layer.in_dim = in_dim;
    layer.out_dim = config.hidden;
    layer.qk_dim = config.qk_dim;
    layer.value_dim = config.value_dim;
    const std::string tag = "layer" + std::to_string(m);
    layer.w_self = add_weight(p, tag + ".w_self", in_dim, layer.out_dim, rng);
    const int agg_dim = uses_attention(layer.kind) ? layer.value_dim : in_dim;
    layer.w_agg = add_weight(p, tag + ".w_agg", agg_dim, layer.out_dim, rng);
    layer.bias = p.add(tag + ".bias", Mat(1, layer.out_dim));
    if (uses_attention(layer.kind)) {
      layer.w_key = add_weight(p, tag + ".w_key", in_dim, layer.qk_dim, rng);
      layer.w_query = add_weight(p, tag + ".w_query", in_dim, layer.qk_dim, rng);
      layer.w_value = add_weight(p, tag + ".w_value", in_dim, layer.value_dim, rng);
    }
    if (uses_gate(layer.kind)) {
      layer.w_gate = add_weight(p, tag + ".w_gate", in_dim, 1, rng);
      layer.b_gate = p.add(tag + ".b_gate", Mat(1, 1));
    }
    if (config.global_readout) {
      layer.w_read = add_weight(p, tag + ".w_read", in_dim, layer.out_dim, rng);
    }
    model.layers.push_back(layer);
    in_dim = layer.out_dim;
  }

  model.head_w = add_weight(p, "head.w", in_dim, config.n_actions, rng);
  model.head_b = p.add("head.b", Mat(1, config.n_actions));
  if (config.value_head) {
    model.vhead_w = add_weight(p, "vhead.w", in_dim, 1, rng);
    model.vhead_b = p.add("vhead.b", Mat(1, 1));
  }
  return model;
}

int augmented_dim(int obs_dim, const AugmentationConfig& cfg) {
  switch (cfg.mode) {
    case AugmentationMode::kNone:
      return obs_dim;
    case AugmentationMode::kUniqueId:
      return obs_dim + cfg.max_agents;
    case AugmentationMode::kRni: {
      if (!(cfg.rni_ratio > 0.0 && cfg.rni_ratio < 1.0))
        throw ModelError("rni_ratio must be in (0, 1)");
      // k noise entries so that k / (obs_dim + k) == rni_ratio
      const int k = static_cast<int>(
          std::llround(obs_dim * cfg.rni_ratio / (1.0 - cfg.rni_ratio)));
      return obs_dim + std::max(k, 1);
    }
  }
  return obs_dim;
}

Mat augment(const Mat& obs, const AugmentationConfig& cfg, Rng& rng) {
  if (cfg.mode == AugmentationMode::kNone) return obs;
  const int n = obs.rows;
  const int d = obs.cols;
  const int out_dim = augmented_dim(d, cfg);
  if (cfg.mode == AugmentationMode::kUniqueId && n > cfg.max_agents)
    throw ModelError("more agents than unique-id slots");
  Mat out(n, out_dim);
  for (int i = 0; i < n; ++i) {
    std::memcpy(out.row(i), obs.row(i), sizeof(double) * d);
    if (cfg.mode == AugmentationMode::kUniqueId) {
      out(i, d + i) = 1.0;
    } else {
      for (int k = d; k < out_dim; ++k) out(i, k) = rng.uniform(-1.0, 1.0);
    }
  }
  return out;
}

namespace {

Mat aggregation_matrix(const AttributedGraph& comm, bool mean) {
  const int n = comm.node_count();
  Mat a(n, n);
  for (int i = 0; i < n; ++i) {
    const auto& nb = comm.in_neighbors(i);
    if (nb.empty()) continue;  // isolated agents aggregate the zero vector
    const double w = mean ? 1.0 / static_cast<double>(nb.size()) : 1.0;
    for (int j : nb) a(i, j) = w;
  }
  return a;
}

std::vector<std::uint8_t> attention_mask(const AttributedGraph& comm) {
  const int n = comm.node_count();
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i)
    for (int j : comm.in_neighbors(i)) mask[static_cast<std::size_t>(i) * n + j] = 1;
  return mask;
}

Mat mean_all_matrix(int n) {
  Mat m(n, n, n > 0 ? 1.0 / static_cast<double>(n) : 0.0);
  return m;
}

Tape::Id linear(Tape& tape, ParamStore& params, Tape::Id x, int w, int b) {
  Tape::Id out = tape.matmul(x, tape.param(params, w));
  if (b >= 0) out = tape.add_rowvec(out, tape.param(params, b));
  return out;
}

}  // namespace

ForwardNodes forward_on_tape(Tape& tape, GdnModel& model, const AttributedGraph& comm,
                             Tape::Id obs, Tape::Id hidden) {
  ParamStore& p = model.params;
  const int n = comm.node_count();
  if (tape.value(obs).rows != n) throw ModelError("one observation row per comm node required");
  if (tape.value(obs).cols != model.config.obs_dim)
    throw ModelError("observation dimension mismatch");

  Tape::Id x = obs;
  if (model.recurrent) {
    const RecurrentSpec& cell = *model.recurrent;
    if (hidden < 0) hidden = tape.input(Mat(n, cell.hidden_dim));
    if (tape.value(hidden).cols != cell.hidden_dim) throw ModelError("hidden dimension mismatch");
    Tape::Id z = tape.sigmoid_(tape.add(linear(tape, p, x, cell.wz, cell.bz),
                                        tape.matmul(hidden, tape.param(p, cell.uz))));
    Tape::Id r = tape.sigmoid_(tape.add(linear(tape, p, x, cell.wr, cell.br),
                                        tape.matmul(hidden, tape.param(p, cell.ur))));
    Tape::Id cand = tape.tanh_(tape.add(linear(tape, p, x, cell.wh, cell.bh),
                                        tape.matmul(tape.hadamard(r, hidden),
                                                    tape.param(p, cell.uh))));
    x = tape.add(tape.sub(hidden, tape.hadamard(z, hidden)), tape.hadamard(z, cand));
  } else if (hidden >= 0) {
    throw ModelError("hidden state passed to a non-recurrent model");
  }

  for (const LayerSpec& layer : model.layers) {
    if (tape.value(x).cols != layer.in_dim) throw ModelError("layer input dimension mismatch");
    Tape::Id agg;
    switch (layer.kind) {
      case LayerKind::kMeanAgg:
        agg = tape.const_matmul(aggregation_matrix(comm, true), x);
        break;
      case LayerKind::kSumAgg:
        agg = tape.const_matmul(aggregation_matrix(comm, false), x);
        break;
      case LayerKind::kGatedMean: {
        Tape::Id gate = tape.sigmoid_(linear(tape, p, x, layer.w_gate, layer.b_gate));
        agg = tape.const_matmul(aggregation_matrix(comm, true), tape.scale_rows(x, gate));
        break;
      }
      case LayerKind::kAttention:
      case LayerKind::kGatedAttention: {
        Tape::Id src = x;
        if (layer.kind == LayerKind::kGatedAttention) {
          Tape::Id gate = tape.sigmoid_(linear(tape, p, x, layer.w_gate, layer.b_gate));
          src = tape.scale_rows(x, gate);
        }
        Tape::Id keys = tape.matmul(src, tape.param(p, layer.w_key));
        Tape::Id queries = tape.matmul(x, tape.param(p, layer.w_query));
        Tape::Id scores = tape.scale(tape.matmul_nt(queries, keys),
                                     1.0 / std::sqrt(static_cast<double>(layer.qk_dim)));
        Tape::Id weights = tape.masked_softmax_rows(scores, attention_mask(comm));
        agg = tape.matmul(weights, tape.matmul(src, tape.param(p, layer.w_value)));
        break;
      }
    }
    Tape::Id pre = tape.add(tape.matmul(x, tape.param(p, layer.w_self)),
                            tape.matmul(agg, tape.param(p, layer.w_agg)));
    if (layer.w_read >= 0) {
      Tape::Id global = tape.const_matmul(mean_all_matrix(n), x);
      pre = tape.add(pre, tape.matmul(global, tape.param(p, layer.w_read)));
    }
    pre = tape.add_rowvec(pre, tape.param(p, layer.bias));
    x = tape.tanh_(pre);
  }

  ForwardNodes out;
  out.final_values = x;
  out.outputs = linear(tape, p, x, model.head_w, model.head_b);
  if (model.vhead_w >= 0) out.value = linear(tape, p, x, model.vhead_w, model.vhead_b);
  if (model.recurrent) out.hidden = x;
  return out;
}

ForwardResult forward(GdnModel& model, const AttributedGraph& comm, const Mat& obs,
                      const Mat* hidden) {
  Tape tape;
  Tape::Id h = -1;
  if (model.recurrent) {
    h = tape.input(hidden ? *hidden : zero_hidden(model, comm.node_count()));
  } else if (hidden) {
    throw ModelError("hidden state passed to a non-recurrent model");
  }
  const ForwardNodes nodes = forward_on_tape(tape, model, comm, tape.input(obs), h);
  ForwardResult result;
  result.outputs = tape.value(nodes.outputs);
  if (nodes.value >= 0) result.value = tape.value(nodes.value);
  if (nodes.hidden >= 0) result.hidden = tape.value(nodes.hidden);
  return result;
}

Mat zero_hidden(const GdnModel& model, int nagents) {
  return Mat(nagents, model.hidden_dim());
}

double equivariance_check(GdnModel& model, const AttributedGraph& comm, const Mat& obs,
                          const NodePermutation& sigma, const Mat* hidden) {
  const ForwardResult base = forward(model, comm, obs, hidden);
  const AttributedGraph comm_p = permute(comm, sigma);
  const Mat obs_p = permute_rows(obs, sigma.perm());
  Mat hidden_p;
  const Mat* hp = nullptr;
  if (hidden) {
    hidden_p = permute_rows(*hidden, sigma.perm());
    hp = &hidden_p;
  }
  const ForwardResult permuted = forward(model, comm_p, obs_p, hp);
  double dev = max_abs_diff(permute_rows(base.outputs, sigma.perm()), permuted.outputs);
  if (base.value.size() > 0)
    dev = std::max(dev, max_abs_diff(permute_rows(base.value, sigma.perm()), permuted.value));
  if (base.hidden.size() > 0)
    dev = std::max(dev, max_abs_diff(permute_rows(base.hidden, sigma.perm()), permuted.hidden));
  return dev;
}

namespace {
constexpr char kCheckpointHeader[] = "gdnlab-model 1";
}

void save_model(std::ostream& out, const GdnModel& model) {
  const ModelConfig& c = model.config;
  out << kCheckpointHeader << '\n';
  out << layer_kind_name(c.kind) << ' ' << c.rounds << ' ' << c.hidden << ' ' << c.obs_dim << ' '
      << c.n_actions << ' ' << int(c.recurrent) << ' ' << int(c.global_readout) << ' '
      << int(c.value_head) << ' ' << c.qk_dim << ' ' << c.value_dim << '\n';
  char buf[64];
  for (int i = 0; i < model.params.count(); ++i) {
    const Mat& v = model.params.value(i);
    out << "tensor " << model.params.name(i) << ' ' << v.rows << ' ' << v.cols << '\n';
    for (int r = 0; r < v.rows; ++r) {
      for (int cidx = 0; cidx < v.cols; ++cidx) {
        std::snprintf(buf, sizeof(buf), "%a", v(r, cidx));
        out << (cidx ? " " : "") << buf;
      }
      out << '\n';
    }
  }
}

void save_model_file(const std::string& path, const GdnModel& model) {
  std::ofstream out(path);
  if (!out) throw ModelError("cannot open checkpoint for writing: " + path);
  save_model(out, model);
}

GdnModel load_model(std::istream& in) {
  std::string header;
  std::getline(in, header);
  if (header != kCheckpointHeader) throw ModelError("unrecognized checkpoint header");
  ModelConfig c;
  std::string kind;
  int recurrent = 0, readout = 0, value_head = 0;
  in >> kind >> c.rounds >> c.hidden >> c.obs_dim >> c.n_actions >> recurrent >> readout >>
      value_head >> c.qk_dim >> c.value_dim;
  if (!in) throw ModelError("truncated checkpoint config");
  c.kind = layer_kind_from_name(kind);
  c.recurrent = recurrent != 0;
  c.global_readout = readout != 0;
  c.value_head = value_head != 0;

  Rng rng(0);
  GdnModel model = make_gdn_model(c, rng);
  std::string tag, name;
  int rows = 0, cols = 0;
  for (int i = 0; i < model.params.count(); ++i) {
    if (!(in >> tag >> name >> rows >> cols) || tag != "tensor")
      throw ModelError("truncated checkpoint tensors");
    if (name != model.params.name(i)) throw ModelError("checkpoint tensor order mismatch");
    Mat& v = model.params.value(i);
    if (rows != v.rows || cols != v.cols) throw ModelError("checkpoint tensor shape mismatch");
    for (std::size_t k = 0; k < v.size(); ++k) {
      std::string tok;
      if (!(in >> tok)) throw ModelError("truncated checkpoint values");
      v.a[k] = std::strtod(tok.c_str(), nullptr);
    }
  }
  return model;
}

GdnModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open checkpoint: " + path);
  return load_model(in);
}

}  // namespace gdnlab
