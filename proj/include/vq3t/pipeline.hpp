#pragma once
// A toy multi-frame transformer: attention layers alternating between
// frame-wise and global self-attention, each followed by a GELU MLP, with
// pre-LayerNorm, LayerScale and residual connections throughout.
//
// Two execution paths share the same weights:
//
//   run_reference  f64 end to end, explicit LayerNorm / GELU / softmax.
//   run_quantized  the fused dataflow: one online Hadamard moves the
//                  activations into the rotated domain at the entry, every
//                  linear layer runs as an integer GEMM on offline-fused
//                  weights (LayerNorm gamma/beta, LayerScale, the domain
//                  Hadamards and the versaq DCT all baked in), residuals
//                  accumulate in the rotated domain, and a final Hadamard
//                  leaves it. The only online transforms are the entry/exit
//                  rotations, the per-head rotations around attention and
//                  one per-token rotation between the two MLP linears.
//
// The MLP mirrors the attention block's stage pattern: fc1 absorbs the
// channel Hadamard on its input side (its output returns to the plain hidden
// domain through the on-chip IDCT), GELU runs on plain values, one online
// Hadamard rotates the hidden vector, and fc2 absorbs that rotation plus the
// output-side transforms that land the result back in the rotated stream.
//
// LayerNorm and GELU evaluate in bf16-emulated precision when the nonlinear
// knob asks for it (the hardware runs them on BFUs); the f64 oracle setting
// exists so transform cancellation can be checked to fp accuracy.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "vq3t/attention.hpp"
#include "vq3t/attention_block.hpp"
#include "vq3t/fusion.hpp"
#include "vq3t/hadamard.hpp"
#include "vq3t/matrix.hpp"
#include "vq3t/quant.hpp"
#include "vq3t/rng.hpp"
#include "vq3t/saliency.hpp"

namespace vq3t {

enum class LayerKind { FrameAttention, GlobalAttention, Mlp };

struct ModelSpec {
  std::size_t frames = 1;
  std::size_t tokens_per_frame = 256;
  std::size_t channels = 512;
  std::size_t heads = 8;
  std::size_t blocks = 4;     // attention+MLP pairs when `layers` is empty
  std::size_t mlp_ratio = 4;  // hidden = channels * mlp_ratio
  double rope_base = 10000.0;
  double eps = 1e-6;

  // Explicit layer order; empty means the default alternation built from
  // `blocks`: attention layer 2k attends within frames, 2k+1 globally, and
  // every attention layer is followed by an MLP.
  std::vector<LayerKind> layers;

  std::size_t tokens() const { return frames * tokens_per_frame; }
  std::size_t hidden() const { return channels * mlp_ratio; }

  std::vector<LayerKind> layer_order() const {
    if (!layers.empty()) return layers;
    std::vector<LayerKind> order;
    order.reserve(2 * blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
      order.push_back(b % 2 == 0 ? LayerKind::FrameAttention : LayerKind::GlobalAttention);
      order.push_back(LayerKind::Mlp);
    }
    return order;
  }

  AttentionConfig attention_cfg(LayerKind kind) const {
    if (kind == LayerKind::FrameAttention)
      return attention_config(1, tokens_per_frame, channels, heads, rope_base);
    return attention_config(frames, tokens_per_frame, channels, heads, rope_base);
  }

  void validate() const {
    if (frames == 0 || tokens_per_frame == 0)
      throw std::invalid_argument("ModelSpec: frames and tokens_per_frame must be >= 1");
    if (!is_power_of_two(channels) || channels < 32)
      throw std::invalid_argument("ModelSpec: channels must be a power of two >= 32");
    if (mlp_ratio == 0 || !is_power_of_two(hidden()))
      throw std::invalid_argument("ModelSpec: hidden width must be a power of two");
    if (layers.empty() && blocks == 0)
      throw std::invalid_argument("ModelSpec: no layers");
    attention_cfg(LayerKind::GlobalAttention);  // validates channels/heads/d_k
  }
};

struct MlpParams {
  DenseMatrix w1, w2;  // channels x hidden, hidden x channels
  std::vector<double> b1, b2;
  std::vector<double> gamma, beta;  // pre-MLP LayerNorm
  std::vector<double> layerscale;
  double eps = 1e-6;
};

struct ModelLayer {
  LayerKind kind = LayerKind::Mlp;
  AttentionBlockParams attn;  // attention layers
  MlpParams mlp;              // MLP layers
};

struct Model {
  ModelSpec spec;
  std::vector<ModelLayer> layers;
};

namespace detail {

inline std::uint64_t split_seed(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::vector<double> normal_vec(Rng& rng, std::size_t n, double mean, double sd,
                                      bool abs_value = false) {
  std::vector<double> v(n);
  for (double& x : v) {
    x = rng.normal(mean, sd);
    if (abs_value) x = std::fabs(x);
  }
  return v;
}

// Per-row population statistics, same recovery formula as the rotated-domain
// path so the two stay within fp noise of each other.
inline DenseMatrix layer_norm(const DenseMatrix& x, const std::vector<double>& gamma,
                              const std::vector<double>& beta, double eps) {
  if (!gamma.empty() && gamma.size() != x.cols)
    throw std::invalid_argument("layer_norm: gamma length");
  if (!beta.empty() && beta.size() != x.cols) throw std::invalid_argument("layer_norm: beta length");
  const double c = double(x.cols);
  DenseMatrix out(x.rows, x.cols);
  for (std::size_t r = 0; r < x.rows; ++r) {
    double sum = 0.0, norm2 = 0.0;
    for (std::size_t j = 0; j < x.cols; ++j) {
      double v = x.at(r, j);
      sum += v;
      norm2 += v * v;
    }
    double mean = sum / c;
    double var = norm2 / c - mean * mean;
    if (var < 0.0) var = 0.0;
    double inv = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < x.cols; ++j) {
      double v = (x.at(r, j) - mean) * inv;
      if (!gamma.empty()) v *= gamma[j];
      if (!beta.empty()) v += beta[j];
      out.at(r, j) = v;
    }
  }
  return out;
}

inline double gelu_tanh(double x) {
  const double k = 0.7978845608028654;  // sqrt(2/pi)
  return 0.5 * x * (1.0 + std::tanh(k * (x + 0.044715 * x * x * x)));
}

inline void gelu_inplace(DenseMatrix& m, bool bf16) {
  for (double& v : m.data) {
    double g = gelu_tanh(v);
    v = bf16 ? bf16_value(g) : g;
  }
}

}  // namespace detail

// Deterministic toy weights: linear layers draw from the structured generator
// scaled by 1/sqrt(fan_in), LayerNorm scales sit near one, shifts near zero,
// LayerScale near one.
inline Model init_model(const ModelSpec& spec, std::uint64_t seed,
                        const WeightStructure& ws = {}) {
  spec.validate();
  const std::size_t C = spec.channels;
  const std::size_t H = spec.hidden();
  const double wc = 1.0 / std::sqrt(double(C));
  const double wh = 1.0 / std::sqrt(double(H));

  Model m;
  m.spec = spec;
  Rng rng(seed);
  std::uint64_t mat_seed = seed;

  // Planted column groups model stationary output-channel structure. The
  // output projection and the second MLP linear hand their outputs straight
  // to the next layer's fused rotation, so group structure on their output
  // side has no stationary meaning; those two draw with no planted columns.
  WeightStructure ws_rot = ws;
  ws_rot.salient_fraction = 0.0;

  for (LayerKind kind : spec.layer_order()) {
    ModelLayer layer;
    layer.kind = kind;
    if (kind == LayerKind::Mlp) {
      MlpParams& p = layer.mlp;
      p.w1 = scale(synth_weights(C, H, detail::split_seed(mat_seed), ws), wc);
      p.w2 = scale(synth_weights(H, C, detail::split_seed(mat_seed), ws_rot), wh);
      p.b1 = detail::normal_vec(rng, H, 0.0, 0.02);
      p.b2 = detail::normal_vec(rng, C, 0.0, 0.02);
      p.gamma = detail::normal_vec(rng, C, 1.0, 0.2, /*abs=*/true);
      p.beta = detail::normal_vec(rng, C, 0.0, 0.02);
      p.layerscale = detail::normal_vec(rng, C, 1.0, 0.1, /*abs=*/true);
      p.eps = spec.eps;
    } else {
      AttentionBlockParams& p = layer.attn;
      p.w.wq = scale(synth_weights(C, C, detail::split_seed(mat_seed), ws), wc);
      p.w.wk = scale(synth_weights(C, C, detail::split_seed(mat_seed), ws), wc);
      p.w.wv = scale(synth_weights(C, C, detail::split_seed(mat_seed), ws), wc);
      p.w.wproj = scale(synth_weights(C, C, detail::split_seed(mat_seed), ws_rot), wc);
      p.w.bq = detail::normal_vec(rng, C, 0.0, 0.02);
      p.w.bk = detail::normal_vec(rng, C, 0.0, 0.02);
      p.w.bv = detail::normal_vec(rng, C, 0.0, 0.02);
      p.w.bproj = detail::normal_vec(rng, C, 0.0, 0.02);
      p.gamma = detail::normal_vec(rng, C, 1.0, 0.2, /*abs=*/true);
      p.beta = detail::normal_vec(rng, C, 0.0, 0.02);
      p.layerscale = detail::normal_vec(rng, C, 1.0, 0.1, /*abs=*/true);
      p.eps = spec.eps;
    }
    m.layers.push_back(std::move(layer));
  }
  return m;
}

struct RunResult {
  DenseMatrix output;
  std::vector<DenseMatrix> states;  // plain-domain activation after each layer
  ErrorStats metrics;               // vs. the reference run; identity when none given
  std::vector<ErrorStats> trace;    // per-layer metrics vs. the reference states
};

inline RunResult run_reference(const Model& m, const DenseMatrix& x0) {
  const ModelSpec& spec = m.spec;
  spec.validate();
  if (x0.rows != spec.tokens() || x0.cols != spec.channels)
    throw std::invalid_argument("run_reference: input must be tokens x channels");

  const std::size_t P = spec.tokens_per_frame;
  DenseMatrix x = x0;
  RunResult rr;
  for (const ModelLayer& layer : m.layers) {
    if (layer.kind == LayerKind::Mlp) {
      const MlpParams& p = layer.mlp;
      DenseMatrix ln = detail::layer_norm(x, p.gamma, p.beta, p.eps);
      DenseMatrix h = matmul(ln, p.w1);
      detail::add_bias(h, p.b1, "run_reference");
      detail::gelu_inplace(h, false);
      DenseMatrix y = matmul(h, p.w2);
      detail::add_bias(y, p.b2, "run_reference");
      if (!p.layerscale.empty()) y = diag_scale_cols(y, p.layerscale);
      x = add(x, y);
    } else {
      const AttentionBlockParams& p = layer.attn;
      DenseMatrix ln = detail::layer_norm(x, p.gamma, p.beta, p.eps);
      AttentionConfig cfg = spec.attention_cfg(layer.kind);
      DenseMatrix out(x.rows, x.cols);
      if (layer.kind == LayerKind::FrameAttention) {
        for (std::size_t s = 0; s < spec.frames; ++s) {
          DenseMatrix part = row_block(ln, s * P, (s + 1) * P);
          set_row_block(out, s * P, reference_mha(part, p.w, cfg, /*use_rope=*/true));
        }
      } else {
        out = reference_mha(ln, p.w, cfg, /*use_rope=*/true);
      }
      if (!p.layerscale.empty()) out = diag_scale_cols(out, p.layerscale);
      x = add(x, out);
    }
    rr.states.push_back(x);
  }
  rr.output = x;
  return rr;
}

// ---------------------------------------------------------------------------
// Fused execution

struct PreparedMlp {
  DenseMatrix w1_fused, w2_fused;
  QuantTensor w1_q, w2_q;
  std::vector<double> b1;  // plain hidden domain, added after the fc1 IDCT
  std::vector<double> b2;  // output domain, added after the fc2 IDCT
  DctMatrix dct1, dct2;    // versaq only
};

struct PreparedLayer {
  LayerKind kind = LayerKind::Mlp;
  PreparedAttention attn;
  PreparedMlp mlp;
};

struct PreparedModel {
  QuantMethod method = QuantMethod::Rtn;
  int weight_bits = 4;
  std::vector<PreparedLayer> layers;
};

inline PreparedModel prepare_model(const Model& m, QuantMethod method, int wbits = 4) {
  m.spec.validate();
  const std::size_t C = m.spec.channels;
  const std::size_t H = m.spec.hidden();

  PreparedModel pm;
  pm.method = method;
  pm.weight_bits = wbits;
  for (const ModelLayer& layer : m.layers) {
    PreparedLayer pl;
    pl.kind = layer.kind;
    if (layer.kind == LayerKind::Mlp) {
      const MlpParams& p = layer.mlp;
      if (p.w1.rows != C || p.w1.cols != H || p.w2.rows != H || p.w2.cols != C)
        throw std::invalid_argument("prepare_model: MLP weight shapes");
      PreparedMlp& pp = pl.mlp;

      FusionParams fp1;
      fp1.gamma = p.gamma;
      fp1.beta = p.beta;
      fp1.eps = p.eps;
      TransformPack tp1;
      tp1.in_order = C;  // whole-channel Hadamard on the residual stream
      if (method == QuantMethod::VersaQ) {
        pp.dct1 = block_diagonal_dct(H, 32, DctVariant::Orthonormal);
        tp1.dct = pp.dct1;
      }
      pp.w1_fused = fuse_weights(p.w1, fp1, method, tp1);
      pp.b1 = fuse_bias(p.w1, fp1, tp1, p.b1.empty() ? nullptr : &p.b1);
      pp.w1_q = rtn_quantize(pp.w1_fused, wbits, QuantGranularity::PerChannel);

      FusionParams fp2;
      fp2.layerscale = p.layerscale;
      TransformPack tp2;
      tp2.in_order = H;  // the online Hadamard after GELU is full hidden width
      tp2.rotate_output = method != QuantMethod::Rtn;
      if (method == QuantMethod::VersaQ) {
        pp.dct2 = block_diagonal_dct(C, 32, DctVariant::Orthonormal);
        tp2.dct = pp.dct2;
      }
      pp.w2_fused = fuse_weights(p.w2, fp2, method, tp2);
      pp.b2 = fuse_bias(p.w2, fp2, tp2, p.b2.empty() ? nullptr : &p.b2);
      pp.w2_q = rtn_quantize(pp.w2_fused, wbits, QuantGranularity::PerChannel);
    } else {
      pl.attn = prepare_attention_block(layer.attn, m.spec.attention_cfg(layer.kind), method,
                                        wbits);
    }
    pm.layers.push_back(std::move(pl));
  }
  return pm;
}

struct RunOptions {
  TileConfig tiles;
  SoftmaxPrecision nonlinear = SoftmaxPrecision::Bf16;  // BFU-emulated nonlinears
  int weight_bits = 0;  // 0 = the mode's width
  int act_bits = 0;     // 0 = the mode's width
};

// The fused dataflow. `mode` picks the integer widths (PrecisionMode::Bf16
// suspends integer quantization entirely, leaving the pure transform
// dataflow); `opt.weight_bits` / `opt.act_bits` override the widths for
// off-grid sweeps. When `ref` is given, metrics and the per-layer trace are
// filled against it.
inline RunResult run_quantized(const Model& m, const DenseMatrix& x0, PrecisionMode mode,
                               QuantMethod method, const RunOptions& opt = {},
                               const RunResult* ref = nullptr) {
  const ModelSpec& spec = m.spec;
  spec.validate();
  opt.tiles.validate();
  if (x0.rows != spec.tokens() || x0.cols != spec.channels)
    throw std::invalid_argument("run_quantized: input must be tokens x channels");

  const bool integer = mode != PrecisionMode::Bf16;
  const bool rot = method != QuantMethod::Rtn;
  const bool bf = opt.nonlinear == SoftmaxPrecision::Bf16;
  const int wb = opt.weight_bits > 0 ? opt.weight_bits : weight_bits(mode);
  const int ab = opt.act_bits > 0 ? opt.act_bits : act_bits(mode);
  const std::size_t P = spec.tokens_per_frame;

  PreparedModel pm = prepare_model(m, method, integer ? wb : 4);

  DenseMatrix x = rot ? apply_wht(x0, Axis::Rows) : x0;
  if (bf) detail::round_bf16_inplace(x);

  auto gemm = [&](const DenseMatrix& a, const DenseMatrix& dense, const QuantTensor& q) {
    if (!integer) return matmul(a, dense);
    QuantTensor aq = rtn_quantize(a, ab, QuantGranularity::PerTensor);
    return int_matmul_dequant(aq, q);
  };

  RunResult rr;
  for (const PreparedLayer& pl : pm.layers) {
    if (pl.kind == LayerKind::Mlp) {
      const PreparedMlp& pp = pl.mlp;
      DenseMatrix ln = rot ? rotated_layernorm(x, spec.eps) : detail::layer_norm(x, {}, {}, spec.eps);
      if (bf) detail::round_bf16_inplace(ln);

      DenseMatrix h = gemm(ln, pp.w1_fused, pp.w1_q);
      if (method == QuantMethod::VersaQ) h = apply_idct(h, pp.dct1, Axis::Rows);
      detail::add_bias(h, pp.b1, "run_quantized");
      if (bf) detail::round_bf16_inplace(h);
      detail::gelu_inplace(h, bf);

      if (rot) {
        h = apply_wht(h, Axis::Rows);  // the MLP's one online rotation
        if (bf) detail::round_bf16_inplace(h);
      }
      DenseMatrix y = gemm(h, pp.w2_fused, pp.w2_q);
      if (method == QuantMethod::VersaQ) y = apply_idct(y, pp.dct2, Axis::Rows);
      detail::add_bias(y, pp.b2, "run_quantized");
      if (bf) detail::round_bf16_inplace(y);
      x = add(x, y);
    } else {
      DenseMatrix ln = rot ? rotated_layernorm(x, spec.eps) : detail::layer_norm(x, {}, {}, spec.eps);
      if (bf) detail::round_bf16_inplace(ln);

      DenseMatrix out(x.rows, x.cols);
      if (pl.kind == LayerKind::FrameAttention) {
        for (std::size_t s = 0; s < spec.frames; ++s) {
          DenseMatrix part = row_block(ln, s * P, (s + 1) * P);
          set_row_block(out, s * P,
                        quantized_attention_block(part, pl.attn, opt.tiles, mode, opt.nonlinear,
                                                  nullptr, ab));
        }
      } else {
        out = quantized_attention_block(ln, pl.attn, opt.tiles, mode, opt.nonlinear, nullptr, ab);
      }
      x = add(x, out);
    }
    if (bf) detail::round_bf16_inplace(x);  // the residual stream lives in bf16
    rr.states.push_back(rot ? apply_wht(x, Axis::Rows) : x);
  }

  rr.output = rot ? apply_wht(x, Axis::Rows) : x;
  if (bf) detail::round_bf16_inplace(rr.output);
  if (ref) {
    if (ref->states.size() != rr.states.size())
      throw std::invalid_argument("run_quantized: reference trace length mismatch");
    rr.metrics = quant_error(ref->output, rr.output);
    for (std::size_t i = 0; i < rr.states.size(); ++i)
      rr.trace.push_back(quant_error(ref->states[i], rr.states[i]));
  }
  return rr;
}

// ---------------------------------------------------------------------------
// Bit-width sweep

enum class SweepAxis { WeightBits, ActivationBits };

struct SweepPoint {
  int bits = 0;
  ErrorStats metrics;
};

// Holds one axis fixed and sweeps the other across [lo, hi]. Error is not
// monotone in general (quantization noise is not), so consumers should only
// rely on endpoint ordering.
inline std::vector<SweepPoint> bitwidth_sweep(const Model& m, const DenseMatrix& x,
                                              QuantMethod method, SweepAxis axis, int fixed_bits,
                                              int lo = 3, int hi = 8,
                                              const RunOptions& base = {}) {
  if (lo < 3 || hi > 8 || lo > hi)
    throw std::invalid_argument("bitwidth_sweep: range must lie inside [3,8]");
  if (fixed_bits < 3 || fixed_bits > 8)
    throw std::invalid_argument("bitwidth_sweep: fixed width must lie inside [3,8]");

  RunResult ref = run_reference(m, x);
  std::vector<SweepPoint> curve;
  curve.reserve(std::size_t(hi - lo + 1));
  for (int b = lo; b <= hi; ++b) {
    RunOptions opt = base;
    opt.weight_bits = axis == SweepAxis::WeightBits ? b : fixed_bits;
    opt.act_bits = axis == SweepAxis::WeightBits ? fixed_bits : b;
    RunResult r = run_quantized(m, x, PrecisionMode::W4A8, method, opt, &ref);
    curve.push_back({b, r.metrics});
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Op sequence for the performance model

enum class OpKind { Gemm, Attention, OnlineWht, Idct, Quantize, Nonlinear };
enum class NlKind { LayerNorm, Gelu, Rope, Residual };

struct LayerOp {
  OpKind kind = OpKind::Gemm;
  NlKind nl = NlKind::LayerNorm;            // Nonlinear ops
  std::size_t m = 0, k = 0, n = 0;          // Gemm
  std::size_t elems = 0;                    // elementwise sizes
  std::size_t width = 0;                    // butterfly / IDCT span
  std::size_t seqs = 0, seq_len = 0;        // Attention: sequence count and length
  std::size_t heads = 0, head_dim = 0;
  int w_bits = 0, a_bits = 0;
  const char* label = "";
};

// The op-by-op schedule run_quantized executes, for the cycle model. Bf16
// mode runs the plain dataflow: no rotations, no IDCTs, no quantization
// units, GEMMs on 16-bit operands.
inline std::vector<LayerOp> model_ops(const ModelSpec& spec, PrecisionMode mode,
                                      QuantMethod method) {
  spec.validate();
  const bool integer = mode != PrecisionMode::Bf16;
  const bool rot = integer && method != QuantMethod::Rtn;
  const bool dct = integer && method == QuantMethod::VersaQ;
  const int wb = weight_bits(mode);
  const int ab = act_bits(mode);
  const std::size_t T = spec.tokens();
  const std::size_t C = spec.channels;
  const std::size_t H = spec.hidden();
  const std::size_t dk = C / spec.heads;

  std::vector<LayerOp> ops;
  auto nonlinear = [&](NlKind nl, std::size_t elems, const char* label) {
    LayerOp op;
    op.kind = OpKind::Nonlinear;
    op.nl = nl;
    op.elems = elems;
    op.label = label;
    ops.push_back(op);
  };
  auto quantize = [&](std::size_t elems, const char* label) {
    if (!integer) return;
    LayerOp op;
    op.kind = OpKind::Quantize;
    op.elems = elems;
    op.label = label;
    ops.push_back(op);
  };
  auto gemm = [&](std::size_t gm, std::size_t gk, std::size_t gn, const char* label) {
    LayerOp op;
    op.kind = OpKind::Gemm;
    op.m = gm;
    op.k = gk;
    op.n = gn;
    op.w_bits = wb;
    op.a_bits = ab;
    op.label = label;
    ops.push_back(op);
  };
  auto wht = [&](std::size_t elems, std::size_t width, const char* label) {
    if (!rot) return;
    LayerOp op;
    op.kind = OpKind::OnlineWht;
    op.elems = elems;
    op.width = width;
    op.label = label;
    ops.push_back(op);
  };
  auto idct = [&](std::size_t elems, const char* label) {
    if (!dct) return;
    LayerOp op;
    op.kind = OpKind::Idct;
    op.elems = elems;
    op.width = 32;
    op.label = label;
    ops.push_back(op);
  };

  wht(T * C, C, "entry");
  for (LayerKind kind : spec.layer_order()) {
    if (kind == LayerKind::Mlp) {
      nonlinear(NlKind::LayerNorm, T * C, "mlp_ln");
      quantize(T * C, "fc1_in");
      gemm(T, C, H, "fc1");
      quantize(T * H, "fc1_out");
      idct(T * H, "fc1");
      nonlinear(NlKind::Gelu, T * H, "gelu");
      wht(T * H, H, "mlp");
      quantize(T * H, "fc2_in");
      gemm(T, H, C, "fc2");
      quantize(T * C, "fc2_out");
      idct(T * C, "fc2");
      nonlinear(NlKind::Residual, T * C, "mlp_res");
    } else {
      nonlinear(NlKind::LayerNorm, T * C, "attn_ln");
      quantize(T * C, "qkv_in");
      gemm(T, C, 3 * C, "qkv");
      quantize(T * 3 * C, "qkv_out");
      idct(T * 3 * C, "qkv");
      nonlinear(NlKind::Rope, 2 * T * C, "rope");
      wht(3 * T * C, dk, "heads");
      quantize(3 * T * C, "attn_in");
      LayerOp at;
      at.kind = OpKind::Attention;
      at.seqs = kind == LayerKind::FrameAttention ? spec.frames : 1;
      at.seq_len = kind == LayerKind::FrameAttention ? spec.tokens_per_frame : T;
      at.heads = spec.heads;
      at.head_dim = dk;
      at.a_bits = ab;
      at.label = kind == LayerKind::FrameAttention ? "frame_attn" : "global_attn";
      ops.push_back(at);
      quantize(T * C, "attn_out");
      quantize(T * C, "proj_in");
      gemm(T, C, C, "proj");
      quantize(T * C, "proj_out");
      idct(T * C, "proj");
      nonlinear(NlKind::Residual, T * C, "attn_res");
    }
  }
  wht(T * C, C, "exit");
  return ops;
}

}  // namespace vq3t
