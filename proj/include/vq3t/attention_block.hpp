#pragma once
// One attention block wired for offline-fused weights, in four stages:
//
//   1. integer GEMM with the fused QKV weight (LayerNorm gamma and the
//      input-side Hadamard baked in, output-side DCT for versaq)
//   2. on-chip IDCT, bias add, dequantize, RoPE on Q and K, per-head
//      Hadamard on Q, K and V, requantize
//   3. tiled attention on the head-rotated tensors (rotations on Q and K
//      cancel inside Q K^T; V's rotation is cancelled by the projection)
//   4. integer GEMM with the fused projection weight (inverse head-Hadamard,
//      LayerScale and the channel Hadamard baked in, DCT for versaq), IDCT,
//      rotated-domain bias
//
// The input is the normalized activation in the method's own domain (rotated
// for wht/versaq, plain for rtn) and the output lands in that same domain,
// so residual adds never leave it. In Bf16 mode the GEMMs run on the dense
// fused weights with no integer quantization, which makes the degenerate
// configuration (rtn method, f64 nonlinears) bit-identical to reference_mha.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "vq3t/attention.hpp"
#include "vq3t/dct.hpp"
#include "vq3t/fusion.hpp"
#include "vq3t/matrix.hpp"
#include "vq3t/quant.hpp"

namespace vq3t {

struct AttentionBlockParams {
  MhaWeights w;                    // plain C x C weights and optional biases
  std::vector<double> gamma;       // pre-attention LayerNorm scale; empty = ones
  std::vector<double> beta;        // pre-attention LayerNorm shift; empty = zeros
  std::vector<double> layerscale;  // per-channel scale on the projection output
  double eps = 1e-6;
};

struct PreparedAttention {
  QuantMethod method = QuantMethod::Rtn;
  AttentionConfig cfg;
  DenseMatrix wqkv_fused;  // C x 3C, dense path
  QuantTensor wqkv_q;      // same, per-output-channel quantized
  std::vector<double> bias_qkv;  // plain domain, added after the stage-1 IDCT
  DctMatrix dct_qkv;             // order 3C (versaq only)
  DenseMatrix wproj_fused;
  QuantTensor wproj_q;
  std::vector<double> bias_proj;  // output domain, added after the stage-4 IDCT
  DctMatrix dct_out;              // order C (versaq only)
};

namespace detail {

inline DenseMatrix hconcat3(const DenseMatrix& a, const DenseMatrix& b, const DenseMatrix& c) {
  if (a.rows != b.rows || a.rows != c.rows)
    throw std::invalid_argument("hconcat3: row counts disagree");
  DenseMatrix out(a.rows, a.cols + b.cols + c.cols);
  set_col_block(out, 0, a);
  set_col_block(out, a.cols, b);
  set_col_block(out, a.cols + b.cols, c);
  return out;
}

inline void append_or_zeros(std::vector<double>& dst, const std::vector<double>& src,
                            std::size_t n) {
  if (src.empty()) {
    dst.insert(dst.end(), n, 0.0);
  } else {
    if (src.size() != n) throw std::invalid_argument("attention block: bias length");
    dst.insert(dst.end(), src.begin(), src.end());
  }
}

inline void round_bf16_inplace(DenseMatrix& m) {
  for (double& v : m.data) v = bf16_value(v);
}

}  // namespace detail

inline PreparedAttention prepare_attention_block(const AttentionBlockParams& p,
                                                 const AttentionConfig& cfg, QuantMethod method,
                                                 int wbits = 4) {
  cfg.validate();
  const std::size_t C = cfg.C;
  if (p.w.wq.rows != C || p.w.wq.cols != C || !p.w.wq.same_shape(p.w.wk) ||
      !p.w.wq.same_shape(p.w.wv) || !p.w.wq.same_shape(p.w.wproj))
    throw std::invalid_argument("prepare_attention_block: weights must all be C x C");

  PreparedAttention pa;
  pa.method = method;
  pa.cfg = cfg;

  DenseMatrix wqkv = detail::hconcat3(p.w.wq, p.w.wk, p.w.wv);
  std::vector<double> bias3;
  detail::append_or_zeros(bias3, p.w.bq, C);
  detail::append_or_zeros(bias3, p.w.bk, C);
  detail::append_or_zeros(bias3, p.w.bv, C);

  FusionParams fp_qkv;
  fp_qkv.gamma = p.gamma;
  fp_qkv.beta = p.beta;
  fp_qkv.eps = p.eps;
  TransformPack tp_qkv;
  tp_qkv.in_order = C;  // whole-channel Hadamard on the residual stream
  if (method == QuantMethod::VersaQ) {
    pa.dct_qkv = block_diagonal_dct(3 * C, 32, DctVariant::Orthonormal);
    tp_qkv.dct = pa.dct_qkv;
  }
  pa.wqkv_fused = fuse_weights(wqkv, fp_qkv, method, tp_qkv);
  pa.bias_qkv = fuse_bias(wqkv, fp_qkv, tp_qkv, &bias3);
  pa.wqkv_q = rtn_quantize(pa.wqkv_fused, wbits, QuantGranularity::PerChannel);

  FusionParams fp_proj;
  fp_proj.layerscale = p.layerscale;
  TransformPack tp_proj;
  tp_proj.in_order = C;
  tp_proj.in_block = cfg.d_k;  // the attention output is rotated per head
  tp_proj.rotate_output = method != QuantMethod::Rtn;
  if (method == QuantMethod::VersaQ) {
    pa.dct_out = block_diagonal_dct(C, 32, DctVariant::Orthonormal);
    tp_proj.dct = pa.dct_out;
  }
  pa.wproj_fused = fuse_weights(p.w.wproj, fp_proj, method, tp_proj);
  pa.bias_proj = fuse_bias(p.w.wproj, fp_proj, tp_proj,
                           p.w.bproj.empty() ? nullptr : &p.w.bproj);
  pa.wproj_q = rtn_quantize(pa.wproj_fused, wbits, QuantGranularity::PerChannel);
  return pa;
}

// Runs the four stages on a normalized input in the method's domain and
// returns the block output in that domain (dense; the caller owns residual
// adds and any requantization hand-off). PrecisionMode::Bf16 bypasses integer
// quantization entirely; `nl` selects f64-oracle or bf16-emulated arithmetic
// for the nonlinear steps (RoPE, online Hadamard, softmax). A nonzero
// `act_bits_override` replaces the mode's activation width (bit-width sweeps).
inline DenseMatrix quantized_attention_block(const DenseMatrix& x_in, const PreparedAttention& pa,
                                             const TileConfig& tiles, PrecisionMode mode,
                                             SoftmaxPrecision nl = SoftmaxPrecision::F64,
                                             TilingStats* ts = nullptr, int act_bits_override = 0) {
  const AttentionConfig& cfg = pa.cfg;
  if (x_in.cols != cfg.C) throw std::invalid_argument("quantized_attention_block: columns != C");
  const bool integer = mode != PrecisionMode::Bf16;
  const bool bf = nl == SoftmaxPrecision::Bf16;
  const int abits = act_bits_override > 0 ? act_bits_override : act_bits(mode);

  // Stage 1: QKV GEMM in the fused basis, IDCT back, bias.
  DenseMatrix y;
  if (integer) {
    QuantTensor xq = rtn_quantize(x_in, abits, QuantGranularity::PerTensor);
    y = int_matmul_dequant(xq, pa.wqkv_q);
  } else {
    y = matmul(x_in, pa.wqkv_fused);
  }
  if (pa.method == QuantMethod::VersaQ) y = apply_idct(y, pa.dct_qkv, Axis::Rows);
  for (std::size_t r = 0; r < y.rows; ++r)
    for (std::size_t c = 0; c < y.cols; ++c) y.at(r, c) += pa.bias_qkv[c];
  if (bf) detail::round_bf16_inplace(y);

  // Stage 2: split, RoPE on Q/K, per-head Hadamard on Q/K/V.
  DenseMatrix q = col_block(y, 0, cfg.C);
  DenseMatrix k = col_block(y, cfg.C, 2 * cfg.C);
  DenseMatrix v = col_block(y, 2 * cfg.C, 3 * cfg.C);
  q = rope_apply(q, cfg);
  k = rope_apply(k, cfg);
  if (pa.method != QuantMethod::Rtn) {
    q = apply_wht_per_head(q, cfg.d_k);
    k = apply_wht_per_head(k, cfg.d_k);
    v = apply_wht_per_head(v, cfg.d_k);
  }
  if (bf) {
    detail::round_bf16_inplace(q);
    detail::round_bf16_inplace(k);
    detail::round_bf16_inplace(v);
  }

  // Stage 3: tiled attention, requantized in integer modes.
  DenseMatrix o;
  if (integer) {
    QuantTensor qq = rtn_quantize(q, abits, QuantGranularity::PerTensor);
    QuantTensor kq = rtn_quantize(k, abits, QuantGranularity::PerTensor);
    QuantTensor vq = rtn_quantize(v, abits, QuantGranularity::PerTensor);
    o = tiled_attention(qq, kq, vq, cfg, tiles, mode, ts, nl);
  } else {
    o = tiled_attention(q, k, v, cfg, tiles, ts, nl);
  }
  if (bf) detail::round_bf16_inplace(o);

  // Stage 4: projection in the fused basis, IDCT, rotated-domain bias.
  DenseMatrix z;
  if (integer) {
    QuantTensor oq = rtn_quantize(o, abits, QuantGranularity::PerTensor);
    z = int_matmul_dequant(oq, pa.wproj_q);
  } else {
    z = matmul(o, pa.wproj_fused);
  }
  if (pa.method == QuantMethod::VersaQ) z = apply_idct(z, pa.dct_out, Axis::Rows);
  for (std::size_t r = 0; r < z.rows; ++r)
    for (std::size_t c = 0; c < z.cols; ++c) z.at(r, c) += pa.bias_proj[c];
  if (bf) detail::round_bf16_inplace(z);
  return z;
}

}  // namespace vq3t
