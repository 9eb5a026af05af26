#pragma once
// Offline weight preparation. A linear layer y = LN(x) * diag(gamma) * w that
// runs on rotated activations x_rot = x * H gets its weights rewritten so the
// on-chip GEMM needs no extra transforms:
//
//   Rtn:     quantize( diag(gamma) * w )
//   WhtOnly: quantize( Hin^T * diag(gamma) * w )
//   VersaQ:  quantize( Hin^T * diag(gamma) * w * D^T )
//
// Hin is the input-side Hadamard (block-diagonal per head when the input is
// head-rotated), D the output-side DCT whose inverse runs on chip right after
// the GEMM. Layers that feed the rotated residual stream additionally fold a
// LayerScale diag(lambda) and the channel Hadamard into the output side, so
// the GEMM result is already in the rotated domain.
//
// LayerNorm's beta bypasses gamma and is absorbed as bias_final = beta * w
// (pushed through the same output-side scaling/rotation, never through the
// DCT: the bias is added after the on-chip IDCT).

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "vq3t/dct.hpp"
#include "vq3t/hadamard.hpp"
#include "vq3t/matrix.hpp"
#include "vq3t/quant.hpp"

namespace vq3t {

enum class QuantMethod { Rtn, WhtOnly, VersaQ };

inline const char* method_name(QuantMethod m) {
  switch (m) {
    case QuantMethod::Rtn: return "rtn";
    case QuantMethod::WhtOnly: return "wht";
    case QuantMethod::VersaQ: return "versaq";
  }
  return "?";
}

struct FusionParams {
  std::vector<double> gamma;       // LayerNorm scale, per input channel; empty = ones
  std::vector<double> beta;        // LayerNorm shift, per input channel; empty = zeros
  std::vector<double> layerscale;  // per output channel; empty = ones
  double eps = 1e-6;
};

struct TransformPack {
  std::size_t in_order = 0;    // input-side Hadamard order; must equal w.rows
  std::size_t in_block = 0;    // butterfly block (head_dim when the input is
                               // per-head rotated); 0 means in_order
  bool rotate_output = false;  // fold the channel Hadamard into the output side
                               // (layers whose result re-enters the rotated
                               // residual stream)
  DctMatrix dct;               // output-side DCT, order == w.cols; used by VersaQ
};

struct PreparedWeight {
  QuantTensor w_final;              // per-output-channel quantized fused weight
  std::vector<double> bias_final;   // added after the on-chip IDCT
  QuantMethod method = QuantMethod::Rtn;
};

namespace detail {
inline void check_fusion_shapes(const DenseMatrix& w, const FusionParams& fp,
                                QuantMethod method, const TransformPack& tp,
                                const std::vector<double>* bias) {
  if (w.rows == 0 || w.cols == 0)
    throw std::invalid_argument("prepare_weights: empty weight matrix");
  if (!fp.gamma.empty() && fp.gamma.size() != w.rows)
    throw std::invalid_argument("prepare_weights: gamma length does not match input channels");
  if (!fp.beta.empty() && fp.beta.size() != w.rows)
    throw std::invalid_argument("prepare_weights: beta length does not match input channels");
  if (!fp.layerscale.empty() && fp.layerscale.size() != w.cols)
    throw std::invalid_argument("prepare_weights: layerscale length does not match output channels");
  if (bias && bias->size() != w.cols)
    throw std::invalid_argument("prepare_weights: bias length does not match output channels");
  if (method != QuantMethod::Rtn && tp.in_order != w.rows)
    throw std::invalid_argument("prepare_weights: transform order " +
                                std::to_string(tp.in_order) + " vs " +
                                std::to_string(w.rows) + " input channels");
  if (method == QuantMethod::VersaQ && tp.dct.order != w.cols)
    throw std::invalid_argument("prepare_weights: DCT order does not match output channels");
}
}  // namespace detail

// The real-valued fused weight, before quantization.
inline DenseMatrix fuse_weights(const DenseMatrix& w, const FusionParams& fp,
                                QuantMethod method, const TransformPack& tp) {
  detail::check_fusion_shapes(w, fp, method, tp, nullptr);
  DenseMatrix m = fp.gamma.empty() ? w : diag_scale_rows(fp.gamma, w);
  if (!fp.layerscale.empty()) m = diag_scale_cols(m, fp.layerscale);
  if (tp.rotate_output) m = apply_wht(m, Axis::Rows);  // m * H on output channels
  if (method != QuantMethod::Rtn) {
    std::size_t blk = tp.in_block == 0 ? tp.in_order : tp.in_block;
    m = apply_wht_per_head(m, blk, Axis::Cols);  // Hin^T * m (Hin symmetric)
  }
  if (method == QuantMethod::VersaQ) m = apply_dct(m, tp.dct, Axis::Rows);  // m * D^T
  return m;
}

// beta * w plus the layer's own bias, in the basis the on-chip IDCT restores:
// scaled and output-rotated like the weights, never DCT-transformed.
inline std::vector<double> fuse_bias(const DenseMatrix& w, const FusionParams& fp,
                                     const TransformPack& tp,
                                     const std::vector<double>* bias = nullptr) {
  DenseMatrix bw(1, w.cols);
  if (!fp.beta.empty()) {
    for (std::size_t c = 0; c < w.cols; ++c) {
      double s = 0.0;
      for (std::size_t r = 0; r < w.rows; ++r) s += fp.beta[r] * w.at(r, c);
      bw.at(0, c) = s;
    }
  }
  if (bias)
    for (std::size_t c = 0; c < w.cols; ++c) bw.at(0, c) += (*bias)[c];
  if (!fp.layerscale.empty()) bw = diag_scale_cols(bw, fp.layerscale);
  if (tp.rotate_output) bw = apply_wht(bw, Axis::Rows);
  return std::vector<double>(bw.data.begin(), bw.data.end());
}

inline PreparedWeight prepare_weights(const DenseMatrix& w, const FusionParams& fp,
                                      QuantMethod method, int bit_width,
                                      const TransformPack& tp,
                                      const std::vector<double>* bias = nullptr) {
  detail::check_fusion_shapes(w, fp, method, tp, bias);
  PreparedWeight out;
  out.method = method;
  out.w_final = rtn_quantize(fuse_weights(w, fp, method, tp), bit_width,
                             QuantGranularity::PerChannel);
  out.bias_final = fuse_bias(w, fp, tp, bias);
  return out;
}

// LayerNorm statistics recovered from rotated coordinates. For x_rot = x * H
// with C channels, coefficient 0 is sum(x)/sqrt(C) and the rotation preserves
// the row norm, so mean and population variance of the original row are
// available without leaving the rotated domain.
struct LnStats {
  std::vector<double> mean;
  std::vector<double> var;
  std::vector<double> inv_std;  // 1 / sqrt(var + eps), what the datapath uses
};

inline LnStats fold_ln_stats_rotated(const DenseMatrix& x_rot, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("fold_ln_stats_rotated: eps must be > 0");
  const double c = double(x_rot.cols);
  const double sqrt_c = std::sqrt(c);
  LnStats s;
  s.mean.resize(x_rot.rows);
  s.var.resize(x_rot.rows);
  s.inv_std.resize(x_rot.rows);
  for (std::size_t r = 0; r < x_rot.rows; ++r) {
    double mean = x_rot.at(r, 0) / sqrt_c;
    double norm2 = 0.0;
    for (std::size_t j = 0; j < x_rot.cols; ++j) norm2 += x_rot.at(r, j) * x_rot.at(r, j);
    double var = norm2 / c - mean * mean;
    if (var < 0.0) var = 0.0;  // guard fp cancellation on near-constant rows
    s.mean[r] = mean;
    s.var[r] = var;
    s.inv_std[r] = 1.0 / std::sqrt(var + eps);
  }
  return s;
}

// Normalize in the rotated domain: subtracting the per-row mean only touches
// coefficient 0 (the all-ones direction), scaling touches everything.
inline DenseMatrix rotated_layernorm(const DenseMatrix& x_rot, double eps) {
  LnStats s = fold_ln_stats_rotated(x_rot, eps);
  const double sqrt_c = std::sqrt(double(x_rot.cols));
  DenseMatrix out = x_rot;
  for (std::size_t r = 0; r < x_rot.rows; ++r) {
    out.at(r, 0) -= s.mean[r] * sqrt_c;
    for (std::size_t j = 0; j < x_rot.cols; ++j) out.at(r, j) *= s.inv_std[r];
  }
  return out;
}

}  // namespace vq3t
