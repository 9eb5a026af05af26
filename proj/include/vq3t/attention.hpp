#pragma once
// Multi-head attention: a 64-bit reference implementation, rotary position
// embedding, streaming softmax statistics, and a two-stage tiled attention
// that recomputes scores instead of caching them.
//
// The tiled path processes one Q-tile at a time. Stage one sweeps every
// K-tile, folds each tile's row maxima and exp-sums into running (m, sigma)
// statistics, and discards the scores. Stage two re-sweeps K in t_v-sized
// groups, recomputes each score tile, normalizes with the final statistics,
// and accumulates into the output tile, which is written exactly once. Only
// one t_q x t_k score tile is ever live, so the score buffer is O(t_q * t_k)
// no matter how long the sequence is.
//
// Q-tiles are independent (each owns its statistics and output rows), so the
// outer loop could run in parallel; the output does not depend on tile order.
// Everything here is serial by construction.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "vq3t/bf16.hpp"
#include "vq3t/hadamard.hpp"
#include "vq3t/matrix.hpp"
#include "vq3t/quant.hpp"

namespace vq3t {

struct AttentionConfig {
  std::size_t S = 1;           // frames
  std::size_t P = 1;           // tokens per frame
  std::size_t C = 64;          // channels
  std::size_t h = 1;           // heads
  std::size_t d_k = 64;        // per-head dim, C / h
  double rope_base = 10000.0;  // rotary frequency base
  double softmax_scale = 0.125;

  void validate() const {
    if (S * P < 1) throw std::invalid_argument("AttentionConfig: empty token grid");
    if (C != h * d_k) throw std::invalid_argument("AttentionConfig: C != h * d_k");
    if (!is_power_of_two(d_k))
      throw std::invalid_argument("AttentionConfig: d_k must be a power of two");
    if (softmax_scale != 1.0 / std::sqrt(double(d_k)))
      throw std::invalid_argument("AttentionConfig: softmax_scale != 1/sqrt(d_k)");
  }
};

inline AttentionConfig attention_config(std::size_t S, std::size_t P, std::size_t C,
                                        std::size_t h, double rope_base = 10000.0) {
  AttentionConfig cfg;
  cfg.S = S;
  cfg.P = P;
  cfg.C = C;
  cfg.h = h;
  if (h == 0 || C % h != 0) throw std::invalid_argument("attention_config: C not divisible by h");
  cfg.d_k = C / h;
  cfg.rope_base = rope_base;
  cfg.softmax_scale = 1.0 / std::sqrt(double(cfg.d_k));
  cfg.validate();
  return cfg;
}

struct TileConfig {
  std::size_t t_q = 64;
  std::size_t t_k = 64;
  std::size_t t_v = 2048;

  void validate() const {
    if (t_q == 0 || t_k == 0 || t_v == 0) throw std::invalid_argument("TileConfig: zero tile");
    if (t_v % t_k != 0)
      throw std::invalid_argument("TileConfig: t_v must be a multiple of t_k (" +
                                  std::to_string(t_v) + " % " + std::to_string(t_k) + ")");
  }
};

// Per-row running softmax statistics: m is the running max (starts at -inf),
// sigma the running exp-sum relative to m (starts at 0).
struct SoftmaxStats {
  std::vector<double> m;
  std::vector<double> sigma;

  explicit SoftmaxStats(std::size_t rows = 0)
      : m(rows, -std::numeric_limits<double>::infinity()), sigma(rows, 0.0) {}
};

// Fold one tile's per-row (max, exp-sum) into the running statistics:
//   m' = max(m, tile_max);  sigma' = sigma * e^(m - m') + tile_sum * e^(tile_max - m')
// Guards keep the -inf/0 initial state from producing NaN: a zero sum has no
// history to rescale.
inline void streaming_update(SoftmaxStats& stats, const std::vector<double>& tile_max,
                             const std::vector<double>& tile_sum) {
  if (tile_max.size() != stats.m.size() || tile_sum.size() != stats.m.size())
    throw std::invalid_argument("streaming_update: row count mismatch");
  for (std::size_t r = 0; r < stats.m.size(); ++r) {
    double mp = std::max(stats.m[r], tile_max[r]);
    double hist = stats.sigma[r] > 0.0 ? stats.sigma[r] * std::exp(stats.m[r] - mp) : 0.0;
    double fresh = tile_sum[r] > 0.0 ? tile_sum[r] * std::exp(tile_max[r] - mp) : 0.0;
    stats.m[r] = mp;
    stats.sigma[r] = hist + fresh;
  }
}

// Rotary position embedding on a head-split matrix (each d_k-wide column
// block is one head). Row index is the position; adjacent columns (2j, 2j+1)
// within a head form one rotated pair with angle t * base^(-2j/d_k).
inline DenseMatrix rope_apply(const DenseMatrix& x, const AttentionConfig& cfg) {
  if (cfg.d_k % 2 != 0) throw std::invalid_argument("rope_apply: d_k must be even");
  if (x.cols % cfg.d_k != 0)
    throw std::invalid_argument("rope_apply: columns not a multiple of d_k");
  DenseMatrix out = x;
  for (std::size_t t = 0; t < x.rows; ++t) {
    for (std::size_t h0 = 0; h0 < x.cols; h0 += cfg.d_k) {
      for (std::size_t j = 0; 2 * j < cfg.d_k; ++j) {
        double theta = double(t) * std::pow(cfg.rope_base, -2.0 * double(j) / double(cfg.d_k));
        double c = std::cos(theta), s = std::sin(theta);
        double a = x.at(t, h0 + 2 * j), b = x.at(t, h0 + 2 * j + 1);
        out.at(t, h0 + 2 * j) = a * c - b * s;
        out.at(t, h0 + 2 * j + 1) = a * s + b * c;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reference attention

struct MhaWeights {
  DenseMatrix wq, wk, wv, wproj;      // each C x C
  std::vector<double> bq, bk, bv, bproj;  // empty = no bias
};

namespace detail {

inline void add_bias(DenseMatrix& m, const std::vector<double>& b, const char* where) {
  if (b.empty()) return;
  if (b.size() != m.cols) throw std::invalid_argument(std::string(where) + ": bias length");
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) m.at(r, c) += b[c];
}

// Max-subtracted softmax over each row, in place. Scans ascending so the
// tiled path can reproduce the identical floating-point sequence.
inline void softmax_rows(DenseMatrix& s) {
  for (std::size_t r = 0; r < s.rows; ++r) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < s.cols; ++c) m = std::max(m, s.at(r, c));
    double sum = 0.0;
    for (std::size_t c = 0; c < s.cols; ++c) {
      double e = std::exp(s.at(r, c) - m);
      s.at(r, c) = e;
      sum += e;
    }
    for (std::size_t c = 0; c < s.cols; ++c) s.at(r, c) /= sum;
  }
}

}  // namespace detail

// softmax(Q K^T / sqrt(d_k)) V per head on head-split inputs; no projection.
inline DenseMatrix attention_core(const DenseMatrix& q, const DenseMatrix& k,
                                  const DenseMatrix& v, const AttentionConfig& cfg) {
  if (!q.same_shape(k) || !q.same_shape(v))
    throw std::invalid_argument("attention_core: Q/K/V shapes disagree");
  if (q.cols != cfg.C) throw std::invalid_argument("attention_core: columns != C");
  DenseMatrix out(q.rows, q.cols);
  for (std::size_t head = 0; head < cfg.h; ++head) {
    std::size_t c0 = head * cfg.d_k;
    DenseMatrix qh = col_block(q, c0, c0 + cfg.d_k);
    DenseMatrix kh = col_block(k, c0, c0 + cfg.d_k);
    DenseMatrix vh = col_block(v, c0, c0 + cfg.d_k);
    DenseMatrix s = scale(matmul(qh, transpose(kh)), cfg.softmax_scale);
    detail::softmax_rows(s);
    set_col_block(out, c0, matmul(s, vh));
  }
  return out;
}

// Full reference block: project, optionally RoPE Q and K, per-head softmax
// attention, concatenate, output projection. All arithmetic in f64.
inline DenseMatrix reference_mha(const DenseMatrix& x, const MhaWeights& w,
                                 const AttentionConfig& cfg, bool use_rope = false) {
  cfg.validate();
  if (x.cols != cfg.C) throw std::invalid_argument("reference_mha: x columns != C");
  DenseMatrix q = matmul(x, w.wq);
  DenseMatrix k = matmul(x, w.wk);
  DenseMatrix v = matmul(x, w.wv);
  detail::add_bias(q, w.bq, "reference_mha");
  detail::add_bias(k, w.bk, "reference_mha");
  detail::add_bias(v, w.bv, "reference_mha");
  if (use_rope) {
    q = rope_apply(q, cfg);
    k = rope_apply(k, cfg);
  }
  DenseMatrix o = matmul(attention_core(q, k, v, cfg), w.wproj);
  detail::add_bias(o, w.bproj, "reference_mha");
  return o;
}

// ---------------------------------------------------------------------------
// Tiled attention

// Counters filled by tiled_attention for the buffer-footprint and write-once
// assertions. prob_row_sums accumulates the normalized probabilities actually
// multiplied into V (one entry per Q row, summed over all K).
struct TilingStats {
  std::size_t peak_score_rows = 0;
  std::size_t peak_score_entries = 0;
  std::size_t score_tiles = 0;  // tile GEMMs, stage-two recomputation included
  std::vector<std::size_t> o_row_writes;
  bool o_rows_in_order = true;
  std::vector<double> prob_row_sums;
};

enum class SoftmaxPrecision { F64, Bf16 };

namespace detail {

struct TileRange {
  std::size_t begin, end;
  std::size_t size() const { return end - begin; }
};

inline std::vector<TileRange> tile_ranges(std::size_t n, std::size_t tile) {
  std::vector<TileRange> out;
  for (std::size_t b = 0; b < n; b += tile) out.push_back({b, std::min(b + tile, n)});
  return out;
}

// One head's score tile Q_i K_j^T * scale in f64.
inline DenseMatrix score_tile_f64(const DenseMatrix& q, const DenseMatrix& k, std::size_t head0,
                                  std::size_t d_k, TileRange qi, TileRange kj, double sscale) {
  DenseMatrix s(qi.size(), kj.size());
  for (std::size_t r = 0; r < qi.size(); ++r)
    for (std::size_t c = 0; c < kj.size(); ++c) {
      double acc = 0.0;
      const double* qrow = q.row_ptr(qi.begin + r) + head0;
      const double* krow = k.row_ptr(kj.begin + c) + head0;
      for (std::size_t d = 0; d < d_k; ++d) acc += qrow[d] * krow[d];
      s.at(r, c) = acc * sscale;
    }
  return s;
}

// Same tile on integer codes, dequantized with the per-tensor scales.
inline DenseMatrix score_tile_int(const QuantTensor& q, const QuantTensor& k, std::size_t head0,
                                  std::size_t d_k, TileRange qi, TileRange kj, double sscale) {
  DenseMatrix s(qi.size(), kj.size());
  const double deq = q.scales[0] * k.scales[0] * sscale;
  for (std::size_t r = 0; r < qi.size(); ++r)
    for (std::size_t c = 0; c < kj.size(); ++c) {
      int32_t acc = 0;
      const int8_t* qrow = q.codes.data() + (qi.begin + r) * q.cols + head0;
      const int8_t* krow = k.codes.data() + (kj.begin + c) * k.cols + head0;
      for (std::size_t d = 0; d < d_k; ++d) acc += int32_t(qrow[d]) * int32_t(krow[d]);
      s.at(r, c) = double(acc) * deq;
    }
  return s;
}

struct TiledKernelInputs {
  const DenseMatrix* qf = nullptr;  // exactly one family set: dense or codes
  const DenseMatrix* kf = nullptr;
  const DenseMatrix* vf = nullptr;
  const QuantTensor* qq = nullptr;
  const QuantTensor* kq = nullptr;
  const QuantTensor* vq = nullptr;
  int prob_bits = 0;  // 0 = keep probabilities in floating point
};

// Two-stage kernel shared by the f64 and integer entry points. Scores are
// recomputed in stage two instead of cached; per (Q-tile, head) only one
// score tile is live.
inline DenseMatrix tiled_attention_kernel(const TiledKernelInputs& in, std::size_t n_rows,
                                          const AttentionConfig& cfg, const TileConfig& tiles,
                                          SoftmaxPrecision sp, TilingStats* ts) {
  cfg.validate();
  tiles.validate();
  const bool bf = sp == SoftmaxPrecision::Bf16;
  auto rnd = [bf](double x) { return bf ? bf16_value(x) : x; };

  if (ts) {
    *ts = TilingStats{};
    ts->o_row_writes.assign(n_rows, 0);
    ts->prob_row_sums.assign(n_rows, 0.0);
  }

  DenseMatrix out(n_rows, cfg.C);
  auto q_tiles = tile_ranges(n_rows, tiles.t_q);
  auto k_tiles = tile_ranges(n_rows, tiles.t_k);
  std::size_t last_written = 0;

  for (const TileRange& qi : q_tiles) {
    DenseMatrix otile(qi.size(), cfg.C);
    for (std::size_t head = 0; head < cfg.h; ++head) {
      const std::size_t head0 = head * cfg.d_k;
      auto score = [&](const TileRange& kj) {
        if (ts) {
          ts->score_tiles += 1;
          ts->peak_score_rows = std::max(ts->peak_score_rows, qi.size());
          ts->peak_score_entries = std::max(ts->peak_score_entries, qi.size() * kj.size());
        }
        DenseMatrix s = in.qf ? score_tile_f64(*in.qf, *in.kf, head0, cfg.d_k, qi, kj,
                                               cfg.softmax_scale)
                              : score_tile_int(*in.qq, *in.kq, head0, cfg.d_k, qi, kj,
                                               cfg.softmax_scale);
        if (bf)
          for (double& v : s.data) v = bf16_value(v);
        return s;
      };

      // Stage one: streaming statistics over every K-tile; scores discarded.
      SoftmaxStats stats(qi.size());
      for (const TileRange& kj : k_tiles) {
        DenseMatrix s = score(kj);
        std::vector<double> tmax(qi.size(), -std::numeric_limits<double>::infinity());
        std::vector<double> tsum(qi.size(), 0.0);
        for (std::size_t r = 0; r < qi.size(); ++r) {
          for (std::size_t c = 0; c < kj.size(); ++c) tmax[r] = std::max(tmax[r], s.at(r, c));
          for (std::size_t c = 0; c < kj.size(); ++c)
            tsum[r] = rnd(tsum[r] + rnd(std::exp(rnd(s.at(r, c) - tmax[r]))));
        }
        if (bf) {
          SoftmaxStats next = stats;
          for (std::size_t r = 0; r < qi.size(); ++r) {
            double mp = std::max(next.m[r], tmax[r]);
            double hist =
                next.sigma[r] > 0.0 ? rnd(next.sigma[r] * rnd(std::exp(rnd(next.m[r] - mp)))) : 0.0;
            double fresh = tsum[r] > 0.0 ? rnd(tsum[r] * rnd(std::exp(rnd(tmax[r] - mp)))) : 0.0;
            next.m[r] = mp;
            next.sigma[r] = rnd(hist + fresh);
          }
          stats = next;
        } else {
          streaming_update(stats, tmax, tsum);
        }
      }

      // Stage two: re-sweep K in t_v-row groups, recompute scores, normalize
      // with the final statistics, requantize if integer, accumulate O.
      DenseMatrix oacc(qi.size(), cfg.d_k);
      for (std::size_t v0 = 0; v0 < n_rows; v0 += tiles.t_v) {
        std::size_t v1 = std::min(v0 + tiles.t_v, n_rows);
        for (std::size_t m0 = v0; m0 < v1; m0 += tiles.t_k) {
          TileRange kj{m0, std::min(m0 + tiles.t_k, v1)};
          DenseMatrix p = score(kj);
          for (std::size_t r = 0; r < qi.size(); ++r)
            for (std::size_t c = 0; c < kj.size(); ++c)
              p.at(r, c) = rnd(rnd(std::exp(rnd(p.at(r, c) - stats.m[r]))) / stats.sigma[r]);
          if (ts)
            for (std::size_t r = 0; r < qi.size(); ++r)
              for (std::size_t c = 0; c < kj.size(); ++c) ts->prob_row_sums[qi.begin + r] += p.at(r, c);

          if (in.prob_bits > 0) {
            QuantTensor pq = rtn_quantize(p, in.prob_bits, QuantGranularity::PerTensor);
            const double deq = pq.scales[0] * in.vq->scales[0];
            for (std::size_t r = 0; r < qi.size(); ++r)
              for (std::size_t d = 0; d < cfg.d_k; ++d) {
                int32_t acc = 0;
                for (std::size_t c = 0; c < kj.size(); ++c)
                  acc += int32_t(pq.codes[r * pq.cols + c]) *
                         int32_t(in.vq->codes[(kj.begin + c) * in.vq->cols + head0 + d]);
                oacc.at(r, d) += double(acc) * deq;
              }
          } else {
            const DenseMatrix& vsrc = *in.vf;
            for (std::size_t r = 0; r < qi.size(); ++r)
              for (std::size_t c = 0; c < kj.size(); ++c) {
                double prc = p.at(r, c);
                if (prc == 0.0) continue;
                const double* vrow = vsrc.row_ptr(kj.begin + c) + head0;
                for (std::size_t d = 0; d < cfg.d_k; ++d) oacc.at(r, d) += prc * vrow[d];
              }
          }
        }
      }
      set_col_block(otile, head0, oacc);
    }

    if (ts) {
      if (qi.begin < last_written) ts->o_rows_in_order = false;
      for (std::size_t r = qi.begin; r < qi.end; ++r) ts->o_row_writes[r] += 1;
      last_written = qi.end;
    }
    set_row_block(out, qi.begin, otile);
  }
  return out;
}

}  // namespace detail

// f64 tiled attention on head-split dense Q/K/V.
inline DenseMatrix tiled_attention(const DenseMatrix& q, const DenseMatrix& k,
                                   const DenseMatrix& v, const AttentionConfig& cfg,
                                   const TileConfig& tiles, TilingStats* ts = nullptr,
                                   SoftmaxPrecision sp = SoftmaxPrecision::F64) {
  if (!q.same_shape(k) || !q.same_shape(v))
    throw std::invalid_argument("tiled_attention: Q/K/V shapes disagree");
  if (q.cols != cfg.C) throw std::invalid_argument("tiled_attention: columns != C");
  detail::TiledKernelInputs in;
  in.qf = &q;
  in.kf = &k;
  in.vf = &v;
  return detail::tiled_attention_kernel(in, q.rows, cfg, tiles, sp, ts);
}

// Integer-mode tiled attention: Q/K/V are per-tensor quantized at the
// activation width of `mode`; scores are integer GEMMs dequantized on the
// fly, probabilities are requantized per tile with a dynamic scale (they are
// bounded by [0,1]), and P*V is again an integer GEMM. Probabilities stay at
// 8 bits in every integer mode: they are range-bounded softmax outputs, and
// the P*V product runs INT8 x INT4 on the fused PEs, so narrowing them with
// the activation width would only throw away attention fidelity. `prob_bits`
// overrides that width when nonzero.
inline DenseMatrix tiled_attention(const QuantTensor& q, const QuantTensor& k,
                                   const QuantTensor& v, const AttentionConfig& cfg,
                                   const TileConfig& tiles, PrecisionMode mode,
                                   TilingStats* ts = nullptr,
                                   SoftmaxPrecision sp = SoftmaxPrecision::F64,
                                   int prob_bits = 0) {
  if (q.rows != k.rows || q.rows != v.rows || q.cols != cfg.C || k.cols != cfg.C ||
      v.cols != cfg.C)
    throw std::invalid_argument("tiled_attention: quantized Q/K/V shapes disagree");
  if (q.granularity != QuantGranularity::PerTensor || k.granularity != QuantGranularity::PerTensor ||
      v.granularity != QuantGranularity::PerTensor)
    throw std::invalid_argument("tiled_attention: integer path needs per-tensor scales");
  if (mode == PrecisionMode::Bf16)
    throw std::invalid_argument("tiled_attention: integer path called in bf16 mode");
  detail::TiledKernelInputs in;
  in.qq = &q;
  in.kq = &k;
  in.vq = &v;
  in.prob_bits = prob_bits > 0 ? prob_bits : 8;
  return detail::tiled_attention_kernel(in, q.rows, cfg, tiles, sp, ts);
}

// ---------------------------------------------------------------------------
// Token layout

enum class LayoutMode { Global, FrameWise };

struct TokenLayout {
  LayoutMode mode = LayoutMode::Global;
  std::size_t S = 1, P = 1, C = 1;
};

// Frames are contiguous row blocks of the (S*P) x C matrix, so both layouts
// share one storage arrangement; relayout validates compatibility and the
// data passes through untouched. Frame s of a FrameWise view is rows
// [s*P, (s+1)*P).
inline DenseMatrix relayout(const DenseMatrix& x, const TokenLayout& from, const TokenLayout& to) {
  if (from.S * from.P != to.S * to.P || from.C != to.C)
    throw std::invalid_argument("relayout: incompatible layouts");
  if (x.rows != from.S * from.P || x.cols != from.C)
    throw std::invalid_argument("relayout: matrix does not match source layout");
  return x;
}

}  // namespace vq3t
