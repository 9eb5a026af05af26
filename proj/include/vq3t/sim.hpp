#pragma once
// Analytic cycle and energy model of the accelerator. Every operation
// lowers to a short list of stream chunks, each carrying DRAM load cycles
// and fabric compute cycles, and a two-resource pipeline replays the chunk
// list: the DRAM channel streams chunks in order, the fabric computes them
// in order, and a chunk's compute starts once both its stream has landed
// and the fabric is free. Weight streams are ping-pong buffered, so a chunk
// may prefetch while the previous one computes, but no deeper; the first
// load of a stream is always exposed.
//
// The fabric is one reconfigurable array, so integer GEMMs, BFU vector work
// and quantization-unit conversions serialize on a single compute timeline.
// Per mode the GEMM engine is the 4-bit array (4-bit activations), the
// fused 8-bit array (8-bit activations), or the BFU grid driven as a SIMD
// vector unit (bf16). Systolic GEMM cost is
//
//   fill + ceil(M/P_r) * ceil(N/P_c) * K + writeback
//
// with fill = P_r + P_c - 2 (4 cycles of pipeline fill for the SIMD case)
// and writeback = ceil(M*N*out_bytes / bandwidth). One bandwidth knob
// covers weight streaming and writeback. Weights stream one resident tile
// at a time: each column pass of width P_c covers K rows in P_r-deep
// slabs, plus one bf16 scale per output channel in the integer modes; a
// slab that exceeds one ping-pong half is flagged infeasible.
//
// Nonlinear work runs on the BFUs at documented per-element op counts
// (LayerNorm 4, GELU 8, RoPE 3, residual 1, exponential `exp_bfu_ops`).
// Quantize/dequantize steps run on the QU at `qu_values_per_cycle`.
// Components draw power only while active; DRAM energy is charged per bit
// streamed. Activations move between the on-chip buffers, so DRAM traffic
// is weight traffic, except for the cache-all-scores attention baseline
// which spills score rows to DRAM when they outgrow the output buffer.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "vq3t/attention.hpp"
#include "vq3t/hwcfg.hpp"
#include "vq3t/pe.hpp"
#include "vq3t/pipeline.hpp"

namespace vq3t {

inline constexpr int kLayerNormOpsPerElem = 4;
inline constexpr int kGeluOpsPerElem = 8;
inline constexpr int kRopeOpsPerElem = 3;
inline constexpr int kResidualOpsPerElem = 1;
// Streaming-softmax statistics touch each score with two multiplies and an
// add around the exponential; the second pass renormalizes with an add and
// a multiply around another exponential.
inline constexpr int kSoftmaxStatsOpsPerScore = 3;
inline constexpr int kSoftmaxNormOpsPerScore = 2;
// Dequantized score tiles buffer in bf16.
inline constexpr int kScoreBytes = 2;

struct SimPhases {
  std::int64_t weight_load = 0;   // DRAM-channel busy cycles
  std::int64_t compute_int = 0;   // integer array + QU busy cycles
  std::int64_t compute_bf16 = 0;  // BFU busy cycles
  std::int64_t dram_stall = 0;    // fabric idle or spilling, waiting on DRAM
};

struct SimEnergy {
  double bfu_array = 0, qu = 0, weight_buf = 0, input_buf = 0,
         output_buf = 0, dram = 0;
  double total() const {
    return bfu_array + qu + weight_buf + input_buf + output_buf + dram;
  }
};

struct SimPeaks {
  std::int64_t weight = 0, input = 0, output = 0;
};

// Runtime split: exposed weight-load stall, attention work, everything
// else. The three add up to total_cycles.
struct SimBreakdown {
  std::int64_t weight_load = 0, attention = 0, other = 0;
};

struct SimReport {
  std::int64_t total_cycles = 0;
  SimPhases phases;
  SimEnergy energy;
  SimPeaks peak_bytes;
  SimBreakdown breakdown;
  double utilization = 0.0;  // useful lane-ops over provisioned lane-cycles
  bool feasible = true;
  std::vector<std::string> flags;
};

namespace simdetail {

enum class Engine { Int4, Int8, Bf16, Qu, Spill };

struct Chunk {
  std::int64_t load = 0;        // DRAM cycles to land this chunk
  std::int64_t load_bytes = 0;  // DRAM traffic
  std::int64_t compute = 0;     // fabric cycles once resident
  std::int64_t drain = 0;       // subset of compute on the writeback path
  Engine engine = Engine::Int4;
  bool weighted = false;  // reads the weight buffer while computing
  bool attention = false;
  std::int64_t useful = 0;  // MACs / element ops, for utilization
};

struct Schedule {
  std::vector<Chunk> chunks;
  SimPeaks peaks;
  std::vector<std::string> flags;
  bool feasible = true;
};

inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
  return (a + b - 1) / b;
}

inline std::int64_t dram_cycles(const HardwareConfig& hw, std::int64_t bytes) {
  if (bytes <= 0) return 0;
  return std::int64_t(std::ceil(double(bytes) / hw.dram_bytes_per_cycle));
}

struct ArrayShape {
  std::int64_t rows = 0, cols = 0, fill = 0, lanes = 0;
};

inline Engine gemm_engine(int a_bits) {
  if (a_bits <= 4) return Engine::Int4;
  if (a_bits <= 8) return Engine::Int8;
  return Engine::Bf16;
}

inline ArrayShape array_shape(const HardwareConfig& hw, Engine e) {
  ArrayShape s;
  switch (e) {
    case Engine::Int4:
      s = {hw.int4_rows, hw.int4_cols, hw.int4_rows + hw.int4_cols - 2, 0};
      break;
    case Engine::Int8:
      s = {hw.int8_rows, hw.int8_cols, hw.int8_rows + hw.int8_cols - 2, 0};
      break;
    default:
      s = {hw.bfu_rows, hw.bfu_cols, kBfuLatency, 0};
      break;
  }
  s.lanes = s.rows * s.cols;
  return s;
}

inline std::int64_t bfu_lanes(const HardwareConfig& hw) {
  return std::int64_t(hw.bfu_rows) * hw.bfu_cols;
}

inline void note_peak(std::int64_t& slot, std::int64_t bytes) {
  slot = std::max(slot, bytes);
}

inline void flag(Schedule& s, const std::string& msg) {
  s.feasible = false;
  s.flags.push_back(msg);
}

// Systolic/SIMD GEMM with streamed weights. `weight_label` empty means the
// operands are already on chip (attention tiles, generated transforms).
inline void lower_gemm(Schedule& s, const HardwareConfig& hw, std::int64_t M,
                       std::int64_t K, std::int64_t N, int w_bits, int a_bits,
                       const std::string& label, bool attention,
                       bool stream_weights, std::int64_t weight_bytes_override) {
  const Engine eng = gemm_engine(a_bits);
  const ArrayShape arr = array_shape(hw, eng);
  const bool integer = eng != Engine::Bf16;
  const int out_bits = integer ? a_bits : 16;
  const std::int64_t n_pass = ceil_div(N, arr.cols);
  const std::int64_t row_tiles = ceil_div(M, arr.rows);
  const std::int64_t drain =
      dram_cycles(hw, ceil_div(M * N * out_bits, 8));

  // Residency: activations stream in P_r-row segments sized to the input
  // half; the output tile must fit the output buffer whole.
  const std::int64_t in_seg_cols = std::max<std::int64_t>(
      1, std::min(K, (hw.input_buffer_bytes / 2) * 8 / (arr.rows * a_bits)));
  note_peak(s.peaks.input, ceil_div(arr.rows * in_seg_cols * a_bits, 8));
  const std::int64_t out_tile = ceil_div(arr.rows * arr.cols * out_bits, 8);
  note_peak(s.peaks.output, out_tile);
  if (out_tile > hw.output_buffer_bytes)
    flag(s, "output_buffer: result tile for " + label + " (" +
               std::to_string(out_tile) + " bytes) exceeds capacity");

  // Weights stream through the ping-pong halves one resident tile at a
  // time: P_r rows deep per array pass, so a column pass over K covers
  // ceil(K/P_r) slab loads. Per-channel scales ride with the first slab.
  const std::int64_t slab_rows =
      (stream_weights && weight_bytes_override < 0) ? arr.rows : K;
  for (std::int64_t p = 0; p < n_pass; ++p) {
    const std::int64_t width = std::min(arr.cols, N - p * arr.cols);
    const std::int64_t n_slab = ceil_div(K, slab_rows);
    for (std::int64_t sl = 0; sl < n_slab; ++sl) {
      const std::int64_t rows = std::min(slab_rows, K - sl * slab_rows);
      Chunk c;
      c.engine = eng;
      c.attention = attention;
      if (stream_weights) {
        std::int64_t bytes = ceil_div(rows * width * w_bits, 8) +
                             (integer && sl == 0 ? 2 * width : 0);
        if (weight_bytes_override >= 0) bytes = weight_bytes_override;
        c.load_bytes = bytes;
        c.load = dram_cycles(hw, bytes);
        c.weighted = true;
        note_peak(s.peaks.weight, bytes);
        if (bytes > hw.weight_buffer_bytes / 2)
          flag(s, "weight_buffer: stream tile for " + label + " (" +
                     std::to_string(bytes) +
                     " bytes) exceeds one ping-pong half");
      }
      c.compute = row_tiles * rows;
      if (p == 0 && sl == 0) c.compute += arr.fill;
      if (p == n_pass - 1 && sl == n_slab - 1) {
        c.compute += drain;
        c.drain = drain;
      }
      c.useful = M * rows * width;
      s.chunks.push_back(c);
    }
  }
}

inline void lower_gemm(Schedule& s, const HardwareConfig& hw, std::int64_t M,
                       std::int64_t K, std::int64_t N, int w_bits, int a_bits,
                       const std::string& label, bool attention = false) {
  lower_gemm(s, hw, M, K, N, w_bits, a_bits, label, attention,
             /*stream_weights=*/true, /*weight_bytes_override=*/-1);
}

// Online transform: GEMM timing at the transform's equivalent dims with no
// weight stream (the +-1 butterfly constants are generated in-array, so the
// weight buffer stays idle and unpowered).
inline void lower_wht(Schedule& s, const HardwareConfig& hw,
                      std::int64_t elems, std::int64_t width, int a_bits,
                      const std::string& label) {
  lower_gemm(s, hw, ceil_div(elems, width), width, width, a_bits, a_bits,
             label, /*attention=*/false, /*stream_weights=*/false, -1);
}

// Inverse block transform: a width-32 integer GEMM whose 8-bit coefficient
// matrix (1 KiB) streams once per op.
inline void lower_idct(Schedule& s, const HardwareConfig& hw,
                       std::int64_t elems, int a_bits,
                       const std::string& label) {
  lower_gemm(s, hw, ceil_div(elems, 32), 32, 32, 8, a_bits, label,
             /*attention=*/false, /*stream_weights=*/true,
             /*weight_bytes_override=*/32 * 32);
}

inline void lower_bfu_vector(Schedule& s, const HardwareConfig& hw,
                             std::int64_t elems, std::int64_t ops_per_elem,
                             bool attention) {
  Chunk c;
  c.engine = Engine::Bf16;
  c.attention = attention;
  c.useful = elems * ops_per_elem;
  c.compute = kBfuLatency + ceil_div(c.useful, bfu_lanes(hw));
  s.chunks.push_back(c);
}

inline void lower_quantize(Schedule& s, const HardwareConfig& hw,
                           std::int64_t elems, bool attention) {
  Chunk c;
  c.engine = Engine::Qu;
  c.attention = attention;
  c.useful = elems;
  c.compute = ceil_div(elems, hw.qu_values_per_cycle);
  s.chunks.push_back(c);
}

inline void lower_nonlinear(Schedule& s, const HardwareConfig& hw, NlKind nl,
                            std::int64_t elems) {
  std::int64_t ops = kResidualOpsPerElem;
  if (nl == NlKind::LayerNorm) ops = kLayerNormOpsPerElem;
  if (nl == NlKind::Gelu) ops = kGeluOpsPerElem;
  if (nl == NlKind::Rope) ops = kRopeOpsPerElem;
  lower_bfu_vector(s, hw, elems, ops, /*attention=*/false);
}

// Two-stage tiled attention for one op: per sequence and head, stage one
// streams QK^T tiles and folds them into running max/sum statistics; stage
// two recomputes the same tiles, normalizes, requantizes the probabilities
// and accumulates P*V. Only one score tile is ever resident.
inline void lower_attention(Schedule& s, const HardwareConfig& hw,
                            std::int64_t seqs, std::int64_t L,
                            std::int64_t heads, std::int64_t dk, int a_bits,
                            const TileConfig& tiles) {
  const Engine eng = gemm_engine(a_bits);
  const ArrayShape arr = array_shape(hw, eng);
  const bool integer = eng != Engine::Bf16;
  const std::int64_t t_q = std::min<std::int64_t>(tiles.t_q, L);
  const std::int64_t t_k = std::min<std::int64_t>(tiles.t_k, L);
  const std::int64_t nq = ceil_div(L, t_q), nk = ceil_div(L, t_k);
  const std::int64_t pairs = seqs * heads;
  const std::int64_t scores = pairs * nq * nk * t_q * t_k;
  const std::int64_t score_tile = t_q * t_k * kScoreBytes;

  note_peak(s.peaks.output, score_tile);
  if (score_tile > hw.output_buffer_bytes)
    flag(s, "output_buffer: attention score tile (" +
               std::to_string(score_tile) + " bytes) exceeds capacity");
  const std::int64_t resident =
      ceil_div((t_q + 2 * t_k) * dk * a_bits, 8);
  note_peak(s.peaks.input, resident);
  if (resident > hw.input_buffer_bytes / 2)
    flag(s, "input_buffer: attention tile set (" + std::to_string(resident) +
               " bytes) exceeds one ping-pong half");

  const std::int64_t qk_tile = ceil_div(t_q, arr.rows) * ceil_div(t_k, arr.cols) * dk;
  const std::int64_t pv_tile = ceil_div(t_q, arr.rows) * ceil_div(dk, arr.cols) * t_k;

  auto gemm_chunk = [&](std::int64_t tile_cycles, std::int64_t macs) {
    Chunk c;
    c.engine = eng;
    c.attention = true;
    c.compute = arr.fill + pairs * nq * nk * tile_cycles;
    c.useful = macs;
    s.chunks.push_back(c);
  };

  // Stage one: QK^T stream + statistics.
  gemm_chunk(qk_tile, pairs * L * L * dk);
  if (integer) lower_quantize(s, hw, scores, true);  // dequantize scores
  lower_bfu_vector(s, hw, scores, kSoftmaxStatsOpsPerScore + hw.exp_bfu_ops,
                   true);
  // Stage two: recompute, normalize, requantize, P*V.
  gemm_chunk(qk_tile, pairs * L * L * dk);
  if (integer) lower_quantize(s, hw, scores, true);
  lower_bfu_vector(s, hw, scores, kSoftmaxNormOpsPerScore + hw.exp_bfu_ops,
                   true);
  if (integer) lower_quantize(s, hw, scores, true);  // probabilities
  gemm_chunk(pv_tile, pairs * L * L * dk);
}

// Cache-all-scores baseline: stage one buffers every score tile of a query
// row instead of recomputing. When the cached row outgrows the output
// buffer it round-trips through DRAM, serialized against compute.
inline void lower_attention_spill(Schedule& s, const HardwareConfig& hw,
                                  std::int64_t seqs, std::int64_t L,
                                  std::int64_t heads, std::int64_t dk,
                                  int a_bits, const TileConfig& tiles) {
  const Engine eng = gemm_engine(a_bits);
  const ArrayShape arr = array_shape(hw, eng);
  const bool integer = eng != Engine::Bf16;
  const std::int64_t t_q = std::min<std::int64_t>(tiles.t_q, L);
  const std::int64_t t_k = std::min<std::int64_t>(tiles.t_k, L);
  const std::int64_t nq = ceil_div(L, t_q), nk = ceil_div(L, t_k);
  const std::int64_t pairs = seqs * heads;
  const std::int64_t scores = pairs * nq * nk * t_q * t_k;
  const std::int64_t row_cache = t_q * nk * t_k * kScoreBytes;

  note_peak(s.peaks.output, row_cache);
  const std::int64_t resident = ceil_div((t_q + 2 * t_k) * dk * a_bits, 8);
  note_peak(s.peaks.input, resident);

  const std::int64_t qk_tile = ceil_div(t_q, arr.rows) * ceil_div(t_k, arr.cols) * dk;
  const std::int64_t pv_tile = ceil_div(t_q, arr.rows) * ceil_div(dk, arr.cols) * t_k;

  auto gemm_chunk = [&](std::int64_t tile_cycles, std::int64_t macs) {
    Chunk c;
    c.engine = eng;
    c.attention = true;
    c.compute = arr.fill + pairs * nq * nk * tile_cycles;
    c.useful = macs;
    s.chunks.push_back(c);
  };

  gemm_chunk(qk_tile, pairs * L * L * dk);  // scores computed once
  if (integer) lower_quantize(s, hw, scores, true);
  lower_bfu_vector(s, hw, scores, kSoftmaxStatsOpsPerScore + hw.exp_bfu_ops,
                   true);
  if (row_cache > hw.output_buffer_bytes) {
    flag(s, "output_buffer: cached score rows (" + std::to_string(row_cache) +
               " bytes) exceed capacity, spilling to DRAM");
    Chunk spill;
    spill.engine = Engine::Spill;
    spill.attention = true;
    const std::int64_t bytes = pairs * nq * row_cache;
    spill.load_bytes = 2 * bytes;  // write out, read back
    spill.compute = 2 * dram_cycles(hw, bytes);
    s.chunks.push_back(spill);
  }
  lower_bfu_vector(s, hw, scores, kSoftmaxNormOpsPerScore + hw.exp_bfu_ops,
                   true);
  if (integer) lower_quantize(s, hw, scores, true);
  gemm_chunk(pv_tile, pairs * L * L * dk);
}

// Replay the chunk list through the two-resource pipeline and account
// phases, energy, and utilization.
inline SimReport run_schedule(const Schedule& s, const HardwareConfig& hw) {
  SimReport r;
  r.flags = s.flags;
  r.feasible = s.feasible;
  r.peak_bytes = s.peaks;

  std::int64_t dram_free = 0, fabric_free = 0;
  std::vector<std::int64_t> loaded_comp_end;  // ping-pong residency horizon
  double useful = 0, capacity = 0;

  for (const Chunk& c : s.chunks) {
    std::int64_t ready = 0;
    if (c.load > 0) {
      std::int64_t start = dram_free;
      if (loaded_comp_end.size() >= 2)
        start = std::max(start, loaded_comp_end[loaded_comp_end.size() - 2]);
      dram_free = start + c.load;
      ready = dram_free;
      r.phases.weight_load += c.load;
    }
    const std::int64_t begin = std::max(fabric_free, ready);
    r.phases.dram_stall += begin - fabric_free;
    const std::int64_t end = begin + c.compute;
    fabric_free = end;
    if (c.load > 0) loaded_comp_end.push_back(end);

    const double t_compute = double(c.compute) / hw.clock_hz;
    const double t_drain = double(c.drain) / hw.clock_hz;
    switch (c.engine) {
      case Engine::Int4:
      case Engine::Int8:
      case Engine::Bf16: {
        r.energy.bfu_array += hw.power_bfu_array * t_compute;
        r.energy.input_buf += hw.power_input_buf * t_compute;
        if (c.drain > 0) {
          r.energy.output_buf += hw.power_output_buf * t_drain;
          if (c.engine != Engine::Bf16)
            r.energy.qu += hw.power_qu * t_drain;  // requantize on drain
        }
        if (c.engine == Engine::Bf16) {
          r.phases.compute_bf16 += c.compute;
        } else {
          r.phases.compute_int += c.compute;
        }
        const ArrayShape arr = array_shape(hw, c.engine);
        useful += double(c.useful);
        capacity += double(arr.lanes) * double(c.compute);
        break;
      }
      case Engine::Qu:
        r.energy.qu += hw.power_qu * t_compute;
        r.phases.compute_int += c.compute;
        break;
      case Engine::Spill:
        r.phases.dram_stall += c.compute;
        break;
    }
    if (c.weighted)
      r.energy.weight_buf +=
          hw.power_weight_buf * (double(c.load) / hw.clock_hz + t_compute);
    if (c.attention) r.breakdown.attention += c.compute;
    r.energy.dram += double(c.load_bytes) * 8.0 * hw.dram_pj_per_bit * 1e-12;
  }

  r.total_cycles = fabric_free;
  r.breakdown.weight_load = r.phases.dram_stall - [&] {
    std::int64_t spill = 0;
    for (const Chunk& c : s.chunks)
      if (c.engine == Engine::Spill) spill += c.compute;
    return spill;
  }();
  // Spilled attention cycles already sit in breakdown.attention; stalls that
  // are not spills are exposed weight loading.
  r.breakdown.other =
      r.total_cycles - r.breakdown.weight_load - r.breakdown.attention;
  r.utilization = capacity > 0 ? useful / capacity : 0.0;
  return r;
}

}  // namespace simdetail

// One GEMM with streamed weights. Mode is carried by the operand widths:
// 4-bit activations run on the 4-bit array, 8-bit on the fused 8-bit array,
// anything wider on the BFU SIMD grid with bf16 weights.
inline SimReport simulate_gemm(const HardwareConfig& hw, std::int64_t M,
                               std::int64_t K, std::int64_t N, int w_bits,
                               int a_bits) {
  hw.validate();
  if (M < 1 || K < 1 || N < 1)
    throw std::invalid_argument("simulate_gemm: dims must be >= 1");
  simdetail::Schedule s;
  simdetail::lower_gemm(s, hw, M, K, N, w_bits, a_bits, "gemm");
  return simdetail::run_schedule(s, hw);
}

// Online transform of `elems` values in blocks of `width`: GEMM timing at
// dims (elems/width, width, width) with no weight stream and no weight
// buffer activity.
inline SimReport simulate_wht(const HardwareConfig& hw, std::int64_t elems,
                              std::int64_t width, int a_bits) {
  hw.validate();
  if (elems < 1 || width < 1)
    throw std::invalid_argument("simulate_wht: sizes must be >= 1");
  simdetail::Schedule s;
  simdetail::lower_wht(s, hw, elems, width, a_bits, "wht");
  return simdetail::run_schedule(s, hw);
}

inline SimReport simulate_tiled_attention(const HardwareConfig& hw,
                                          std::int64_t seqs, std::int64_t seq_len,
                                          std::int64_t heads, std::int64_t head_dim,
                                          int a_bits,
                                          const TileConfig& tiles = TileConfig{}) {
  hw.validate();
  if (seqs < 1 || seq_len < 1 || heads < 1 || head_dim < 1)
    throw std::invalid_argument("simulate_tiled_attention: sizes must be >= 1");
  simdetail::Schedule s;
  simdetail::lower_attention(s, hw, seqs, seq_len, heads, head_dim, a_bits,
                             tiles);
  return simdetail::run_schedule(s, hw);
}

// The non-tiled reference point: identical arithmetic, but score rows are
// cached whole instead of recomputed, spilling to DRAM when they do not fit.
inline SimReport simulate_attention_spill_baseline(
    const HardwareConfig& hw, std::int64_t seqs, std::int64_t seq_len,
    std::int64_t heads, std::int64_t head_dim, int a_bits,
    const TileConfig& tiles = TileConfig{}) {
  hw.validate();
  if (seqs < 1 || seq_len < 1 || heads < 1 || head_dim < 1)
    throw std::invalid_argument(
        "simulate_attention_spill_baseline: sizes must be >= 1");
  simdetail::Schedule s;
  simdetail::lower_attention_spill(s, hw, seqs, seq_len, heads, head_dim,
                                   a_bits, tiles);
  return simdetail::run_schedule(s, hw);
}

// Whole-model walk over the op schedule of run_quantized, with weight
// prefetch overlapping compute across ops.
inline SimReport simulate_model(const HardwareConfig& hw, const ModelSpec& spec,
                                PrecisionMode mode, QuantMethod method,
                                const TileConfig& tiles = TileConfig{}) {
  hw.validate();
  const int ab = act_bits(mode);
  simdetail::Schedule s;
  for (const LayerOp& op : model_ops(spec, mode, method)) {
    switch (op.kind) {
      case OpKind::Gemm:
        simdetail::lower_gemm(s, hw, std::int64_t(op.m), std::int64_t(op.k),
                              std::int64_t(op.n), op.w_bits, op.a_bits,
                              op.label);
        break;
      case OpKind::Attention:
        simdetail::lower_attention(s, hw, std::int64_t(op.seqs),
                                   std::int64_t(op.seq_len),
                                   std::int64_t(op.heads),
                                   std::int64_t(op.head_dim), op.a_bits, tiles);
        break;
      case OpKind::OnlineWht:
        simdetail::lower_wht(s, hw, std::int64_t(op.elems),
                             std::int64_t(op.width), ab, op.label);
        break;
      case OpKind::Idct:
        simdetail::lower_idct(s, hw, std::int64_t(op.elems), ab, op.label);
        break;
      case OpKind::Quantize:
        simdetail::lower_quantize(s, hw, std::int64_t(op.elems), false);
        break;
      case OpKind::Nonlinear:
        simdetail::lower_nonlinear(s, hw, op.nl, std::int64_t(op.elems));
        break;
    }
  }
  return simdetail::run_schedule(s, hw);
}

}  // namespace vq3t
