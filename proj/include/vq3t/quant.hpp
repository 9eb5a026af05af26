#pragma once
// Symmetric round-to-nearest quantization. Scales are zero-point-free:
// scale = max|x| / (2^(b-1) - 1), so codes live in the negation-closed range
// [-(2^(b-1)-1), 2^(b-1)-1] and the most negative two's-complement code is
// never produced. Codes are stored widened to int8 regardless of bit width;
// the bit width is carried alongside so hardware cost models can see it.
//
// Weights quantize per output channel (one scale per column), activations
// dynamically per tensor. Rounding is round-half-to-even everywhere.

#include <cstdint>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "vq3t/matrix.hpp"

namespace vq3t {

enum class PrecisionMode { Bf16, W4A8, W4A4 };

inline int act_bits(PrecisionMode m) {
  switch (m) {
    case PrecisionMode::W4A8: return 8;
    case PrecisionMode::W4A4: return 4;
    default: return 16;
  }
}

inline int weight_bits(PrecisionMode m) { return m == PrecisionMode::Bf16 ? 16 : 4; }

inline const char* mode_name(PrecisionMode m) {
  switch (m) {
    case PrecisionMode::Bf16: return "bf16";
    case PrecisionMode::W4A8: return "w4a8";
    case PrecisionMode::W4A4: return "w4a4";
  }
  return "?";
}

enum class QuantGranularity { PerTensor, PerChannel };

struct QuantTensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  int bit_width = 8;
  QuantGranularity granularity = QuantGranularity::PerTensor;
  std::vector<int8_t> codes;    // row-major, one entry per element
  std::vector<double> scales;   // length 1 (PerTensor) or cols (PerChannel)

  double scale_for_col(std::size_t c) const {
    return granularity == QuantGranularity::PerTensor ? scales[0] : scales[c];
  }
};

// Round half to even. Codes are tiny so the double arithmetic is exact.
inline long long round_half_even(double x) {
  double f = std::floor(x);
  double d = x - f;
  if (d > 0.5) return (long long)f + 1;
  if (d < 0.5) return (long long)f;
  long long lf = (long long)f;
  return (lf % 2 == 0) ? lf : lf + 1;
}

inline int quant_code_max(int bit_width) { return (1 << (bit_width - 1)) - 1; }

namespace detail {
inline void check_bit_width(int b) {
  if (b < 2 || b > 8)
    throw std::invalid_argument("quantize: bit_width must be in [2,8], got " + std::to_string(b));
}
}  // namespace detail

inline QuantTensor rtn_quantize(const DenseMatrix& x, int bit_width,
                                QuantGranularity granularity) {
  detail::check_bit_width(bit_width);
  const int qmax = quant_code_max(bit_width);
  QuantTensor q;
  q.rows = x.rows;
  q.cols = x.cols;
  q.bit_width = bit_width;
  q.granularity = granularity;
  q.codes.resize(x.rows * x.cols);

  if (granularity == QuantGranularity::PerTensor) {
    double m = max_abs(x);
    q.scales.assign(1, m == 0.0 ? 1.0 : m / qmax);
  } else {
    q.scales.assign(x.cols, 1.0);
    for (std::size_t c = 0; c < x.cols; ++c) {
      double m = 0.0;
      for (std::size_t r = 0; r < x.rows; ++r) m = std::max(m, std::fabs(x.at(r, c)));
      q.scales[c] = m == 0.0 ? 1.0 : m / qmax;
    }
  }

  for (std::size_t r = 0; r < x.rows; ++r) {
    for (std::size_t c = 0; c < x.cols; ++c) {
      double s = q.scale_for_col(c);
      long long code = round_half_even(x.at(r, c) / s);
      if (code > qmax) code = qmax;
      if (code < -qmax) code = -qmax;
      q.codes[r * x.cols + c] = int8_t(code);
    }
  }
  return q;
}

inline DenseMatrix dequantize(const QuantTensor& q) {
  DenseMatrix out(q.rows, q.cols);
  for (std::size_t r = 0; r < q.rows; ++r)
    for (std::size_t c = 0; c < q.cols; ++c)
      out.at(r, c) = double(q.codes[r * q.cols + c]) * q.scale_for_col(c);
  return out;
}

// Integer GEMM on codes followed by scale application:
//   out = (codes_a . codes_b) * scale_a * scale_b[col] * extra_scale
// Accumulation is 32-bit signed, matching the PE array datapath. K is
// bounded so K * qmax^2 stays far below 2^31 for every shape in this
// project (K <= 8192 at 8 bits: 8192 * 127 * 127 ~= 1.3e8).
inline DenseMatrix int_matmul_dequant(const QuantTensor& a, const QuantTensor& b,
                                      double extra_scale = 1.0) {
  if (a.cols != b.rows)
    throw std::invalid_argument("int_matmul_dequant: inner dimensions disagree");
  if (a.granularity != QuantGranularity::PerTensor)
    throw std::invalid_argument("int_matmul_dequant: left operand must be per-tensor");
  std::vector<int32_t> acc(a.rows * b.cols, 0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const int8_t* arow = a.codes.data() + i * a.cols;
    int32_t* orow = acc.data() + i * b.cols;
    for (std::size_t k = 0; k < a.cols; ++k) {
      const int32_t aik = arow[k];
      if (aik == 0) continue;
      const int8_t* brow = b.codes.data() + k * b.cols;
      for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aik * int32_t(brow[j]);
    }
  }
  DenseMatrix out(a.rows, b.cols);
  const double sa = a.scales[0] * extra_scale;
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j)
      out.at(i, j) = double(acc[i * b.cols + j]) * sa * b.scale_for_col(j);
  return out;
}

// Quantize-dequantize in one step ("fake quant"), used where only the value
// error matters and the integer codes themselves do not.
inline DenseMatrix fake_quantize(const DenseMatrix& x, int bit_width,
                                 QuantGranularity granularity) {
  return dequantize(rtn_quantize(x, bit_width, granularity));
}

}  // namespace vq3t
