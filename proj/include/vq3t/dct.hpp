#pragma once
// DCT-II in two flavours.
//
// Orthonormal: D[k][n] = c_k cos(pi (2n+1) k / (2N)), c_0 = sqrt(1/N),
// c_k = sqrt(2/N). Rows are the basis vectors, D D^T = I exactly (up to
// floating point), any order >= 1.
//
// IntegerScaled: the HEVC/H.265 core transform matrices for N in
// {4, 8, 16, 32}. These are integer approximations of 64*sqrt(N) times the
// orthonormal basis; D D^T = c I holds only approximately with c = 4096 * N
// (the 4-point rows are mutually orthogonal but the larger cores are not,
// e.g. rows 1 and 3 of the 8-point matrix have dot product -50). The
// companion inverse is therefore the exact matrix inverse, whose leading
// term is D^T / c; on the hardware the 1/c factor is folded into the
// dequantization scales and the residual correction rides along with them.
//
// Orders above 32 are handled block-diagonally with a supported core order:
// each consecutive core-sized group of channels transforms independently.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "vq3t/hadamard.hpp"
#include "vq3t/matrix.hpp"

namespace vq3t {

enum class DctVariant { Orthonormal, IntegerScaled };

struct DctMatrix {
  DctVariant variant = DctVariant::Orthonormal;
  std::size_t order = 0;       // overall dimension
  std::size_t block_order = 0; // core transform size; == order when not block-diagonal
  double compensation = 1.0;   // D D^T ~= compensation * I
  DenseMatrix fwd;             // order x order, basis vectors as rows
  DenseMatrix inv;             // companion inverse, inv * fwd = I; ~= fwd^T / compensation
};

namespace detail {

// HEVC core transform, 32-point. Smaller orders subsample every (32/N)-th
// row, truncated to the first N columns, which is how the standard derives
// them.
inline const int16_t (&hevc_t32())[32][32] {
  static const int16_t t[32][32] = {
    { 64, 64, 64, 64, 64, 64, 64, 64, 64, 64, 64, 64, 64, 64, 64, 64, 64, 64, 64, 64, 64, 64, 64, 64, 64, 64, 64, 64, 64, 64, 64, 64},
    { 90, 90, 88, 85, 82, 78, 73, 67, 61, 54, 46, 38, 31, 22, 13,  4, -4,-13,-22,-31,-38,-46,-54,-61,-67,-73,-78,-82,-85,-88,-90,-90},
    { 90, 87, 80, 70, 57, 43, 25,  9, -9,-25,-43,-57,-70,-80,-87,-90,-90,-87,-80,-70,-57,-43,-25, -9,  9, 25, 43, 57, 70, 80, 87, 90},
    { 90, 82, 67, 46, 22, -4,-31,-54,-73,-85,-90,-88,-78,-61,-38,-13, 13, 38, 61, 78, 88, 90, 85, 73, 54, 31,  4,-22,-46,-67,-82,-90},
    { 89, 75, 50, 18,-18,-50,-75,-89,-89,-75,-50,-18, 18, 50, 75, 89, 89, 75, 50, 18,-18,-50,-75,-89,-89,-75,-50,-18, 18, 50, 75, 89},
    { 88, 67, 31,-13,-54,-82,-90,-78,-46, -4, 38, 73, 90, 85, 61, 22,-22,-61,-85,-90,-73,-38,  4, 46, 78, 90, 82, 54, 13,-31,-67,-88},
    { 87, 57,  9,-43,-80,-90,-70,-25, 25, 70, 90, 80, 43, -9,-57,-87,-87,-57, -9, 43, 80, 90, 70, 25,-25,-70,-90,-80,-43,  9, 57, 87},
    { 85, 46,-13,-67,-90,-73,-22, 38, 82, 88, 54, -4,-61,-90,-78,-31, 31, 78, 90, 61,  4,-54,-88,-82,-38, 22, 73, 90, 67, 13,-46,-85},
    { 83, 36,-36,-83,-83,-36, 36, 83, 83, 36,-36,-83,-83,-36, 36, 83, 83, 36,-36,-83,-83,-36, 36, 83, 83, 36,-36,-83,-83,-36, 36, 83},
    { 82, 22,-54,-90,-61, 13, 78, 85, 31,-46,-90,-67,  4, 73, 88, 38,-38,-88,-73, -4, 67, 90, 46,-31,-85,-78,-13, 61, 90, 54,-22,-82},
    { 80,  9,-70,-87,-25, 57, 90, 43,-43,-90,-57, 25, 87, 70, -9,-80,-80, -9, 70, 87, 25,-57,-90,-43, 43, 90, 57,-25,-87,-70,  9, 80},
    { 78, -4,-82,-73, 13, 85, 67,-22,-88,-61, 31, 90, 54,-38,-90,-46, 46, 90, 38,-54,-90,-31, 61, 88, 22,-67,-85,-13, 73, 82,  4,-78},
    { 75,-18,-89,-50, 50, 89, 18,-75,-75, 18, 89, 50,-50,-89,-18, 75, 75,-18,-89,-50, 50, 89, 18,-75,-75, 18, 89, 50,-50,-89,-18, 75},
    { 73,-31,-90,-22, 78, 67,-38,-90,-13, 82, 61,-46,-88, -4, 85, 54,-54,-85,  4, 88, 46,-61,-82, 13, 90, 38,-67,-78, 22, 90, 31,-73},
    { 70,-43,-87,  9, 90, 25,-80,-57, 57, 80,-25,-90, -9, 87, 43,-70,-70, 43, 87, -9,-90,-25, 80, 57,-57,-80, 25, 90,  9,-87,-43, 70},
    { 67,-54,-78, 38, 85,-22,-90,  4, 90, 13,-88,-31, 82, 46,-73,-61, 61, 73,-46,-82, 31, 88,-13,-90, -4, 90, 22,-85,-38, 78, 54,-67},
    { 64,-64,-64, 64, 64,-64,-64, 64, 64,-64,-64, 64, 64,-64,-64, 64, 64,-64,-64, 64, 64,-64,-64, 64, 64,-64,-64, 64, 64,-64,-64, 64},
    { 61,-73,-46, 82, 31,-88,-13, 90, -4,-90, 22, 85,-38,-78, 54, 67,-67,-54, 78, 38,-85,-22, 90,  4,-90, 13, 88,-31,-82, 46, 73,-61},
    { 57,-80,-25, 90, -9,-87, 43, 70,-70,-43, 87,  9,-90, 25, 80,-57,-57, 80, 25,-90,  9, 87,-43,-70, 70, 43,-87, -9, 90,-25,-80, 57},
    { 54,-85, -4, 88,-46,-61, 82, 13,-90, 38, 67,-78,-22, 90,-31,-73, 73, 31,-90, 22, 78,-67,-38, 90,-13,-82, 61, 46,-88,  4, 85,-54},
    { 50,-89, 18, 75,-75,-18, 89,-50,-50, 89,-18,-75, 75, 18,-89, 50, 50,-89, 18, 75,-75,-18, 89,-50,-50, 89,-18,-75, 75, 18,-89, 50},
    { 46,-90, 38, 54,-90, 31, 61,-88, 22, 67,-85, 13, 73,-82,  4, 78,-78, -4, 82,-73,-13, 85,-67,-22, 88,-61,-31, 90,-54,-38, 90,-46},
    { 43,-90, 57, 25,-87, 70,  9,-80, 80, -9,-70, 87,-25,-57, 90,-43,-43, 90,-57,-25, 87,-70, -9, 80,-80,  9, 70,-87, 25, 57,-90, 43},
    { 38,-88, 73, -4,-67, 90,-46,-31, 85,-78, 13, 61,-90, 54, 22,-82, 82,-22,-54, 90,-61,-13, 78,-85, 31, 46,-90, 67,  4,-73, 88,-38},
    { 36,-83, 83,-36,-36, 83,-83, 36, 36,-83, 83,-36,-36, 83,-83, 36, 36,-83, 83,-36,-36, 83,-83, 36, 36,-83, 83,-36,-36, 83,-83, 36},
    { 31,-78, 90,-61,  4, 54,-88, 82,-38,-22, 73,-90, 67,-13,-46, 85,-85, 46, 13,-67, 90,-73, 22, 38,-82, 88,-54, -4, 61,-90, 78,-31},
    { 25,-70, 90,-80, 43,  9,-57, 87,-87, 57, -9,-43, 80,-90, 70,-25,-25, 70,-90, 80,-43, -9, 57,-87, 87,-57,  9, 43,-80, 90,-70, 25},
    { 22,-61, 85,-90, 73,-38, -4, 46,-78, 90,-82, 54,-13,-31, 67,-88, 88,-67, 31, 13,-54, 82,-90, 78,-46,  4, 38,-73, 90,-85, 61,-22},
    { 18,-50, 75,-89, 89,-75, 50,-18,-18, 50,-75, 89,-89, 75,-50, 18, 18,-50, 75,-89, 89,-75, 50,-18,-18, 50,-75, 89,-89, 75,-50, 18},
    { 13,-38, 61,-78, 88,-90, 85,-73, 54,-31,  4, 22,-46, 67,-82, 90,-90, 82,-67, 46,-22, -4, 31,-54, 73,-85, 90,-88, 78,-61, 38,-13},
    {  9,-25, 43,-57, 70,-80, 87,-90, 90,-87, 80,-70, 57,-43, 25, -9, -9, 25,-43, 57,-70, 80,-87, 90,-90, 87,-80, 70,-57, 43,-25,  9},
    {  4,-13, 22,-31, 38,-46, 54,-61, 67,-73, 78,-82, 85,-88, 90,-90, 90,-90, 88,-85, 82,-78, 73,-67, 61,-54, 46,-38, 31,-22, 13, -4},
  };
  return t;
}

inline DenseMatrix orthonormal_dct_core(std::size_t n) {
  DenseMatrix d(n, n);
  const double pi = 3.14159265358979323846;
  for (std::size_t k = 0; k < n; ++k) {
    double ck = std::sqrt((k == 0 ? 1.0 : 2.0) / double(n));
    for (std::size_t j = 0; j < n; ++j)
      d.at(k, j) = ck * std::cos(pi * double(2 * j + 1) * double(k) / double(2 * n));
  }
  return d;
}

inline DenseMatrix integer_dct_core(std::size_t n) {
  if (n != 4 && n != 8 && n != 16 && n != 32)
    throw std::invalid_argument("dct_matrix: integer-scaled core order must be 4, 8, 16 or 32");
  const auto& t32 = hevc_t32();
  const std::size_t step = 32 / n;
  DenseMatrix d(n, n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j) d.at(k, j) = double(t32[k * step][j]);
  return d;
}

// Gauss-Jordan with partial pivoting; fine for the small, well-conditioned
// core matrices this file deals in.
inline DenseMatrix invert_square(const DenseMatrix& m) {
  if (m.rows != m.cols) throw std::invalid_argument("invert_square: matrix not square");
  const std::size_t n = m.rows;
  DenseMatrix a = m;
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) out.at(i, i) = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a.at(r, col)) > std::fabs(a.at(piv, col))) piv = r;
    if (a.at(piv, col) == 0.0) throw std::invalid_argument("invert_square: singular matrix");
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a.at(piv, j), a.at(col, j));
        std::swap(out.at(piv, j), out.at(col, j));
      }
    }
    double p = a.at(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      a.at(col, j) /= p;
      out.at(col, j) /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = a.at(r, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a.at(r, j) -= f * a.at(col, j);
        out.at(r, j) -= f * out.at(col, j);
      }
    }
  }
  return out;
}

}  // namespace detail

inline DctMatrix dct_matrix(std::size_t order, DctVariant variant) {
  if (order == 0) throw std::invalid_argument("dct_matrix: order must be >= 1");
  DctMatrix d;
  d.variant = variant;
  d.order = order;
  d.block_order = order;
  if (variant == DctVariant::Orthonormal) {
    d.fwd = detail::orthonormal_dct_core(order);
    d.compensation = 1.0;
    d.inv = transpose(d.fwd);
  } else {
    d.fwd = detail::integer_dct_core(order);
    d.compensation = 4096.0 * double(order);
    d.inv = detail::invert_square(d.fwd);
  }
  return d;
}

// Block-diagonal DCT: diag(D_core, ..., D_core). Lets dimensions beyond the
// largest integer core (or beyond what one pass of the datapath covers) reuse
// a supported core order. order must be a multiple of core_order.
inline DctMatrix block_diagonal_dct(std::size_t order, std::size_t core_order,
                                    DctVariant variant) {
  if (core_order == 0 || order % core_order != 0)
    throw std::invalid_argument("block_diagonal_dct: order not divisible by core order");
  DenseMatrix core = variant == DctVariant::Orthonormal
                         ? detail::orthonormal_dct_core(core_order)
                         : detail::integer_dct_core(core_order);
  DenseMatrix core_inv =
      variant == DctVariant::Orthonormal ? transpose(core) : detail::invert_square(core);
  DctMatrix d;
  d.variant = variant;
  d.order = order;
  d.block_order = core_order;
  d.compensation = variant == DctVariant::Orthonormal ? 1.0 : 4096.0 * double(core_order);
  d.fwd = DenseMatrix(order, order);
  d.inv = DenseMatrix(order, order);
  for (std::size_t b = 0; b < order; b += core_order)
    for (std::size_t r = 0; r < core_order; ++r)
      for (std::size_t c = 0; c < core_order; ++c) {
        d.fwd.at(b + r, b + c) = core.at(r, c);
        d.inv.at(b + r, b + c) = core_inv.at(r, c);
      }
  return d;
}

namespace detail {
inline void check_dct_len(const DctMatrix& d, std::size_t len, const char* who) {
  if (len != d.order)
    throw std::invalid_argument(std::string(who) + ": length " + std::to_string(len) +
                                " does not match transform order " + std::to_string(d.order));
}
}  // namespace detail

// Forward: signals -> coefficients. Axis::Rows treats each row as a signal,
// so the result is x * D^T; Axis::Cols computes D * x.
inline DenseMatrix apply_dct(const DenseMatrix& x, const DctMatrix& d, Axis axis) {
  if (axis == Axis::Rows) {
    detail::check_dct_len(d, x.cols, "apply_dct");
    return matmul(x, transpose(d.fwd));
  }
  detail::check_dct_len(d, x.rows, "apply_dct");
  return matmul(d.fwd, x);
}

// Inverse: coefficients -> signals via the companion inverse. For the
// orthonormal variant this is exactly the transpose; for the integer variant
// it carries the 1/compensation factor (folded into dequant scales on the
// hardware) plus the correction for the core's residual non-orthogonality.
inline DenseMatrix apply_idct(const DenseMatrix& x, const DctMatrix& d, Axis axis) {
  if (axis == Axis::Rows) {
    detail::check_dct_len(d, x.cols, "apply_idct");
    return matmul(x, transpose(d.inv));
  }
  detail::check_dct_len(d, x.rows, "apply_idct");
  return matmul(d.inv, x);
}

}  // namespace vq3t
