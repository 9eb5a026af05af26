#pragma once
// Normalized Sylvester-ordered Walsh-Hadamard transform. H_1 = [1],
// H_2n = (1/sqrt(2)) [[H_n, H_n], [H_n, -H_n]], so H is symmetric, orthogonal
// and involutive: H = H^T = H^-1. The fast path is the classic in-place
// radix-2 butterfly, which matches the dense matrix in Sylvester order.
//
// Orders must be powers of two; the butterfly entries are +-1 before the
// single 1/sqrt(n) scaling, which is what lets the PE array evaluate the
// transform with sign muxes instead of stored weights.

#include <cstddef>
#include <stdexcept>
#include <string>

#include "vq3t/matrix.hpp"

namespace vq3t {

// Which vectors of the matrix get transformed. Rows: every row is treated as
// a signal of length cols. Cols: every column is a signal of length rows.
enum class Axis { Rows, Cols };

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace detail {
inline void require_pow2(std::size_t n, const char* who) {
  if (!is_power_of_two(n))
    throw std::invalid_argument(std::string(who) + ": length " + std::to_string(n) +
                                " is not a power of two");
}
}  // namespace detail

inline DenseMatrix hadamard_matrix(std::size_t order) {
  detail::require_pow2(order, "hadamard_matrix");
  DenseMatrix h(order, order);
  h.at(0, 0) = 1.0;
  for (std::size_t n = 1; n < order; n <<= 1) {
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        double v = h.at(r, c);
        h.at(r, c + n) = v;
        h.at(r + n, c) = v;
        h.at(r + n, c + n) = -v;
      }
    }
  }
  return scale(h, 1.0 / std::sqrt(double(order)));
}

namespace detail {
// Butterfly over a strided signal: data[0], data[stride], ...
inline void fwht_strided(double* data, std::size_t n, std::size_t stride) {
  for (std::size_t len = 1; len < n; len <<= 1) {
    for (std::size_t block = 0; block < n; block += len << 1) {
      for (std::size_t k = block; k < block + len; ++k) {
        double a = data[k * stride];
        double b = data[(k + len) * stride];
        data[k * stride] = a + b;
        data[(k + len) * stride] = a - b;
      }
    }
  }
  double inv = 1.0 / std::sqrt(double(n));
  for (std::size_t k = 0; k < n; ++k) data[k * stride] *= inv;
}
}  // namespace detail

inline DenseMatrix apply_wht(const DenseMatrix& x, Axis axis) {
  DenseMatrix out = x;
  if (axis == Axis::Rows) {
    detail::require_pow2(x.cols, "apply_wht");
    for (std::size_t r = 0; r < x.rows; ++r)
      detail::fwht_strided(out.row_ptr(r), x.cols, 1);
  } else {
    detail::require_pow2(x.rows, "apply_wht");
    for (std::size_t c = 0; c < x.cols; ++c)
      detail::fwht_strided(out.data.data() + c, x.rows, x.cols);
  }
  return out;
}

// Block-diagonal per-head Hadamard: each consecutive head_dim-sized group of
// the transformed dimension rotates independently. Axis::Rows multiplies by
// diag(H_d, ..., H_d) on the right (tokens x channels layout); Axis::Cols on
// the left (weight layout, and H_d = H_d^T makes that the transpose too).
inline DenseMatrix apply_wht_per_head(const DenseMatrix& x, std::size_t head_dim,
                                      Axis axis = Axis::Rows) {
  std::size_t dim = axis == Axis::Rows ? x.cols : x.rows;
  if (head_dim == 0 || dim % head_dim != 0)
    throw std::invalid_argument("apply_wht_per_head: dimension not divisible by head_dim");
  detail::require_pow2(head_dim, "apply_wht_per_head");
  DenseMatrix out = x;
  if (axis == Axis::Rows) {
    for (std::size_t r = 0; r < x.rows; ++r)
      for (std::size_t h0 = 0; h0 < x.cols; h0 += head_dim)
        detail::fwht_strided(out.row_ptr(r) + h0, head_dim, 1);
  } else {
    for (std::size_t c = 0; c < x.cols; ++c)
      for (std::size_t h0 = 0; h0 < x.rows; h0 += head_dim)
        detail::fwht_strided(out.data.data() + h0 * x.cols + c, head_dim, x.cols);
  }
  return out;
}

// diag(H_d, ..., H_d) as a dense matrix, for fusing per-head rotations into
// weights offline.
inline DenseMatrix block_hadamard_matrix(std::size_t order, std::size_t head_dim) {
  if (head_dim == 0 || order % head_dim != 0)
    throw std::invalid_argument("block_hadamard_matrix: order not divisible by head_dim");
  DenseMatrix h = hadamard_matrix(head_dim);
  DenseMatrix out(order, order);
  for (std::size_t b = 0; b < order; b += head_dim)
    for (std::size_t r = 0; r < head_dim; ++r)
      for (std::size_t c = 0; c < head_dim; ++c) out.at(b + r, b + c) = h.at(r, c);
  return out;
}

}  // namespace vq3t
