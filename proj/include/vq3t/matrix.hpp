#pragma once
// Row-major dense double matrix plus the handful of operations the
// quantization and attention paths need. Deliberately small: shapes in this
// project top out around a few thousand rows, so there is no tiling, no
// allocator tricks, just contiguous storage.
//
// matmul accumulates along k in ascending index order for every output
// element. The (i,k,j) loop nest preserves that order per element while
// letting the compiler vectorize over j, so results are bit-reproducible
// regardless of optimization level.

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace vq3t {

struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  DenseMatrix(std::size_t r, std::size_t c, std::initializer_list<double> values)
      : rows(r), cols(c), data(values) {
    if (data.size() != r * c)
      throw std::invalid_argument("DenseMatrix: initializer size does not match shape");
  }

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  double* row_ptr(std::size_t r) { return data.data() + r * cols; }
  const double* row_ptr(std::size_t r) const { return data.data() + r * cols; }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }

  bool same_shape(const DenseMatrix& o) const { return rows == o.rows && cols == o.cols; }
};

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols != b.rows)
    throw std::invalid_argument("matmul: inner dimensions disagree (" +
                                std::to_string(a.cols) + " vs " + std::to_string(b.rows) + ")");
  DenseMatrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.row_ptr(i);
    double* orow = out.row_ptr(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;  // skipping exact zeros does not change the k-order sums
      const double* brow = b.row_ptr(k);
      for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

inline DenseMatrix transpose(const DenseMatrix& m) {
  DenseMatrix out(m.cols, m.rows);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) out.at(c, r) = m.at(r, c);
  return out;
}

inline DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("add: shape mismatch");
  DenseMatrix out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
  return out;
}

inline DenseMatrix sub(const DenseMatrix& a, const DenseMatrix& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("sub: shape mismatch");
  DenseMatrix out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
  return out;
}

inline DenseMatrix scale(const DenseMatrix& a, double s) {
  DenseMatrix out = a;
  for (double& v : out.data) v *= s;
  return out;
}

// diag(d) * m, i.e. row r scaled by d[r].
inline DenseMatrix diag_scale_rows(const std::vector<double>& d, const DenseMatrix& m) {
  if (d.size() != m.rows) throw std::invalid_argument("diag_scale_rows: length mismatch");
  DenseMatrix out = m;
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) out.at(r, c) *= d[r];
  return out;
}

// m * diag(d), i.e. column c scaled by d[c].
inline DenseMatrix diag_scale_cols(const DenseMatrix& m, const std::vector<double>& d) {
  if (d.size() != m.cols) throw std::invalid_argument("diag_scale_cols: length mismatch");
  DenseMatrix out = m;
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) out.at(r, c) *= d[c];
  return out;
}

inline DenseMatrix row_block(const DenseMatrix& m, std::size_t r0, std::size_t r1) {
  if (r0 > r1 || r1 > m.rows) throw std::invalid_argument("row_block: bad range");
  DenseMatrix out(r1 - r0, m.cols);
  for (std::size_t r = r0; r < r1; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) out.at(r - r0, c) = m.at(r, c);
  return out;
}

inline DenseMatrix col_block(const DenseMatrix& m, std::size_t c0, std::size_t c1) {
  if (c0 > c1 || c1 > m.cols) throw std::invalid_argument("col_block: bad range");
  DenseMatrix out(m.rows, c1 - c0);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = c0; c < c1; ++c) out.at(r, c - c0) = m.at(r, c);
  return out;
}

inline void set_col_block(DenseMatrix& dst, std::size_t c0, const DenseMatrix& src) {
  if (src.rows != dst.rows || c0 + src.cols > dst.cols)
    throw std::invalid_argument("set_col_block: block does not fit");
  for (std::size_t r = 0; r < src.rows; ++r)
    for (std::size_t c = 0; c < src.cols; ++c) dst.at(r, c0 + c) = src.at(r, c);
}

inline void set_row_block(DenseMatrix& dst, std::size_t r0, const DenseMatrix& src) {
  if (src.cols != dst.cols || r0 + src.rows > dst.rows)
    throw std::invalid_argument("set_row_block: block does not fit");
  for (std::size_t r = 0; r < src.rows; ++r)
    for (std::size_t c = 0; c < src.cols; ++c) dst.at(r0 + r, c) = src.at(r, c);
}

inline double max_abs(const DenseMatrix& m) {
  double v = 0.0;
  for (double x : m.data) v = std::max(v, std::fabs(x));
  return v;
}

inline double frobenius_norm(const DenseMatrix& m) {
  double s = 0.0;
  for (double x : m.data) s += x * x;
  return std::sqrt(s);
}

inline double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("max_abs_diff: shape mismatch");
  double v = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    v = std::max(v, std::fabs(a.data[i] - b.data[i]));
  return v;
}

// max |a-b| / max(1, max|b|): relative against the reference magnitude with
// an absolute floor so all-zero references do not blow up.
inline double max_rel_diff(const DenseMatrix& a, const DenseMatrix& b) {
  return max_abs_diff(a, b) / std::max(1.0, max_abs(b));
}

}  // namespace vq3t
