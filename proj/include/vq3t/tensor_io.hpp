#pragma once
// Binary tensor dumps. Fixed little-endian layout so files are comparable
// byte-for-byte across runs:
//
//   magic   4 bytes  "VQ3T"
//   version u16      currently 1
//   dtype   u8       0 = f64, 1 = bf16, 2 = i8
//   rank    u8
//   dims    rank x u32
//   payload row-major, little-endian
//
// Readers validate magic, version, dtype and payload size and throw on any
// mismatch; a truncated file never yields a partially filled tensor.

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vq3t/bf16.hpp"
#include "vq3t/matrix.hpp"

namespace vq3t {

enum class TensorDType : uint8_t { F64 = 0, Bf16 = 1, I8 = 2 };

constexpr uint16_t kTensorFormatVersion = 1;

namespace detail {

inline void put_u16(std::ostream& os, uint16_t v) {
  char b[2] = {char(v & 0xFF), char((v >> 8) & 0xFF)};
  os.write(b, 2);
}

inline void put_u32(std::ostream& os, uint32_t v) {
  char b[4] = {char(v & 0xFF), char((v >> 8) & 0xFF), char((v >> 16) & 0xFF),
               char((v >> 24) & 0xFF)};
  os.write(b, 4);
}

inline void put_u64(std::ostream& os, uint64_t v) {
  for (int i = 0; i < 8; ++i) os.put(char((v >> (8 * i)) & 0xFF));
}

inline uint16_t get_u16(std::istream& is) {
  unsigned char b[2];
  is.read(reinterpret_cast<char*>(b), 2);
  if (!is) throw std::runtime_error("tensor load: truncated header");
  return uint16_t(b[0] | (uint16_t(b[1]) << 8));
}

inline uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("tensor load: truncated header");
  return uint32_t(b[0]) | (uint32_t(b[1]) << 8) | (uint32_t(b[2]) << 16) |
         (uint32_t(b[3]) << 24);
}

inline uint64_t get_u64(std::istream& is) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    int c = is.get();
    if (c == EOF) throw std::runtime_error("tensor load: truncated payload");
    v |= uint64_t(uint8_t(c)) << (8 * i);
  }
  return v;
}

inline void write_header(std::ostream& os, TensorDType dtype,
                         const std::vector<uint32_t>& dims) {
  os.write("VQ3T", 4);
  put_u16(os, kTensorFormatVersion);
  os.put(char(uint8_t(dtype)));
  os.put(char(uint8_t(dims.size())));
  for (uint32_t d : dims) put_u32(os, d);
}

struct TensorHeader {
  TensorDType dtype;
  std::vector<uint32_t> dims;
  uint64_t element_count;
};

inline TensorHeader read_header(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != "VQ3T")
    throw std::runtime_error("tensor load: bad magic");
  uint16_t version = get_u16(is);
  if (version != kTensorFormatVersion)
    throw std::runtime_error("tensor load: unsupported version " + std::to_string(version));
  int dt = is.get();
  int rank = is.get();
  if (dt == EOF || rank == EOF) throw std::runtime_error("tensor load: truncated header");
  if (dt > 2) throw std::runtime_error("tensor load: unknown dtype tag " + std::to_string(dt));
  if (rank < 1 || rank > 8) throw std::runtime_error("tensor load: unsupported rank");
  TensorHeader h;
  h.dtype = TensorDType(uint8_t(dt));
  h.element_count = 1;
  for (int i = 0; i < rank; ++i) {
    uint32_t d = get_u32(is);
    h.dims.push_back(d);
    h.element_count *= d;
  }
  return h;
}

}  // namespace detail

inline void dump_tensor(const std::string& path, const DenseMatrix& m,
                        TensorDType dtype = TensorDType::F64) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("tensor dump: cannot open " + path);
  detail::write_header(os, dtype, {uint32_t(m.rows), uint32_t(m.cols)});
  for (double v : m.data) {
    if (dtype == TensorDType::F64) {
      uint64_t u;
      std::memcpy(&u, &v, 8);
      detail::put_u64(os, u);
    } else if (dtype == TensorDType::Bf16) {
      detail::put_u16(os, bf16_round(v).bits);
    } else {
      throw std::runtime_error("tensor dump: i8 requires integer codes, use dump_codes");
    }
  }
  if (!os) throw std::runtime_error("tensor dump: write failed for " + path);
}

inline void dump_codes(const std::string& path, std::size_t rows, std::size_t cols,
                       const std::vector<int8_t>& codes) {
  if (codes.size() != rows * cols)
    throw std::invalid_argument("dump_codes: size does not match shape");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("tensor dump: cannot open " + path);
  detail::write_header(os, TensorDType::I8, {uint32_t(rows), uint32_t(cols)});
  os.write(reinterpret_cast<const char*>(codes.data()),
           std::streamsize(codes.size()));
  if (!os) throw std::runtime_error("tensor dump: write failed for " + path);
}

// Loads f64 and bf16 dumps; bf16 payloads are widened to double.
inline DenseMatrix load_tensor(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("tensor load: cannot open " + path);
  auto h = detail::read_header(is);
  if (h.dims.size() != 2) throw std::runtime_error("tensor load: expected rank-2 tensor");
  if (h.dtype == TensorDType::I8)
    throw std::runtime_error("tensor load: i8 tensor, use load_codes");
  DenseMatrix m(h.dims[0], h.dims[1]);
  for (double& v : m.data) {
    if (h.dtype == TensorDType::F64) {
      uint64_t u = detail::get_u64(is);
      std::memcpy(&v, &u, 8);
    } else {
      v = bf16_to_double(bf16_from_bits(detail::get_u16(is)));
    }
  }
  return m;
}

inline std::vector<int8_t> load_codes(const std::string& path, std::size_t& rows,
                                      std::size_t& cols) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("tensor load: cannot open " + path);
  auto h = detail::read_header(is);
  if (h.dims.size() != 2) throw std::runtime_error("tensor load: expected rank-2 tensor");
  if (h.dtype != TensorDType::I8) throw std::runtime_error("tensor load: expected i8 dtype");
  rows = h.dims[0];
  cols = h.dims[1];
  std::vector<int8_t> codes(h.element_count);
  is.read(reinterpret_cast<char*>(codes.data()), std::streamsize(codes.size()));
  if (!is) throw std::runtime_error("tensor load: truncated payload");
  return codes;
}

}  // namespace vq3t
