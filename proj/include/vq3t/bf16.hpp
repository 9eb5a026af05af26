#pragma once
// Software bfloat16 (1 sign / 8 exponent / 7 mantissa bits), emulated with
// bit manipulation on IEEE-754 binary32 patterns. bf16 is exactly the upper
// half of a binary32, so widening is a 16-bit shift and narrowing rounds the
// low half away with round-to-nearest-even.
//
// Arithmetic helpers compute in binary32 and narrow once. binary32 carries
// 24 significand bits, which is more than 2*8+2, so the double rounding
// (exact result -> f32 -> bf16) is equivalent to a single correctly rounded
// step for both add and mul.

#include <cstdint>
#include <cstring>

namespace vq3t {

struct Bf16 {
  uint16_t bits = 0;
  friend bool operator==(Bf16 a, Bf16 b) { return a.bits == b.bits; }
  friend bool operator!=(Bf16 a, Bf16 b) { return a.bits != b.bits; }
};

inline uint32_t f32_bits(float f) {
  uint32_t u;
  std::memcpy(&u, &f, sizeof u);
  return u;
}

inline float f32_from_bits(uint32_t u) {
  float f;
  std::memcpy(&f, &u, sizeof f);
  return f;
}

inline Bf16 bf16_from_bits(uint16_t b) { return Bf16{b}; }

inline float bf16_to_float(Bf16 v) {
  return f32_from_bits(uint32_t(v.bits) << 16);
}

inline double bf16_to_double(Bf16 v) { return double(bf16_to_float(v)); }

inline bool bf16_is_nan(Bf16 v) {
  return (v.bits & 0x7F80) == 0x7F80 && (v.bits & 0x007F) != 0;
}

inline bool bf16_is_inf(Bf16 v) {
  return (v.bits & 0x7FFF) == 0x7F80;
}

inline bool bf16_is_subnormal(Bf16 v) {
  return (v.bits & 0x7F80) == 0 && (v.bits & 0x007F) != 0;
}

// Round a binary32 value to bf16 with round-to-nearest-even on the raw bits.
// Every bf16 pattern round-trips bit-exactly through binary32, including
// signalling NaNs and subnormals. NaNs whose payload lives entirely in the
// low half get the quiet bit forced so NaN-ness survives truncation.
inline Bf16 bf16_round(float x) {
  uint32_t u = f32_bits(x);
  if ((u & 0x7F800000u) == 0x7F800000u) {
    uint16_t hi = uint16_t(u >> 16);
    if ((u & 0x007FFFFFu) != 0 && (hi & 0x007F) == 0) hi |= 0x0040;
    return Bf16{hi};
  }
  uint32_t rounded = u + 0x7FFFu + ((u >> 16) & 1u);
  return Bf16{uint16_t(rounded >> 16)};
}

inline Bf16 bf16_round(double x) { return bf16_round(static_cast<float>(x)); }

// Nearest bf16 value of x, widened back to double. Handy for emulating a
// bf16-precision datapath inside double-valued code.
inline double bf16_value(double x) { return bf16_to_double(bf16_round(x)); }

inline Bf16 bf16_add(Bf16 a, Bf16 b) {
  return bf16_round(bf16_to_float(a) + bf16_to_float(b));
}

inline Bf16 bf16_mul(Bf16 a, Bf16 b) {
  return bf16_round(bf16_to_float(a) * bf16_to_float(b));
}

// Subnormals flush to a same-signed zero. The integer functional unit runs
// flush-to-zero, so equivalence checks wrap the reference ops with this.
inline Bf16 bf16_flush_subnormal(Bf16 v) {
  if (bf16_is_subnormal(v)) return Bf16{uint16_t(v.bits & 0x8000)};
  return v;
}

}  // namespace vq3t
