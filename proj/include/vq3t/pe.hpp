#pragma once
// Functional models of the processing-element datapaths: the 4-bit MAC, the
// fused 8-bit MAC built from four 4-bit partial products, and the bf16
// functional unit (BFU) whose add/mul/inverse-sqrt are assembled from small
// integer sub-operations on the sign/exponent/significand fields.
//
// These are value models. Each function returns exactly what the clocked
// datapath produces, so the cycle model can price operations by count while
// tests pin the arithmetic: the fused MAC against plain 8x8 multiplication,
// the BFU against the bf16 reference ops with subnormals flushed.
//
// The BFU runs flush-to-zero in both directions: subnormal operands read as
// signed zero, subnormal results leave as signed zero. Exact cancellation
// returns +0. Overflow returns a signed infinity, matching what the
// round-to-nearest reference produces for the same operands.

#include <cstdint>
#include <stdexcept>
#include <string>

#include "vq3t/bf16.hpp"

namespace vq3t {

// BFU pipeline shape, used by the cycle model: results appear after
// kBfuLatency cycles and a new op can issue every cycle.
inline constexpr int kBfuLatency = 4;
inline constexpr int kBfuInitiationInterval = 1;

// 4-bit signed MAC with a wide accumulator. The accumulator never wraps in
// practice: worst-case product magnitude is 64 per step.
inline std::int32_t int4_mac(int a, int b, std::int32_t acc) {
  if (a < -8 || a > 7 || b < -8 || b > 7)
    throw std::invalid_argument("int4_mac: operand outside [-8, 7]");
  return acc + std::int32_t(a) * std::int32_t(b);
}

// Fused 8x8 MAC from four 4-bit lanes. Each operand splits into a signed
// high nibble and an unsigned low nibble, a = a_h*16 + a_l with a_l in
// [0, 15], and the partial products recombine with shifts:
//
//   a*b = (a_h*b_h << 8) + (a_h*b_l << 4) + (a_l*b_h << 4) + a_l*b_l
//
// Keeping the low nibble unsigned is what makes the identity exact for
// negative operands; the two cross lanes run signed-by-unsigned.
inline std::int32_t int8_mac_bitfusion(int a, int b, std::int32_t acc) {
  if (a < -128 || a > 127 || b < -128 || b > 127)
    throw std::invalid_argument("int8_mac_bitfusion: operand outside [-128, 127]");
  const std::int32_t ah = a >> 4;  // arithmetic shift keeps the sign
  const std::int32_t al = a & 0xF;
  const std::int32_t bh = b >> 4;
  const std::int32_t bl = b & 0xF;
  const std::int32_t fused =
      (ah * bh << 8) + (ah * bl << 4) + (al * bh << 4) + al * bl;
  return acc + fused;
}

namespace pedetail {

// Unpacked bf16 operand after the flush-to-zero read: `sig` carries the
// hidden bit (128..255 for nonzero values, 0 for zero), `exp` is the biased
// exponent field.
struct BfuOperand {
  int sign = 0;
  int exp = 0;
  std::int32_t sig = 0;
};

inline BfuOperand bfu_read(Bf16 v, const char* who) {
  if (bf16_is_nan(v) || bf16_is_inf(v))
    throw std::invalid_argument(std::string(who) + ": non-finite operand");
  BfuOperand o;
  o.sign = v.bits >> 15;
  o.exp = (v.bits >> 7) & 0xFF;
  o.sig = o.exp == 0 ? 0 : 0x80 | (v.bits & 0x7F);  // subnormals flush
  return o;
}

inline Bf16 bfu_zero(int sign) { return Bf16{std::uint16_t(sign << 15)}; }

inline Bf16 bfu_inf(int sign) {
  return Bf16{std::uint16_t((sign << 15) | 0x7F80)};
}

inline Bf16 bfu_pack(int sign, int exp, std::int32_t sig) {
  return Bf16{std::uint16_t((sign << 15) | (exp << 7) | (sig & 0x7F))};
}

// Round-to-nearest-even of `mag >> drop`, reporting the carry out of the
// 8-bit significand. `mag` must be exact, so one rounding happens in total.
inline std::int32_t rne_shift(std::int64_t mag, int drop) {
  if (drop <= 0) return std::int32_t(mag << -drop);
  if (drop >= 63) return 0;
  const std::int64_t q = mag >> drop;
  const std::int64_t rem = mag & ((std::int64_t(1) << drop) - 1);
  const std::int64_t half = std::int64_t(1) << (drop - 1);
  if (rem > half || (rem == half && (q & 1))) return std::int32_t(q + 1);
  return std::int32_t(q);
}

// Normalize an exact nonzero magnitude `mag * 2^(base_exp - 7 - 134)` scale
// anchored so that sig in [128, 256) pairs with biased exponent e. Rounds
// once, promotes across the subnormal boundary when the rounded value
// reaches the minimum normal, flushes otherwise.
inline Bf16 bfu_round_pack(int sign, int base_exp, std::int64_t mag) {
  int k = 0;  // msb index
  for (std::int64_t m = mag; m > 1; m >>= 1) ++k;
  int exp = base_exp + k - 7;
  int drop = k - 7;
  if (exp <= 0) drop += 1 - exp;  // round at the subnormal grid instead
  std::int32_t sig = rne_shift(mag, drop);
  if (exp <= 0) {
    // Only a round-up to the full hidden bit crosses back into normals;
    // every smaller result is a subnormal and flushes.
    if (sig >= 0x80) return bfu_pack(sign, 1, 0x80);
    return bfu_zero(sign);
  }
  if (sig >= 0x100) {  // rounding carried out of the significand
    sig >>= 1;
    ++exp;
  }
  if (exp >= 255) return bfu_inf(sign);
  return bfu_pack(sign, exp, sig);
}

}  // namespace pedetail

// bf16 add on the BFU. The datapath is the textbook small-integer sequence:
// an 8-bit exponent compare picks the larger operand, the smaller
// significand aligns by the exponent difference, the significands add or
// subtract, and the result renormalizes with one round-to-nearest-even.
// Alignment keeps the sum exact (the shift distance is capped, and beyond
// the cap the small operand cannot move the rounded result), so the output
// is bit-identical to rounding the infinitely precise sum.
inline Bf16 bfu_fpadd(Bf16 a, Bf16 b) {
  using namespace pedetail;
  BfuOperand x = bfu_read(a, "bfu_fpadd");
  BfuOperand y = bfu_read(b, "bfu_fpadd");
  if (x.sig == 0 && y.sig == 0) {
    // IEEE sum of zeros: -0 only when both signs are negative.
    return bfu_zero(x.sign & y.sign);
  }
  if (x.sig == 0) return bfu_pack(y.sign, y.exp, y.sig);
  if (y.sig == 0) return bfu_pack(x.sign, x.exp, x.sig);

  // Order by magnitude so the aligned difference stays nonnegative.
  bool swap = (y.exp > x.exp) || (y.exp == x.exp && y.sig > x.sig);
  const BfuOperand& big = swap ? y : x;
  const BfuOperand& small = swap ? x : y;
  const int d = big.exp - small.exp;
  if (d > 9) {
    // The small operand sits entirely below half an ulp of the large one,
    // so round-to-nearest returns the large operand unchanged.
    return bfu_pack(big.sign, big.exp, big.sig);
  }
  const std::int64_t hi = std::int64_t(big.sig) << d;
  const std::int64_t sum =
      big.sign == small.sign ? hi + small.sig : hi - small.sig;
  if (sum == 0) return bfu_zero(0);  // exact cancellation gives +0
  return bfu_round_pack(big.sign, small.exp, sum);
}

// bf16 multiply on the BFU: an 8x8 significand product (one fused-MAC pass
// over the integer lanes), an exponent add, and one round-to-nearest-even.
inline Bf16 bfu_fpmul(Bf16 a, Bf16 b) {
  using namespace pedetail;
  BfuOperand x = bfu_read(a, "bfu_fpmul");
  BfuOperand y = bfu_read(b, "bfu_fpmul");
  const int sign = x.sign ^ y.sign;
  if (x.sig == 0 || y.sig == 0) return bfu_zero(sign);
  const std::int64_t prod = std::int64_t(x.sig) * y.sig;  // 15 or 16 bits
  // base exponent chosen so prod*2^(base-141+7-7)... anchored by:
  // value = prod * 2^(ex-134) * 2^(ey-134) and bfu_round_pack treats mag as
  // sig<<(k-7) at exponent base+k-7, giving exp = ex+ey+k-141.
  return bfu_round_pack(sign, x.exp + y.exp - 134, prod);
}

// Fast inverse square root on the BFU's temporary path: the shift-and-
// subtract seed 0x5F37 - (bits >> 1) on the 16-bit pattern, then a single
// Newton step y*(1.5 - 0.5*x*y^2) evaluated with BFU ops. Negation is a
// sign-bit flip and costs nothing.
//
// The step is evaluated in its additive form y + 0.5*y*(1 - x*y^2). The
// seed lands x*y^2 in [0.87, 1.08], so the subtraction from 1 is exact by
// Sterbenz, and the remaining roundings hit only the small correction term
// instead of a factor near 1. This halves the worst-case error of the
// factored order; what remains is the floor set by the output format
// itself (a two-rounding path on an 8-bit significand), about 0.61%
// relative at the worst seed-error mantissas, 0.2% typical.
inline Bf16 bfu_fptmp_invsqrt(Bf16 x) {
  if (bf16_is_nan(x) || bf16_is_inf(x))
    throw std::invalid_argument("bfu_fptmp_invsqrt: non-finite input");
  Bf16 v = bf16_flush_subnormal(x);
  if ((v.bits & 0x8000) || (v.bits & 0x7FFF) == 0)
    throw std::invalid_argument("bfu_fptmp_invsqrt: input must be positive");

  Bf16 y = bf16_from_bits(std::uint16_t(0x5F37 - (v.bits >> 1)));
  const Bf16 half = bf16_round(0.5f);
  const Bf16 one = bf16_round(1.0f);
  Bf16 u = bfu_fpmul(bfu_fpmul(v, y), y);
  u.bits ^= 0x8000;
  Bf16 residual = bfu_fpadd(one, u);
  Bf16 corr = bfu_fpmul(bfu_fpmul(y, residual), half);
  return bfu_fpadd(y, corr);
}

}  // namespace vq3t
