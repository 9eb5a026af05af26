// Core numeric carriers: software bf16, dense matrices, symmetric RTN
// quantization and the binary tensor dump format.

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "vq3t/bf16.hpp"
#include "vq3t/matrix.hpp"
#include "vq3t/quant.hpp"
#include "vq3t/tensor_io.hpp"

using namespace vq3t;

namespace {

// Deterministic uniform double in [lo, hi) from a raw mt19937_64 draw. The
// stdlib distributions are not pinned across implementations, so tests and
// library code roll their own.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  double u = double(rng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

DenseMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c,
                          double lo = -1.0, double hi = 1.0) {
  DenseMatrix m(r, c);
  for (double& v : m.data) v = uniform(rng, lo, hi);
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// bf16

TEST(Bf16, KnownEncodings) {
  EXPECT_EQ(bf16_round(1.0f).bits, 0x3F80);
  EXPECT_EQ(bf16_round(-2.0f).bits, 0xC000);
  EXPECT_EQ(bf16_round(0.0f).bits, 0x0000);
  EXPECT_EQ(bf16_round(1.0f + 0x1.0p-7f).bits, 0x3F81);
}

TEST(Bf16, RoundTripExhaustive) {
  // Every 16-bit pattern widens to f32 and narrows back unchanged, including
  // signalling NaNs, subnormals and both zeros.
  for (uint32_t b = 0; b <= 0xFFFF; ++b) {
    Bf16 v = bf16_from_bits(uint16_t(b));
    EXPECT_EQ(bf16_round(bf16_to_float(v)).bits, v.bits) << "pattern " << b;
  }
}

TEST(Bf16, RoundToNearestEvenTies) {
  // 1 + 2^-8 sits exactly between 0x3F80 and 0x3F81; the even side wins.
  EXPECT_EQ(bf16_round(1.0f + 0x1.0p-8f).bits, 0x3F80);
  // 1 + 3*2^-8 sits between 0x3F81 and 0x3F82.
  EXPECT_EQ(bf16_round(1.0f + 3.0f * 0x1.0p-8f).bits, 0x3F82);
  // Just above the tie rounds up.
  EXPECT_EQ(bf16_round(1.0f + 0x1.0p-8f + 0x1.0p-20f).bits, 0x3F81);
}

TEST(Bf16, SquareOfOnePlusUlp) {
  // (1 + 2^-7)^2 = 1 + 2^-6 + 2^-14; the tail is below the rounding point so
  // the product lands on 1 + 2^-6.
  double exact = (1.0 + 0x1.0p-7) * (1.0 + 0x1.0p-7);
  EXPECT_EQ(bf16_round(exact).bits, 0x3F82);
  Bf16 x = bf16_from_bits(0x3F81);
  EXPECT_EQ(bf16_mul(x, x).bits, 0x3F82);
}

TEST(Bf16, OverflowToInfinity) {
  EXPECT_EQ(bf16_round(3.4028235e38f).bits, 0x7F80);
  EXPECT_EQ(bf16_round(-3.4028235e38f).bits, 0xFF80);
  EXPECT_TRUE(bf16_is_inf(bf16_round(3.4028235e38f)));
}

TEST(Bf16, ArithmeticMatchesDoubleRoute) {
  // f32-computed ops must agree with the double-computed oracle: both narrow
  // a result that carries more than 2p+2 significand bits, so the double
  // rounding is innocuous on each route.
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200000; ++i) {
    Bf16 a = bf16_from_bits(uint16_t(rng() & 0xFFFF));
    Bf16 b = bf16_from_bits(uint16_t(rng() & 0xFFFF));
    if (bf16_is_nan(a) || bf16_is_nan(b) || bf16_is_inf(a) || bf16_is_inf(b)) continue;
    Bf16 sum = bf16_add(a, b);
    Bf16 oracle_sum = bf16_round(float(bf16_to_double(a) + bf16_to_double(b)));
    EXPECT_EQ(sum.bits, oracle_sum.bits);
    EXPECT_EQ(bf16_add(a, b).bits, bf16_add(b, a).bits);
    EXPECT_EQ(bf16_mul(a, b).bits, bf16_mul(b, a).bits);
  }
}

TEST(Bf16, FlushSubnormal) {
  Bf16 sub = bf16_from_bits(0x0001);
  EXPECT_TRUE(bf16_is_subnormal(sub));
  EXPECT_EQ(bf16_flush_subnormal(sub).bits, 0x0000);
  EXPECT_EQ(bf16_flush_subnormal(bf16_from_bits(0x8001)).bits, 0x8000);
  Bf16 norm = bf16_from_bits(0x3F80);
  EXPECT_EQ(bf16_flush_subnormal(norm).bits, 0x3F80);
}

// ---------------------------------------------------------------------------
// round-half-even

TEST(Rounding, HalfEven) {
  EXPECT_EQ(round_half_even(2.5), 2);
  EXPECT_EQ(round_half_even(3.5), 4);
  EXPECT_EQ(round_half_even(-3.5), -4);
  EXPECT_EQ(round_half_even(-2.5), -2);
  EXPECT_EQ(round_half_even(-0.5), 0);
  EXPECT_EQ(round_half_even(0.5), 0);
  EXPECT_EQ(round_half_even(1.75), 2);
  EXPECT_EQ(round_half_even(-1.25), -1);
  EXPECT_EQ(round_half_even(7.0), 7);
}

// ---------------------------------------------------------------------------
// DenseMatrix

TEST(Matrix, HandMatmul) {
  DenseMatrix a(2, 2, {1, 2, 3, 4});
  DenseMatrix b(2, 2, {5, 6, 7, 8});
  DenseMatrix c = matmul(a, b);
  EXPECT_DOUBLE_EQ(c.at(0, 0), 19);
  EXPECT_DOUBLE_EQ(c.at(0, 1), 22);
  EXPECT_DOUBLE_EQ(c.at(1, 0), 43);
  EXPECT_DOUBLE_EQ(c.at(1, 1), 50);
}

TEST(Matrix, IdentityIsNeutral) {
  std::mt19937_64 rng(11);
  DenseMatrix a = random_matrix(rng, 5, 7);
  DenseMatrix r = matmul(a, DenseMatrix::identity(7));
  EXPECT_EQ(r.data, a.data);  // exact: each element is a plain copy plus zeros
  DenseMatrix l = matmul(DenseMatrix::identity(5), a);
  EXPECT_EQ(l.data, a.data);
}

TEST(Matrix, ShapeErrors) {
  DenseMatrix a(2, 3), b(2, 3);
  EXPECT_THROW(matmul(a, b), std::invalid_argument);
  EXPECT_THROW(add(a, DenseMatrix(3, 2)), std::invalid_argument);
  EXPECT_THROW((DenseMatrix{2, 2, {1, 2, 3}}), std::invalid_argument);
}

TEST(Matrix, TransposeInvolution) {
  std::mt19937_64 rng(13);
  DenseMatrix a = random_matrix(rng, 4, 9);
  EXPECT_EQ(transpose(transpose(a)).data, a.data);
}

TEST(Matrix, BlockHelpers) {
  DenseMatrix a(2, 4, {1, 2, 3, 4, 5, 6, 7, 8});
  DenseMatrix c = col_block(a, 1, 3);
  EXPECT_EQ(c.rows, 2u);
  EXPECT_EQ(c.cols, 2u);
  EXPECT_DOUBLE_EQ(c.at(0, 0), 2);
  EXPECT_DOUBLE_EQ(c.at(1, 1), 7);
  DenseMatrix zero(2, 2);
  set_col_block(a, 1, zero);
  EXPECT_DOUBLE_EQ(a.at(0, 1), 0);
  EXPECT_DOUBLE_EQ(a.at(0, 3), 4);
}

// ---------------------------------------------------------------------------
// RTN quantization

TEST(Quant, PinnedThreeValueExample) {
  DenseMatrix x(1, 3, {1.0, -0.5, 0.25});
  QuantTensor q = rtn_quantize(x, 4, QuantGranularity::PerTensor);
  ASSERT_EQ(q.scales.size(), 1u);
  EXPECT_DOUBLE_EQ(q.scales[0], 1.0 / 7.0);
  EXPECT_EQ(q.codes[0], 7);
  EXPECT_EQ(q.codes[1], -4);  // -3.5 ties to even
  EXPECT_EQ(q.codes[2], 2);   // 1.75 rounds up
  DenseMatrix back = dequantize(q);
  EXPECT_DOUBLE_EQ(back.at(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(back.at(0, 1), -4.0 / 7.0);
  EXPECT_DOUBLE_EQ(back.at(0, 2), 2.0 / 7.0);
}

TEST(Quant, ErrorBoundedByHalfScale) {
  std::mt19937_64 rng(17);
  for (int bits : {4, 8}) {
    for (auto g : {QuantGranularity::PerTensor, QuantGranularity::PerChannel}) {
      DenseMatrix x = random_matrix(rng, 24, 16, -3.0, 3.0);
      QuantTensor q = rtn_quantize(x, bits, g);
      DenseMatrix back = dequantize(q);
      for (std::size_t r = 0; r < x.rows; ++r)
        for (std::size_t c = 0; c < x.cols; ++c) {
          double s = q.scale_for_col(c);
          EXPECT_LE(std::fabs(back.at(r, c) - x.at(r, c)), 0.5 * s + 1e-12);
        }
    }
  }
}

TEST(Quant, NegationClosure) {
  std::mt19937_64 rng(19);
  DenseMatrix x = random_matrix(rng, 8, 8, -2.0, 2.0);
  QuantTensor qp = rtn_quantize(x, 4, QuantGranularity::PerChannel);
  QuantTensor qn = rtn_quantize(scale(x, -1.0), 4, QuantGranularity::PerChannel);
  const int qmax = quant_code_max(4);
  for (std::size_t i = 0; i < qp.codes.size(); ++i) {
    EXPECT_EQ(int(qp.codes[i]), -int(qn.codes[i]));
    EXPECT_LE(std::abs(int(qp.codes[i])), qmax);  // -8 never appears at 4 bits
  }
}

TEST(Quant, AllZeroChannelGetsUnitScale) {
  DenseMatrix x(3, 2, {0, 1, 0, -1, 0, 0.5});
  QuantTensor q = rtn_quantize(x, 8, QuantGranularity::PerChannel);
  EXPECT_DOUBLE_EQ(q.scales[0], 1.0);
  EXPECT_EQ(q.codes[0], 0);
  EXPECT_EQ(q.codes[2], 0);
  EXPECT_EQ(q.codes[4], 0);
}

TEST(Quant, GranularityScaleCounts) {
  DenseMatrix x(4, 6);
  x.at(0, 0) = 1.0;
  EXPECT_EQ(rtn_quantize(x, 8, QuantGranularity::PerTensor).scales.size(), 1u);
  EXPECT_EQ(rtn_quantize(x, 8, QuantGranularity::PerChannel).scales.size(), 6u);
}

TEST(Quant, BitWidthValidation) {
  DenseMatrix x(1, 1, {1.0});
  EXPECT_THROW(rtn_quantize(x, 1, QuantGranularity::PerTensor), std::invalid_argument);
  EXPECT_THROW(rtn_quantize(x, 9, QuantGranularity::PerTensor), std::invalid_argument);
}

TEST(Quant, IntMatmulMatchesDequantizedMatmul) {
  std::mt19937_64 rng(23);
  DenseMatrix a = random_matrix(rng, 9, 33, -4.0, 4.0);
  DenseMatrix w = random_matrix(rng, 33, 17, -0.5, 0.5);
  QuantTensor qa = rtn_quantize(a, 8, QuantGranularity::PerTensor);
  QuantTensor qw = rtn_quantize(w, 4, QuantGranularity::PerChannel);
  DenseMatrix fast = int_matmul_dequant(qa, qw);
  DenseMatrix slow = matmul(dequantize(qa), dequantize(qw));
  EXPECT_LE(max_rel_diff(fast, slow), 1e-12);
}

// ---------------------------------------------------------------------------
// tensor dumps

TEST(TensorIo, F64RoundTrip) {
  std::mt19937_64 rng(29);
  DenseMatrix m = random_matrix(rng, 3, 5, -10.0, 10.0);
  std::string path = testing::TempDir() + "vq3t_io_f64.bin";
  dump_tensor(path, m);
  DenseMatrix back = load_tensor(path);
  EXPECT_EQ(back.rows, m.rows);
  EXPECT_EQ(back.cols, m.cols);
  EXPECT_EQ(back.data, m.data);  // bit-exact payload
}

TEST(TensorIo, Bf16PayloadNarrows) {
  DenseMatrix m(1, 2, {1.0, 1.0 + 0x1.0p-10});
  std::string path = testing::TempDir() + "vq3t_io_bf16.bin";
  dump_tensor(path, m, TensorDType::Bf16);
  DenseMatrix back = load_tensor(path);
  EXPECT_DOUBLE_EQ(back.at(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(back.at(0, 1), 1.0);  // tail below bf16 precision is rounded away
}

TEST(TensorIo, CodesRoundTrip) {
  std::vector<int8_t> codes = {-7, 0, 7, 3, -1, 2};
  std::string path = testing::TempDir() + "vq3t_io_i8.bin";
  dump_codes(path, 2, 3, codes);
  std::size_t r = 0, c = 0;
  auto back = load_codes(path, r, c);
  EXPECT_EQ(r, 2u);
  EXPECT_EQ(c, 3u);
  EXPECT_EQ(back, codes);
}

TEST(TensorIo, RejectsBadMagicAndTruncation) {
  std::string bad = testing::TempDir() + "vq3t_io_bad.bin";
  {
    std::ofstream os(bad, std::ios::binary);
    os.write("NOPE", 4);
  }
  EXPECT_THROW(load_tensor(bad), std::runtime_error);

  std::string trunc = testing::TempDir() + "vq3t_io_trunc.bin";
  {
    DenseMatrix m(4, 4);
    dump_tensor(trunc, m);
    // chop the payload short
    std::ifstream is(trunc, std::ios::binary);
    std::string all((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    std::ofstream os(trunc, std::ios::binary | std::ios::trunc);
    os.write(all.data(), std::streamsize(all.size() / 2));
  }
  EXPECT_THROW(load_tensor(trunc), std::runtime_error);

  std::string wrongtype = testing::TempDir() + "vq3t_io_codes.bin";
  dump_codes(wrongtype, 1, 2, {1, 2});
  EXPECT_THROW(load_tensor(wrongtype), std::runtime_error);
}
