// Walsh-Hadamard and DCT transforms: orthogonality, fast-path agreement with
// the dense matrices, and the integer (HEVC core) variant's compensated
// round trip.

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <random>

#include "vq3t/dct.hpp"
#include "vq3t/hadamard.hpp"
#include "vq3t/matrix.hpp"

using namespace vq3t;

namespace {

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

// Independent construction of the Sylvester-ordered Hadamard matrix:
// H[i][j] = (-1)^popcount(i & j) / sqrt(n). Used as an oracle against the
// Kronecker-recursion builder.
DenseMatrix hadamard_popcount_oracle(std::size_t n) {
  DenseMatrix h(n, n);
  double s = 1.0 / std::sqrt(double(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      h.at(i, j) = (std::popcount(i & j) % 2 == 0) ? s : -s;
  return h;
}

double max_offdiag_dev_from_identity(const DenseMatrix& m) {
  double dev = 0.0;
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) {
      double want = r == c ? 1.0 : 0.0;
      dev = std::max(dev, std::fabs(m.at(r, c) - want));
    }
  return dev;
}

}  // namespace

// ---------------------------------------------------------------------------
// Hadamard

TEST(Hadamard, SmallOrdersExact) {
  DenseMatrix h1 = hadamard_matrix(1);
  EXPECT_DOUBLE_EQ(h1.at(0, 0), 1.0);

  DenseMatrix h2 = hadamard_matrix(2);
  double r = 1.0 / std::sqrt(2.0);
  EXPECT_DOUBLE_EQ(h2.at(0, 0), r);
  EXPECT_DOUBLE_EQ(h2.at(0, 1), r);
  EXPECT_DOUBLE_EQ(h2.at(1, 0), r);
  EXPECT_DOUBLE_EQ(h2.at(1, 1), -r);

  // Order 4 entries are exactly +-0.5.
  DenseMatrix h4 = hadamard_matrix(4);
  double want[4][4] = {{1, 1, 1, 1}, {1, -1, 1, -1}, {1, 1, -1, -1}, {1, -1, -1, 1}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(h4.at(i, j), 0.5 * want[i][j]);
}

TEST(Hadamard, MatchesPopcountOracle) {
  for (std::size_t n : {8u, 64u, 128u}) {
    DenseMatrix h = hadamard_matrix(n);
    DenseMatrix o = hadamard_popcount_oracle(n);
    EXPECT_LE(max_abs_diff(h, o), 0.0) << "order " << n;  // same construction, bit-identical
  }
}

TEST(Hadamard, OrthogonalUpToLargeOrders) {
  for (std::size_t n = 2; n <= 1024; n <<= 1) {
    DenseMatrix h = hadamard_matrix(n);
    DenseMatrix g = matmul(h, transpose(h));
    EXPECT_LT(max_offdiag_dev_from_identity(g), 1e-12) << "order " << n;
  }
}

TEST(Hadamard, FastPathMatchesDense) {
  std::mt19937_64 rng(31);
  for (std::size_t n : {2u, 8u, 64u, 256u, 1024u}) {
    DenseMatrix x = random_matrix(rng, 3, n, -5.0, 5.0);
    DenseMatrix fast = apply_wht(x, Axis::Rows);
    DenseMatrix dense = matmul(x, hadamard_matrix(n));
    EXPECT_LE(max_rel_diff(fast, dense), 1e-10) << "order " << n;
  }
}

TEST(Hadamard, PinnedVectors) {
  DenseMatrix ones(1, 4, {1, 1, 1, 1});
  DenseMatrix t = apply_wht(ones, Axis::Rows);
  EXPECT_NEAR(t.at(0, 0), 2.0, 1e-15);
  for (int j = 1; j < 4; ++j) EXPECT_NEAR(t.at(0, j), 0.0, 1e-15);

  DenseMatrix spike(1, 4, {1, 0, 0, 0});
  DenseMatrix s = apply_wht(spike, Axis::Rows);
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(s.at(0, j), 0.5, 1e-15);
}

TEST(Hadamard, InvolutionAndParseval) {
  std::mt19937_64 rng(37);
  DenseMatrix x = random_matrix(rng, 4, 128, -2.0, 2.0);
  DenseMatrix t = apply_wht(x, Axis::Rows);
  EXPECT_NEAR(frobenius_norm(t), frobenius_norm(x), 1e-12);
  DenseMatrix back = apply_wht(t, Axis::Rows);
  EXPECT_LE(max_abs_diff(back, x), 1e-12);
}

TEST(Hadamard, ColumnAxis) {
  std::mt19937_64 rng(41);
  DenseMatrix x = random_matrix(rng, 16, 3);
  DenseMatrix fast = apply_wht(x, Axis::Cols);
  DenseMatrix dense = matmul(hadamard_matrix(16), x);
  EXPECT_LE(max_abs_diff(fast, dense), 1e-12);
}

TEST(Hadamard, SpikeSpreadsUniformly) {
  // A single outlier coordinate of magnitude 20 becomes 20/sqrt(n)
  // everywhere: the transform's incoherence in one picture.
  DenseMatrix x(1, 64);
  x.at(0, 13) = 20.0;
  DenseMatrix t = apply_wht(x, Axis::Rows);
  for (std::size_t j = 0; j < 64; ++j) EXPECT_NEAR(std::fabs(t.at(0, j)), 2.5, 1e-12);
}

TEST(Hadamard, PerHeadBlocks) {
  std::mt19937_64 rng(43);
  DenseMatrix x = random_matrix(rng, 5, 32);
  DenseMatrix fast = apply_wht_per_head(x, 8);
  DenseMatrix dense = matmul(x, block_hadamard_matrix(32, 8));
  EXPECT_LE(max_abs_diff(fast, dense), 1e-12);
}

TEST(Hadamard, RejectsNonPowerOfTwo) {
  DenseMatrix x(2, 6);
  EXPECT_THROW(apply_wht(x, Axis::Rows), std::invalid_argument);
  EXPECT_THROW(hadamard_matrix(0), std::invalid_argument);
  EXPECT_THROW(hadamard_matrix(12), std::invalid_argument);
  EXPECT_THROW(apply_wht_per_head(x, 4), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// DCT

TEST(Dct, OrderTwoEqualsHadamard) {
  DctMatrix d = dct_matrix(2, DctVariant::Orthonormal);
  DenseMatrix h = hadamard_matrix(2);
  EXPECT_LE(max_abs_diff(d.fwd, h), 1e-15);
}

TEST(Dct, OrthonormalBasis) {
  for (std::size_t n : {2u, 3u, 4u, 7u, 8u, 16u, 64u, 512u}) {
    DctMatrix d = dct_matrix(n, DctVariant::Orthonormal);
    DenseMatrix g = matmul(d.fwd, transpose(d.fwd));
    EXPECT_LT(max_offdiag_dev_from_identity(g), 1e-12) << "order " << n;
  }
}

TEST(Dct, OrthonormalRoundTrip) {
  std::mt19937_64 rng(47);
  for (std::size_t n : {3u, 8u, 33u, 64u}) {
    DctMatrix d = dct_matrix(n, DctVariant::Orthonormal);
    DenseMatrix x = random_matrix(rng, 4, n, -3.0, 3.0);
    DenseMatrix back = apply_idct(apply_dct(x, d, Axis::Rows), d, Axis::Rows);
    EXPECT_LE(max_rel_diff(back, x), 1e-10) << "order " << n;
  }
}

TEST(Dct, ConstantSignalCompactsToDc) {
  DctMatrix d = dct_matrix(16, DctVariant::Orthonormal);
  DenseMatrix x(1, 16);
  for (auto& v : x.data) v = 1.0;
  DenseMatrix c = apply_dct(x, d, Axis::Rows);
  EXPECT_NEAR(c.at(0, 0), 4.0, 1e-12);  // sqrt(16) * 1
  for (std::size_t j = 1; j < 16; ++j) EXPECT_NEAR(c.at(0, j), 0.0, 1e-12);
}

TEST(Dct, HevcPinnedRows) {
  DctMatrix d4 = dct_matrix(4, DctVariant::IntegerScaled);
  const double row0[4] = {64, 64, 64, 64};
  const double row1[4] = {83, 36, -36, -83};
  for (int j = 0; j < 4; ++j) {
    EXPECT_DOUBLE_EQ(d4.fwd.at(0, j), row0[j]);
    EXPECT_DOUBLE_EQ(d4.fwd.at(1, j), row1[j]);
  }
  DctMatrix d8 = dct_matrix(8, DctVariant::IntegerScaled);
  const double r81[8] = {89, 75, 50, 18, -18, -50, -75, -89};
  for (int j = 0; j < 8; ++j) EXPECT_DOUBLE_EQ(d8.fwd.at(1, j), r81[j]);
}

TEST(Dct, HevcNearOrthogonal) {
  // D D^T = c I only approximately: the 4-point rows are exactly orthogonal
  // (norms alone deviate), the larger cores also have nonzero cross terms.
  // The worst relative deviation measures at 2.9e-3 (orders 16 and 32).
  for (std::size_t n : {4u, 8u, 16u, 32u}) {
    DctMatrix d = dct_matrix(n, DctVariant::IntegerScaled);
    EXPECT_DOUBLE_EQ(d.compensation, 4096.0 * double(n));
    DenseMatrix g = matmul(d.fwd, transpose(d.fwd));
    double dev = 0.0;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) {
        double want = r == c ? d.compensation : 0.0;
        dev = std::max(dev, std::fabs(g.at(r, c) - want) / d.compensation);
      }
    EXPECT_LT(dev, 3.5e-3) << "order " << n;
  }
}

TEST(Dct, HevcCompanionInverse) {
  // inv is a true inverse, and compensation * inv stays within one integer
  // quantum of fwd^T (measured max 0.82 against entries up to 90), i.e. the
  // companion inverse is the transpose/compensation plus a small correction.
  for (std::size_t n : {4u, 8u, 16u, 32u}) {
    DctMatrix d = dct_matrix(n, DctVariant::IntegerScaled);
    DenseMatrix id = matmul(d.inv, d.fwd);
    EXPECT_LT(max_offdiag_dev_from_identity(id), 1e-12) << "order " << n;
    double lead = 0.0;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c)
        lead = std::max(lead, std::fabs(d.compensation * d.inv.at(r, c) - d.fwd.at(c, r)));
    EXPECT_LT(lead, 1.0) << "order " << n;
  }
}

TEST(Dct, HevcCompensatedRoundTrip) {
  std::mt19937_64 rng(53);
  for (std::size_t n : {4u, 8u, 16u, 32u}) {
    DctMatrix d = dct_matrix(n, DctVariant::IntegerScaled);
    DenseMatrix x = random_matrix(rng, 6, n, -2.0, 2.0);
    DenseMatrix back = apply_idct(apply_dct(x, d, Axis::Rows), d, Axis::Rows);
    EXPECT_LE(max_abs_diff(back, x) / max_abs(x), 1e-3) << "order " << n;
  }
}

TEST(Dct, BlockDiagonalVariants) {
  std::mt19937_64 rng(59);
  DenseMatrix x = random_matrix(rng, 3, 96, -2.0, 2.0);

  DctMatrix ortho = block_diagonal_dct(96, 32, DctVariant::Orthonormal);
  DenseMatrix g = matmul(ortho.fwd, transpose(ortho.fwd));
  EXPECT_LT(max_offdiag_dev_from_identity(g), 1e-12);
  DenseMatrix back = apply_idct(apply_dct(x, ortho, Axis::Rows), ortho, Axis::Rows);
  EXPECT_LE(max_rel_diff(back, x), 1e-10);

  DctMatrix integer = block_diagonal_dct(96, 32, DctVariant::IntegerScaled);
  EXPECT_EQ(integer.block_order, 32u);
  DenseMatrix iback = apply_idct(apply_dct(x, integer, Axis::Rows), integer, Axis::Rows);
  EXPECT_LE(max_abs_diff(iback, x) / max_abs(x), 1e-3);

  // Off-block entries stay zero, so channel group b only mixes within itself.
  EXPECT_DOUBLE_EQ(integer.fwd.at(0, 32), 0.0);
  EXPECT_DOUBLE_EQ(integer.fwd.at(40, 0), 0.0);
}

TEST(Dct, ErrorsOnUnsupportedShapes) {
  EXPECT_THROW(dct_matrix(0, DctVariant::Orthonormal), std::invalid_argument);
  EXPECT_THROW(dct_matrix(5, DctVariant::IntegerScaled), std::invalid_argument);
  EXPECT_THROW(dct_matrix(64, DctVariant::IntegerScaled), std::invalid_argument);
  EXPECT_THROW(block_diagonal_dct(70, 32, DctVariant::IntegerScaled), std::invalid_argument);
  DctMatrix d = dct_matrix(8, DctVariant::Orthonormal);
  DenseMatrix x(2, 9);
  EXPECT_THROW(apply_dct(x, d, Axis::Rows), std::invalid_argument);
}
