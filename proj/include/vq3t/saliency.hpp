#pragma once
// Activation saliency profiling plus the synthetic distribution generators
// used throughout the tests and the CLI. The two activation pathologies are
// kept distinct on purpose: SaturatedChannels keeps whole channels large in
// every row (the per-tensor scale is then dominated by a few channels), while
// SpikyOutliers inflates isolated entries (large max, quiet percentile band).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "vq3t/hadamard.hpp"
#include "vq3t/matrix.hpp"
#include "vq3t/rng.hpp"

namespace vq3t {

struct ChannelBand {
  double min = 0.0;
  double p25 = 0.0;
  double p75 = 0.0;
  double max = 0.0;
};

struct SaliencyProfile {
  std::vector<double> channel_variance;  // population variance per channel
  std::vector<ChannelBand> bands;
};

namespace detail {
// Linear-interpolation quantile on a sorted vector, q in [0, 1].
inline double quantile_sorted(const std::vector<double>& v, double q) {
  double h = q * double(v.size() - 1);
  std::size_t lo = std::size_t(h);
  double frac = h - double(lo);
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}
}  // namespace detail

inline SaliencyProfile channel_saliency(const DenseMatrix& x) {
  if (x.rows < 2)
    throw std::invalid_argument("channel_saliency: need at least 2 rows per channel");
  SaliencyProfile p;
  p.channel_variance.resize(x.cols);
  p.bands.resize(x.cols);
  std::vector<double> col(x.rows);
  for (std::size_t c = 0; c < x.cols; ++c) {
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t r = 0; r < x.rows; ++r) {
      col[r] = x.at(r, c);
      sum += col[r];
      sum2 += col[r] * col[r];
    }
    double mean = sum / double(x.rows);
    double var = sum2 / double(x.rows) - mean * mean;
    p.channel_variance[c] = var < 0.0 ? 0.0 : var;
    std::sort(col.begin(), col.end());
    p.bands[c].min = col.front();
    p.bands[c].max = col.back();
    p.bands[c].p25 = detail::quantile_sorted(col, 0.25);
    p.bands[c].p75 = detail::quantile_sorted(col, 0.75);
  }
  return p;
}

enum class SynthKind { Gaussian, SaturatedChannels, SpikyOutliers };

struct SynthParams {
  double channel_fraction = 0.05;  // SaturatedChannels: share of inflated channels
  double entry_fraction = 0.001;   // SpikyOutliers: share of inflated entries
  double factor = 20.0;            // inflation factor for both kinds
};

inline DenseMatrix synth_activations(SynthKind kind, std::size_t rows, std::size_t cols,
                                     std::uint64_t seed, const SynthParams& sp = {}) {
  if (rows == 0 || cols == 0)
    throw std::invalid_argument("synth_activations: rows and cols must be >= 1");
  Rng rng(seed);
  DenseMatrix x(rows, cols);
  for (double& v : x.data) v = rng.normal();

  if (kind == SynthKind::SaturatedChannels) {
    std::size_t n = std::max<std::size_t>(1, std::size_t(sp.channel_fraction * double(cols) + 0.5));
    n = std::min(n, cols);
    std::vector<bool> taken(cols, false);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t c;
      do { c = std::size_t(rng.index(cols)); } while (taken[c]);
      taken[c] = true;
      for (std::size_t r = 0; r < rows; ++r) x.at(r, c) *= sp.factor;
    }
  } else if (kind == SynthKind::SpikyOutliers) {
    std::size_t total = rows * cols;
    std::size_t n = std::max<std::size_t>(1, std::size_t(sp.entry_fraction * double(total) + 0.5));
    n = std::min(n, total);
    std::vector<bool> taken(total, false);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t e;
      do { e = std::size_t(rng.index(total)); } while (taken[e]);
      taken[e] = true;
      x.data[e] *= sp.factor;
    }
  }
  return x;
}

// Synthetic linear-layer weights with the two kinds of structure that make
// the transform choice matter. A plain i.i.d. Gaussian matrix is rotation
// invariant, so every method quantizes it equally well on average; real
// checkpoints are not like that.
//
// Heavy rows: a few input channels carry inflated weights across whole
// column groups. They raise every per-output-channel scale and degrade the
// Gaussian mass, and the input-side Hadamard spreads them flat again (the
// incoherence effect).
//
// Salient columns: full-strength Gaussian mass plus a component that is
// constant on dyadic channel groups (a single Walsh coefficient). The same
// Hadamard concentrates that component into one large coefficient, which
// inflates the channel scale and degrades the Gaussian mass sharing the
// column; the output-side DCT spreads the spike back across its channel
// group and restores a balanced scale. Distinct Walsh indices per group
// keep the spikes on distinct rows so the spreading cannot re-concentrate.
struct WeightStructure {
  double salient_fraction = 0.125;   // salient columns per output group
  double amplitude = 1.2;            // salient magnitude relative to base sigma
  std::size_t group = 32;            // output-channel group (the on-chip IDCT span)
  double heavy_row_fraction = 0.05;  // input channels with inflated weights
  double heavy_row_scale = 4.0;      // sigma multiplier on those channels
};

inline DenseMatrix synth_weights(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                 const WeightStructure& ws = {}) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("synth_weights: empty shape");
  if (!is_power_of_two(rows))
    throw std::invalid_argument("synth_weights: input channels must be a power of two");
  Rng rng(seed);
  DenseMatrix w(rows, cols);
  for (double& v : w.data) v = rng.normal();

  std::size_t heavy = std::size_t(ws.heavy_row_fraction * double(rows) + 0.5);
  std::vector<bool> row_taken(rows, false);
  for (std::size_t i = 0; i < heavy; ++i) {
    std::size_t r;
    do { r = std::size_t(rng.index(rows)); } while (row_taken[r]);
    row_taken[r] = true;
    for (std::size_t c = 0; c < cols; ++c) w.at(r, c) *= ws.heavy_row_scale;
  }

  std::size_t group = std::min(ws.group, cols);
  std::size_t per_group = std::min<std::size_t>(
      rows - 1, std::size_t(ws.salient_fraction * double(group) + 0.5));
  for (std::size_t g0 = 0; g0 < cols; g0 += group) {
    std::size_t gcols = std::min(group, cols - g0);
    std::size_t n = std::min(per_group, gcols);
    std::vector<bool> col_taken(gcols, false);
    std::vector<bool> walsh_taken(rows, false);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t c;
      do { c = std::size_t(rng.index(gcols)); } while (col_taken[c]);
      col_taken[c] = true;
      std::size_t m;
      do { m = 1 + std::size_t(rng.index(rows - 1)); } while (walsh_taken[m]);
      walsh_taken[m] = true;
      double a = ws.amplitude * rng.uniform(0.8, 1.2);
      for (std::size_t k = 0; k < rows; ++k) {
        double sign = (std::popcount(m & k) % 2 == 0) ? 1.0 : -1.0;
        w.at(k, g0 + c) += a * sign;  // added on top of the Gaussian base
      }
    }
  }

  // Rescale to unit variance in expectation so downstream fan-in scaling
  // stays meaningful regardless of the planted structure.
  double fr = double(heavy) / double(rows);
  double row_var = (1.0 - fr) + fr * ws.heavy_row_scale * ws.heavy_row_scale;
  double f = double(per_group) / double(group);
  double total_var = row_var + f * ws.amplitude * ws.amplitude * (1.0 + 0.04 / 3.0);
  return scale(w, 1.0 / std::sqrt(total_var));
}

struct ErrorStats {
  double mse = 0.0;
  double max_abs = 0.0;
  double cosine = 1.0;
};

inline ErrorStats quant_error(const DenseMatrix& reference, const DenseMatrix& test) {
  if (reference.rows != test.rows || reference.cols != test.cols)
    throw std::invalid_argument("quant_error: shape mismatch");
  ErrorStats e;
  double dot = 0.0, na = 0.0, nb = 0.0, se = 0.0;
  for (std::size_t i = 0; i < reference.data.size(); ++i) {
    double a = reference.data[i], b = test.data[i];
    double d = a - b;
    se += d * d;
    e.max_abs = std::max(e.max_abs, std::fabs(d));
    dot += a * b;
    na += a * a;
    nb += b * b;
  }
  e.mse = se / double(reference.data.size());
  if (na == 0.0 && nb == 0.0)
    e.cosine = 1.0;  // identical zero signals
  else if (na == 0.0 || nb == 0.0)
    e.cosine = 0.0;
  else
    e.cosine = dot / (std::sqrt(na) * std::sqrt(nb));
  return e;
}

}  // namespace vq3t
