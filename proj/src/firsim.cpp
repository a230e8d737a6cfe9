// Copyright 2026 The fdspeech Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fdspeech/firsim.hpp"

#include <fmt/format.h>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>

#include "fdspeech/cepstral.hpp"
#include "fdspeech/error.hpp"
#include "fdspeech/fd_features.hpp"
#include "fdspeech/parallel.hpp"

namespace fdspeech {
namespace {

// Exchange arithmetic. With the wide default transition band the optimal
// ripple of long designs (around 1e-14 at 64 taps, 1e-29 at 128) is far
// below double precision, so the exchange runs in 50 significant digits and
// only the final taps are rounded to double.
using Real = boost::multiprecision::cpp_bin_float_50;

// Below this ripple the equiripple error is lost in rounding noise.
const Real kRippleFloor("1e-40");

// Dense-grid description of the approximation problem in the cosine domain.
// For even lengths the response is cos(w/2) * Q(w), so Q approximates
// D / cos(w/2) under weight W * cos(w/2).
struct Grid {
  std::vector<Real> x;  // cos(omega)
  std::vector<Real> desired;
  std::vector<Real> weight;
  std::vector<std::size_t> band_start;  // first grid index of each band
};

Grid BuildGrid(const FirDesignSpec& spec, int n_basis, bool even_length) {
  const Real pi = boost::math::constants::pi<Real>();
  const Real bands[2][2] = {{Real(0), Real(spec.passband_edge) * pi},
                            {Real(spec.stopband_edge) * pi, pi}};
  const double gains[2] = {1.0, 0.0};
  const Real total = (bands[0][1] - bands[0][0]) + (bands[1][1] - bands[1][0]);
  const Real step = total / (spec.grid_density * n_basis);
  Grid g;
  for (int b = 0; b < 2; ++b) {
    const Real lo = bands[b][0];
    Real hi = bands[b][1];
    // cos(w/2) vanishes at pi for even lengths; stop the grid one step short.
    if (even_length && b == 1) hi -= step;
    const int points =
        std::max(3, static_cast<int>(ceil((hi - lo) / step).convert_to<double>()) + 1);
    g.band_start.push_back(g.x.size());
    for (int i = 0; i < points; ++i) {
      const Real w = lo + (hi - lo) * i / (points - 1);
      Real d = gains[b], wt = 1;
      if (even_length) {
        const Real c = cos(w / 2);
        d /= c;
        wt *= c;
      }
      g.x.push_back(cos(w));
      g.desired.push_back(d);
      g.weight.push_back(wt);
    }
  }
  return g;
}

// Barycentric weights 1 / prod_{j != k} 2 (x_k - x_j). The common factor
// 2^(n-1) cancels in every ratio that uses them and keeps products in range.
std::vector<Real> BaryWeights(std::span<const Real> x) {
  std::vector<Real> w(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    Real prod = 1;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (j != k) prod *= 2 * (x[k] - x[j]);
    }
    w[k] = 1 / prod;
  }
  return w;
}

struct Interpolant {
  std::vector<Real> x, value, weight;

  Real operator()(const Real& at) const {
    Real num = 0, den = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const Real diff = at - x[k];
      if (diff == 0) return value[k];
      const Real t = weight[k] / diff;
      num += t * value[k];
      den += t;
    }
    return num / den;
  }
};

// Local extrema of the weighted error with alternating signs, band edges
// included.
std::vector<std::size_t> FindExtrema(const Grid& g, std::span<const Real> err) {
  std::vector<std::size_t> cand;
  const std::size_t n = err.size();
  for (std::size_t b = 0; b < g.band_start.size(); ++b) {
    const std::size_t lo = g.band_start[b];
    const std::size_t hi = b + 1 < g.band_start.size() ? g.band_start[b + 1] : n;
    for (std::size_t i = lo; i < hi; ++i) {
      const Real& e = err[i];
      const bool ge_prev = i == lo || (e > 0 ? e >= err[i - 1] : e <= err[i - 1]);
      const bool gt_next = i + 1 == hi || (e > 0 ? e > err[i + 1] : e < err[i + 1]);
      if (e != 0 && ge_prev && gt_next) cand.push_back(i);
    }
  }
  // Merge runs of equal sign, keeping the largest magnitude.
  std::vector<std::size_t> alt;
  for (std::size_t i : cand) {
    if (!alt.empty() && (err[alt.back()] > 0) == (err[i] > 0)) {
      if (abs(err[i]) > abs(err[alt.back()])) alt.back() = i;
    } else {
      alt.push_back(i);
    }
  }
  return alt;
}

void TrimExtrema(std::vector<std::size_t>& ext, std::span<const Real> err,
                 std::size_t wanted) {
  while (ext.size() > wanted) {
    const std::size_t excess = ext.size() - wanted;
    std::size_t smallest = 0;
    for (std::size_t i = 1; i < ext.size(); ++i) {
      if (abs(err[ext[i]]) < abs(err[ext[smallest]])) smallest = i;
    }
    const bool at_end = smallest == 0 || smallest + 1 == ext.size();
    if (at_end || excess < 2) {
      // Dropping an end point keeps the alternation intact.
      if (abs(err[ext.front()]) < abs(err[ext.back()])) {
        ext.erase(ext.begin());
      } else {
        ext.pop_back();
      }
      continue;
    }
    // Removing an interior point makes its neighbours share a sign; drop the
    // weaker of the two as well.
    const std::size_t a = smallest - 1, b = smallest + 1;
    const std::size_t weaker = abs(err[ext[a]]) < abs(err[ext[b]]) ? a : b;
    ext.erase(ext.begin() + std::max(smallest, weaker));
    ext.erase(ext.begin() + std::min(smallest, weaker));
  }
}

double Sq(double v) { return v * v; }

}  // namespace

void FirDesignSpec::Validate() const {
  if (n_coeffs < 3) throw Error(ErrorCode::kInvalidConfig, "n_coeffs must be >= 3");
  if (!(passband_edge > 0.0 && passband_edge < stopband_edge && stopband_edge < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "band edges must satisfy 0 < pass < stop < 1");
  }
  if (grid_density < 1 || max_iterations < 1) {
    throw Error(ErrorCode::kInvalidConfig, "grid density and iteration cap must be >= 1");
  }
}

FirDesign DesignLowpass(const FirDesignSpec& spec) {
  spec.Validate();
  const int n = spec.n_coeffs;
  const bool even_length = n % 2 == 0;
  const int n_basis = even_length ? n / 2 : (n + 1) / 2;  // cosine terms
  const Grid g = BuildGrid(spec, n_basis, even_length);
  const std::size_t m = g.x.size();
  const std::size_t n_ext = static_cast<std::size_t>(n_basis) + 1;
  if (m < 2 * n_ext) throw Error(ErrorCode::kDesignFailure, "frequency grid too coarse");

  std::vector<std::size_t> ext(n_ext);
  for (std::size_t k = 0; k < n_ext; ++k) ext[k] = k * (m - 1) / (n_ext - 1);

  std::vector<Real> err(m);
  Interpolant poly;
  FirDesign design;
  bool settled = false;
  for (int iter = 1; iter <= spec.max_iterations; ++iter) {
    design.iterations = iter;
    std::vector<Real> x(n_ext);
    for (std::size_t k = 0; k < n_ext; ++k) x[k] = g.x[ext[k]];
    const auto a = BaryWeights(x);
    Real num = 0, den = 0;
    for (std::size_t k = 0; k < n_ext; ++k) {
      num += a[k] * g.desired[ext[k]];
      den += (k % 2 == 0 ? a[k] : -a[k]) / g.weight[ext[k]];
    }
    const Real delta = num / den;

    poly.x.assign(x.begin(), x.end() - 1);
    poly.weight = BaryWeights(poly.x);
    poly.value.resize(n_basis);
    for (int k = 0; k < n_basis; ++k) {
      const Real shift = delta / g.weight[ext[k]];
      poly.value[k] = g.desired[ext[k]] - (k % 2 == 0 ? shift : -shift);
    }
    Real max_err = 0;
    for (std::size_t i = 0; i < m; ++i) {
      err[i] = g.weight[i] * (g.desired[i] - poly(g.x[i]));
      if (abs(err[i]) > max_err) max_err = abs(err[i]);
    }
    const Real ripple = abs(delta);
    design.ripple = ripple.convert_to<double>();

    if (ripple < kRippleFloor || max_err - ripple <= Real("1e-9") * ripple) {
      settled = true;
      break;
    }
    auto next = FindExtrema(g, err);
    if (next.size() < n_ext) {
      throw Error(ErrorCode::kDesignFailure,
                  fmt::format("N={}: only {} alternating extrema", n, next.size()));
    }
    TrimExtrema(next, err, n_ext);
    if (next == ext) {
      settled = true;
      break;
    }
    ext = std::move(next);
  }
  if (!settled) {
    throw Error(ErrorCode::kDesignFailure,
                fmt::format("N={}: exchange did not settle in {} iterations", n,
                            spec.max_iterations));
  }

  // Cosine-series coefficients of the interpolant from samples at
  // w_j = pi j / L (inverse DCT-I).
  const Real pi = boost::math::constants::pi<Real>();
  const int l = n_basis - 1;
  std::vector<Real> coef(n_basis, Real(0));
  if (l == 0) {
    coef[0] = poly(Real(1));
  } else {
    std::vector<Real> samples(n_basis);
    for (int j = 0; j <= l; ++j) samples[j] = poly(cos(pi * j / l));
    for (int k = 0; k <= l; ++k) {
      Real s = 0;
      for (int j = 0; j <= l; ++j) {
        const Real term = samples[j] * cos(pi * ((j * k) % (2 * l)) / l);
        s += (j == 0 || j == l) ? term / 2 : term;
      }
      coef[k] = s * ((k == 0 || k == l) ? 1 : 2) / l;
    }
  }

  design.taps.assign(n, 0.0);
  auto set_pair = [&](int i, const Real& v) {
    design.taps[i] = v.convert_to<double>();
    design.taps[n - 1 - i] = design.taps[i];
  };
  if (!even_length) {
    set_pair(l, coef[0]);
    for (int k = 1; k <= l; ++k) set_pair(l - k, coef[k] / 2);
  } else {
    // cos(w/2) cos(kw) = (cos((k+1/2)w) + cos((k-1/2)w)) / 2
    const int r = n_basis;
    std::vector<Real> c(r + 1, Real(0));  // c[i] multiplies cos((i - 1/2) w)
    c[1] += coef[0];
    for (int k = 1; k < r; ++k) {
      c[k + 1] += coef[k] / 2;
      c[k] += coef[k] / 2;
    }
    for (int i = 1; i <= r; ++i) set_pair(r - i, c[i] / 2);
  }
  return design;
}

double MagnitudeResponse(std::span<const double> taps, double f) {
  std::complex<double> acc = 0.0;
  const double w = std::numbers::pi * f;
  for (std::size_t k = 0; k < taps.size(); ++k) {
    acc += taps[k] * std::polar(1.0, -w * static_cast<double>(k));
  }
  return std::abs(acc);
}

std::vector<double> GaussianSamples(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out(n);
  for (double& v : out) v = normal(rng);
  return out;
}

AudioBuffer GaussianSource(std::size_t n, std::uint64_t seed) {
  AudioBuffer buf{GaussianSamples(n, seed), kRequiredSampleRate,
                  fmt::format("gauss_{}", seed)};
  return PeakNormalize(buf);
}

AudioBuffer ApplyFir(const AudioBuffer& buffer, std::span<const double> taps) {
  if (taps.empty()) throw Error(ErrorCode::kInvalidConfig, "empty FIR");
  AudioBuffer out{std::vector<double>(buffer.size(), 0.0), buffer.sample_rate,
                  buffer.source_id};
  const std::size_t k = taps.size();
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    const std::size_t span = std::min(k, i + 1);
    double acc = 0.0;
    for (std::size_t j = 0; j < span; ++j) acc += taps[j] * buffer.samples[i - j];
    out.samples[i] = acc;
  }
  return PeakNormalize(out);
}

std::uint64_t TrialSeed(std::uint64_t seed, std::uint64_t cell, std::uint64_t trial) {
  // SplitMix64 finalizer over a mixed key.
  std::uint64_t z = seed ^ (cell * 0x9E3779B97F4A7C15ULL) ^ (trial * 0xD1B54A32D192ED03ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SweepResult DivergenceSweep(const SweepOptions& options) {
  if (options.n_trials < 1 || options.n_coeffs.empty() || options.deltas.empty() ||
      options.frequencies.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "sweep needs lengths, deltas, frequencies, trials");
  }
  CepstralConfig cepstral;
  cepstral.coeff_lo = *std::min_element(options.frequencies.begin(), options.frequencies.end());
  cepstral.coeff_hi = *std::max_element(options.frequencies.begin(), options.frequencies.end());
  cepstral.Validate();

  std::vector<std::vector<double>> filters;
  for (int nc : options.n_coeffs) {
    FirDesignSpec spec;
    spec.n_coeffs = nc;
    filters.push_back(DesignLowpass(spec).taps);
  }

  const std::size_t n_nc = options.n_coeffs.size();
  const std::size_t n_trials = options.n_trials;
  const std::size_t n_d = options.deltas.size();
  const std::size_t n_f = options.frequencies.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  // values[(cell * n_trials + trial) * n_d * n_f + d * n_f + f]
  std::vector<double> values(n_nc * n_trials * n_d * n_f, nan);

  ParallelFor(n_nc * n_trials, options.jobs, [&](std::size_t task) {
    const std::size_t cell = task / n_trials, trial = task % n_trials;
    const AudioBuffer source =
        GaussianSource(options.signal_len, TrialSeed(options.seed, cell, trial));
    const AudioBuffer filtered = ApplyFir(source, filters[cell]);
    MfccExtractor extractor(cepstral);
    CepstralMatrix mfcc;
    try {
      mfcc = extractor.Compute(filtered);
    } catch (const Error&) {
      return;
    }
    for (std::size_t d = 0; d < n_d; ++d) {
      for (std::size_t f = 0; f < n_f; ++f) {
        const auto column = mfcc.column(options.frequencies[f] - cepstral.coeff_lo);
        try {
          const DigitPmf pmf = BuildDigitPmf(column, options.deltas[d], options.base, 10);
          const BenfordFit fit = FitBenford(pmf);
          values[task * n_d * n_f + d * n_f + f] =
              Divergences(pmf, fit, 0.3, 1e-10).js;
        } catch (const Error&) {
          // A failed trial leaves NaN and is excluded from the cell.
        }
      }
    }
  });

  SweepResult result;
  for (std::size_t d = 0; d < n_d; ++d) {
    for (std::size_t f = 0; f < n_f; ++f) {
      for (std::size_t cell = 0; cell < n_nc; ++cell) {
        std::vector<double> ok;
        for (std::size_t t = 0; t < n_trials; ++t) {
          const double v = values[(cell * n_trials + t) * n_d * n_f + d * n_f + f];
          if (!std::isnan(v)) ok.push_back(v);
        }
        if (ok.empty()) {
          throw Error(ErrorCode::kInsufficientData,
                      fmt::format("every trial failed for N={} delta={} f={}",
                                  options.n_coeffs[cell], FormatDelta(options.deltas[d]),
                                  options.frequencies[f]));
        }
        const double mean = std::accumulate(ok.begin(), ok.end(), 0.0) / ok.size();
        double var = 0.0;
        for (double v : ok) var += Sq(v - mean);
        const double sd = ok.size() > 1 ? std::sqrt(var / (ok.size() - 1)) : 0.0;
        result.rows.push_back({options.n_coeffs[cell], options.deltas[d],
                               options.frequencies[f], mean, sd,
                               static_cast<int>(ok.size())});
      }
    }
  }
  std::stable_sort(result.rows.begin(), result.rows.end(),
                   [](const SweepRow& a, const SweepRow& b) {
                     if (a.delta != b.delta) return a.delta < b.delta;
                     if (a.frequency != b.frequency) return a.frequency < b.frequency;
                     return a.n_coeffs < b.n_coeffs;
                   });
  return result;
}

void WriteSweepCsv(std::ostream& out, const SweepResult& result) {
  out << "n_coeffs,delta,frequency,js_mean,js_std,n_trials\n";
  for (const auto& r : result.rows) {
    out << fmt::format("{},{},{},{},{},{}\n", r.n_coeffs, FormatDelta(r.delta), r.frequency,
                       r.js_mean, r.js_std, r.n_trials);
  }
}

double SpearmanRho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::kDomainError, "Spearman needs two equal-length samples");
  }
  auto ranks = [](std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / rx.size();
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / ry.size();
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += Sq(rx[i] - mx);
    syy += Sq(ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace fdspeech
