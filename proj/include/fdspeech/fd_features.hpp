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

// First-digit (FD) features of quantized cepstral coefficients.
//
// For every selected coefficient f, base b and quantization step delta the
// coefficient track m_w(f) over frames is scaled to m_w(f)/delta, the leading
// base-b digit of every non-zero value is taken, and the digit histogram is
// compared against the best-fitting generalized Benford curve
//
//     p_hat(d) = beta * log_b(1 + 1 / (gamma + d^exponent)),  d = 1..b-1
//
// with four measures: symmetric KL, symmetrized Renyi and Tsallis divergences
// of order alpha, and the mean squared error.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fdspeech/cepstral.hpp"

namespace fdspeech {

struct FdConfig {
  std::vector<int> bases = {10, 20};
  std::vector<double> deltas = {1.0, 2.0, 3.0, 4.0};
  double alpha = 0.3;
  double epsilon = 1e-10;
  std::size_t min_digits = 10;

  void Validate() const;  // throws kInvalidConfig
};

// m / delta, with no rounding.
inline double Quantize(double m, double delta) { return m / delta; }

// Leading base-`base` digit of |x|, in 1..base-1. Throws kZeroValue for 0 and
// kDomainError for non-finite x or base < 2.
int FirstDigit(double x, int base);

struct DigitPmf {
  int base = 10;
  std::vector<double> probabilities;  // index d-1 for digit d
  std::size_t count = 0;

  double operator()(int digit) const { return probabilities[digit - 1]; }
};

// Histogram of first digits of values[i]/delta over the non-zero entries,
// normalized by the number of contributing values.
// Throws kInsufficientDigits when fewer than `min_digits` values contribute.
DigitPmf BuildDigitPmf(std::span<const double> values, double delta, int base,
                       std::size_t min_digits);

struct BenfordParams {
  double beta = 1.0;
  double gamma = 0.0;
  double exponent = 1.0;
};

// beta * log_base(1 + 1/(gamma + d^exponent)). Throws kDomainError when
// gamma + d^exponent <= 0.
double BenfordIdeal(int digit, int base, const BenfordParams& params);

// The curve evaluated at d = 1..base-1.
std::vector<double> BenfordCurve(int base, const BenfordParams& params);

struct BenfordFit {
  BenfordParams params;
  double residual_mse = 0.0;
  bool converged = false;
  int iterations = 0;
};

struct FitOptions {
  int max_iterations = 2000;
  double diameter_tolerance = 1e-9;
};

// Least-squares fit of the generalized Benford curve to `pmf` by Nelder-Mead
// simplex descent from (1, 0, 1). Points with gamma + d^exponent <= 0 for some
// digit are infeasible and never accepted. If the simplex has not shrunk
// below the tolerance within the iteration cap the starting point is
// returned with converged == false.
BenfordFit FitBenford(const DigitPmf& pmf, const FitOptions& options = {});

struct DivergenceSet {
  double js = 0.0;       // KL(p||q) + KL(q||p), nats
  double renyi = 0.0;
  double tsallis = 0.0;
  double mse = 0.0;
};

inline constexpr std::array<std::string_view, 4> kDivergenceNames = {"js", "renyi",
                                                                     "tsallis", "mse"};

// Both distributions are floored at `epsilon` and renormalized before the
// ratio-based measures; the mse uses the raw values.
DivergenceSet Divergences(std::span<const double> p, std::span<const double> q,
                          double alpha, double epsilon);
DivergenceSet Divergences(const DigitPmf& pmf, const BenfordFit& fit, double alpha,
                          double epsilon);

struct FeatureDescriptor {
  std::string divergence;
  int frequency = 0;
  int base = 0;
  double delta = 0.0;

  std::string Name() const;  // e.g. "js_f2_b10_d1"
};

// Column order: frequency, then base, then delta, then divergence
// (js, renyi, tsallis, mse), each in the order given by the configs.
std::vector<FeatureDescriptor> FeatureLayout(std::span<const int> frequencies,
                                             const FdConfig& config);

// Stable 64-bit FNV-1a digest of the layout's column names, as 16 hex digits.
std::string LayoutHash(std::span<const FeatureDescriptor> layout);

struct FeatureVector {
  std::vector<double> values;
  std::vector<FeatureDescriptor> layout;
  std::size_t diverged_fits = 0;
};

// Throws kInsufficientDigits naming the offending (f, b, delta) when any
// coefficient track has too few non-zero quantized values.
FeatureVector AssembleFeatures(const CepstralMatrix& matrix, const FdConfig& config);

std::string FormatDelta(double delta);

}  // namespace fdspeech
