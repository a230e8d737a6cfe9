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

// Simulation of how FIR filtering shapes first-digit statistics: i.i.d.
// Gaussian noise is low-pass filtered by equiripple FIR designs of growing
// length and the divergence between the digit pmf of its MFCCs and the fitted
// generalized Benford curve is recorded per (length, delta, coefficient).

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "fdspeech/audio_io.hpp"

namespace fdspeech {

struct FirDesignSpec {
  int n_coeffs = 31;
  double passband_edge = 0.2;  // fraction of Nyquist
  double stopband_edge = 0.7;  // fraction of Nyquist
  int grid_density = 16;
  int max_iterations = 50;

  void Validate() const;  // throws kInvalidConfig
};

struct FirDesign {
  std::vector<double> taps;  // symmetric, taps[k] == taps[n-1-k]
  double ripple = 0.0;  // |delta| of the final exchange
  int iterations = 0;
};

// Parks-McClellan (Remez exchange) equiripple low-pass design with unit
// weights: desired gain 1 on [0, passband_edge], 0 on [stopband_edge, 1].
// Once the ripple falls below what double precision can resolve the exchange
// stops and the current (already ideal to working precision) design is kept.
// Throws kDesignFailure if the exchange does not settle within
// max_iterations.
FirDesign DesignLowpass(const FirDesignSpec& spec);

// |H(e^{j pi f})| for f in [0, 1] (fraction of Nyquist).
double MagnitudeResponse(std::span<const double> taps, double f);

// Raw standard-normal draws (no normalization).
std::vector<double> GaussianSamples(std::size_t n, std::uint64_t seed);

// Standard-normal i.i.d. noise, peak-normalized, nominally at 16 kHz.
AudioBuffer GaussianSource(std::size_t n, std::uint64_t seed);

// Causal convolution truncated to the input length, then peak-normalized.
AudioBuffer ApplyFir(const AudioBuffer& buffer, std::span<const double> taps);

struct SweepOptions {
  std::vector<int> n_coeffs = {8, 16, 32, 64, 128};
  std::vector<double> deltas = {0.008, 0.01};
  std::vector<int> frequencies = {2, 3};
  int n_trials = 20;
  std::size_t signal_len = std::size_t{1} << 20;
  std::uint64_t seed = 0;
  int base = 10;
  unsigned jobs = 1;
};

struct SweepRow {
  int n_coeffs = 0;
  double delta = 0.0;
  int frequency = 0;
  double js_mean = 0.0;
  double js_std = 0.0;
  int n_trials = 0;  // trials that produced a value
};

struct SweepResult {
  std::vector<SweepRow> rows;  // sorted by (delta, frequency, n_coeffs)
};

// Seed of trial `trial` for filter length index `cell`.
std::uint64_t TrialSeed(std::uint64_t seed, std::uint64_t cell, std::uint64_t trial);

SweepResult DivergenceSweep(const SweepOptions& options);

void WriteSweepCsv(std::ostream& out, const SweepResult& result);

// Spearman rank correlation with average ranks for ties.
double SpearmanRho(std::span<const double> x, std::span<const double> y);

}  // namespace fdspeech
