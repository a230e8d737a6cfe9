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

#include "fdspeech/fd_features.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fdspeech/error.hpp"

namespace fdspeech {
namespace {

constexpr double kInfeasible = std::numeric_limits<double>::infinity();

bool Feasible(const BenfordParams& params, int base) {
  if (!std::isfinite(params.beta) || !std::isfinite(params.gamma) ||
      !std::isfinite(params.exponent)) {
    return false;
  }
  for (int d = 1; d < base; ++d) {
    if (!(params.gamma + std::pow(static_cast<double>(d), params.exponent) > 0.0)) {
      return false;
    }
  }
  return true;
}

double CurveMse(const DigitPmf& pmf, const BenfordParams& params) {
  if (!Feasible(params, pmf.base)) return kInfeasible;
  const double inv_log_base = 1.0 / std::log(static_cast<double>(pmf.base));
  double sum = 0.0;
  for (int d = 1; d < pmf.base; ++d) {
    const double denom = params.gamma + std::pow(static_cast<double>(d), params.exponent);
    const double model = params.beta * std::log1p(1.0 / denom) * inv_log_base;
    const double diff = model - pmf(d);
    sum += diff * diff;
  }
  const double mse = sum / (pmf.base - 1);
  return std::isfinite(mse) ? mse : kInfeasible;
}

using Point = std::array<double, 3>;

BenfordParams ToParams(const Point& x) { return {x[0], x[1], x[2]}; }

std::vector<double> FloorAndNormalize(std::span<const double> p, double epsilon) {
  std::vector<double> out(p.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i] = std::max(p[i], epsilon);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

// S_alpha(p, q) = sum p^alpha * q^(1 - alpha)
double SAlpha(std::span<const double> p, std::span<const double> q, double alpha) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    s += std::pow(p[i], alpha) * std::pow(q[i], 1.0 - alpha);
  }
  return s;
}

double Kl(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * std::log(a[i] / b[i]);
  return s;
}

}  // namespace

void FdConfig::Validate() const {
  if (bases.empty() || deltas.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "bases and deltas must be non-empty");
  }
  for (int b : bases) {
    if (b < 2) throw Error(ErrorCode::kInvalidConfig, "every base must be >= 2");
  }
  for (double d : deltas) {
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw Error(ErrorCode::kInvalidConfig, "every delta must be positive");
    }
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "alpha must lie in (0, 1)");
  }
  if (!(epsilon > 0.0)) throw Error(ErrorCode::kInvalidConfig, "epsilon must be > 0");
}

namespace {

// Leading digit of a positive finite double by exact rational arithmetic,
// starting from an exponent estimate that may be off by one.
int ExactFirstDigit(double magnitude, int base, int exponent_guess) {
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::cpp_rational;
  const cpp_int b = base;
  cpp_rational r(magnitude);
  if (exponent_guess > 0) {
    r /= boost::multiprecision::pow(b, static_cast<unsigned>(exponent_guess));
  } else if (exponent_guess < 0) {
    r *= boost::multiprecision::pow(b, static_cast<unsigned>(-exponent_guess));
  }
  while (r >= base) r /= base;
  while (r < 1) r *= base;
  const cpp_int digit = numerator(r) / denominator(r);
  return static_cast<int>(digit);
}

}  // namespace

int FirstDigit(double x, int base) {
  if (base < 2) throw Error(ErrorCode::kDomainError, "base must be >= 2");
  if (x == 0.0) throw Error(ErrorCode::kZeroValue, "first digit of zero");
  if (!std::isfinite(x)) throw Error(ErrorCode::kDomainError, "first digit of non-finite value");
  const double b = base;
  const double magnitude = std::abs(x);
  const double exponent = std::floor(std::log(magnitude) / std::log(b));
  double mantissa = magnitude / std::pow(b, exponent);
  // log() rounding can leave the mantissa one step outside [1, b).
  if (mantissa >= b) mantissa /= b;
  if (mantissa < 1.0) mantissa *= b;
  // pow() and the division are rounded, so a mantissa this close to a digit
  // boundary may sit on the wrong side of it.
  if (std::abs(mantissa - std::round(mantissa)) <= 1e-9 * mantissa) {
    return ExactFirstDigit(magnitude, base, static_cast<int>(exponent));
  }
  return std::clamp(static_cast<int>(mantissa), 1, base - 1);
}

DigitPmf BuildDigitPmf(std::span<const double> values, double delta, int base,
                       std::size_t min_digits) {
  DigitPmf pmf;
  pmf.base = base;
  pmf.probabilities.assign(base - 1, 0.0);
  std::vector<std::size_t> counts(base - 1, 0);
  for (double m : values) {
    const double q = Quantize(m, delta);
    if (q == 0.0) continue;
    ++counts[FirstDigit(q, base) - 1];
    ++pmf.count;
  }
  if (pmf.count < min_digits || pmf.count == 0) {
    throw Error(ErrorCode::kInsufficientDigits,
                fmt::format("{} non-zero values, need {}", pmf.count, min_digits));
  }
  for (int d = 0; d < base - 1; ++d) {
    pmf.probabilities[d] = static_cast<double>(counts[d]) / static_cast<double>(pmf.count);
  }
  return pmf;
}

double BenfordIdeal(int digit, int base, const BenfordParams& params) {
  const double denom = params.gamma + std::pow(static_cast<double>(digit), params.exponent);
  if (!(denom > 0.0)) {
    throw Error(ErrorCode::kDomainError,
                fmt::format("gamma + d^exponent = {} is not positive", denom));
  }
  return params.beta * std::log1p(1.0 / denom) / std::log(static_cast<double>(base));
}

std::vector<double> BenfordCurve(int base, const BenfordParams& params) {
  std::vector<double> curve(base - 1);
  for (int d = 1; d < base; ++d) curve[d - 1] = BenfordIdeal(d, base, params);
  return curve;
}

BenfordFit FitBenford(const DigitPmf& pmf, const FitOptions& options) {
  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
  constexpr double kInitialStep = 0.05;

  const Point start = {1.0, 0.0, 1.0};
  std::array<Point, 4> simplex;
  std::array<double, 4> value;
  simplex[0] = start;
  for (int i = 0; i < 3; ++i) {
    simplex[i + 1] = start;
    simplex[i + 1][i] += kInitialStep;
  }
  for (int i = 0; i < 4; ++i) value[i] = CurveMse(pmf, ToParams(simplex[i]));

  auto order = [&] {
    std::array<int, 4> idx = {0, 1, 2, 3};
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return value[a] < value[b]; });
    std::array<Point, 4> s;
    std::array<double, 4> v;
    for (int i = 0; i < 4; ++i) {
      s[i] = simplex[idx[i]];
      v[i] = value[idx[i]];
    }
    simplex = s;
    value = v;
  };
  auto diameter = [&] {
    double d = 0.0;
    for (int i = 1; i < 4; ++i) {
      for (int k = 0; k < 3; ++k) d = std::max(d, std::abs(simplex[i][k] - simplex[0][k]));
    }
    return d;
  };
  auto along = [&](const Point& centroid, double t) {
    Point p;
    for (int k = 0; k < 3; ++k) p[k] = centroid[k] + t * (simplex[3][k] - centroid[k]);
    return p;
  };

  BenfordFit fit;
  order();
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    if (diameter() < options.diameter_tolerance) {
      fit.params = ToParams(simplex[0]);
      fit.residual_mse = value[0];
      fit.converged = true;
      fit.iterations = iter;
      return fit;
    }
    Point centroid{};
    for (int i = 0; i < 3; ++i) {
      for (int k = 0; k < 3; ++k) centroid[k] += simplex[i][k] / 3.0;
    }
    const Point reflected = along(centroid, -kReflect);
    const double fr = CurveMse(pmf, ToParams(reflected));
    if (fr < value[0]) {
      const Point expanded = along(centroid, -kExpand);
      const double fe = CurveMse(pmf, ToParams(expanded));
      if (fe < fr) {
        simplex[3] = expanded;
        value[3] = fe;
      } else {
        simplex[3] = reflected;
        value[3] = fr;
      }
    } else if (fr < value[2]) {
      simplex[3] = reflected;
      value[3] = fr;
    } else {
      const bool outside = fr < value[3];
      const Point contracted = along(centroid, outside ? -kContract : kContract);
      const double fc = CurveMse(pmf, ToParams(contracted));
      if (fc < (outside ? fr : value[3])) {
        simplex[3] = contracted;
        value[3] = fc;
      } else {
        for (int i = 1; i < 4; ++i) {
          for (int k = 0; k < 3; ++k) {
            simplex[i][k] = simplex[0][k] + kShrink * (simplex[i][k] - simplex[0][k]);
          }
          value[i] = CurveMse(pmf, ToParams(simplex[i]));
        }
      }
    }
    order();
  }

  fit.params = ToParams(start);
  fit.residual_mse = CurveMse(pmf, fit.params);
  fit.converged = false;
  fit.iterations = iter;
  return fit;
}

DivergenceSet Divergences(std::span<const double> p, std::span<const double> q,
                          double alpha, double epsilon) {
  if (p.size() != q.size() || p.empty()) {
    throw Error(ErrorCode::kDomainError, "distributions must share a non-empty support");
  }
  const auto pf = FloorAndNormalize(p, epsilon);
  const auto qf = FloorAndNormalize(q, epsilon);
  for (std::size_t i = 0; i < pf.size(); ++i) {
    if (!(pf[i] > 0.0) || !(qf[i] > 0.0)) {
      throw Error(ErrorCode::kDomainError, "non-positive probability after flooring");
    }
  }
  DivergenceSet out;
  out.js = Kl(pf, qf) + Kl(qf, pf);
  const double s_pq = SAlpha(pf, qf, alpha);
  const double s_qp = SAlpha(qf, pf, alpha);
  out.renyi = (std::log(s_pq) + std::log(s_qp)) / (1.0 - alpha);
  out.tsallis = (2.0 - s_pq - s_qp) / (1.0 - alpha);
  double sq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sq += (p[i] - q[i]) * (p[i] - q[i]);
  out.mse = sq / static_cast<double>(p.size());
  return out;
}

DivergenceSet Divergences(const DigitPmf& pmf, const BenfordFit& fit, double alpha,
                          double epsilon) {
  const auto curve = BenfordCurve(pmf.base, fit.params);
  return Divergences(pmf.probabilities, curve, alpha, epsilon);
}

std::string FormatDelta(double delta) { return fmt::format("{}", delta); }

std::string FeatureDescriptor::Name() const {
  return fmt::format("{}_f{}_b{}_d{}", divergence, frequency, base, FormatDelta(delta));
}

std::vector<FeatureDescriptor> FeatureLayout(std::span<const int> frequencies,
                                             const FdConfig& config) {
  std::vector<FeatureDescriptor> layout;
  layout.reserve(frequencies.size() * config.bases.size() * config.deltas.size() *
                 kDivergenceNames.size());
  for (int f : frequencies) {
    for (int b : config.bases) {
      for (double d : config.deltas) {
        for (auto name : kDivergenceNames) layout.push_back({std::string(name), f, b, d});
      }
    }
  }
  return layout;
}

std::string LayoutHash(std::span<const FeatureDescriptor> layout) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& desc : layout) {
    mix(desc.Name());
    mix(",");
  }
  return fmt::format("{:016x}", h);
}

FeatureVector AssembleFeatures(const CepstralMatrix& matrix, const FdConfig& config) {
  config.Validate();
  FeatureVector out;
  out.layout = FeatureLayout(matrix.frequencies, config);
  out.values.reserve(out.layout.size());
  for (std::size_t c = 0; c < matrix.n_coeffs(); ++c) {
    const auto column = matrix.column(c);
    for (int b : config.bases) {
      for (double delta : config.deltas) {
        DigitPmf pmf;
        try {
          pmf = BuildDigitPmf(column, delta, b, config.min_digits);
        } catch (const Error& e) {
          throw Error(e.code(), fmt::format("f={} b={} delta={}: {}", matrix.frequencies[c],
                                            b, FormatDelta(delta), e.message()));
        }
        const BenfordFit fit = FitBenford(pmf);
        if (!fit.converged) ++out.diverged_fits;
        const DivergenceSet div = Divergences(pmf, fit, config.alpha, config.epsilon);
        out.values.insert(out.values.end(), {div.js, div.renyi, div.tsallis, div.mse});
      }
    }
  }
  return out;
}

}  // namespace fdspeech
