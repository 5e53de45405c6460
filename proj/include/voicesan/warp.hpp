// Copyright 2026 The voicesan authors
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

#ifndef VOICESAN_WARP_HPP
#define VOICESAN_WARP_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "voicesan/common.hpp"

namespace voicesan {

// A monotone warp of the normalized frequency axis [0, pi] onto itself.
// Bilinear is the allpass phase map with factor alpha; Quadratic bends the
// axis by beta*(u - u^2); Compound applies the quadratic after the bilinear
// and is what makes the warp non-reducible to a single family member.
struct WarpKind {
  enum class Family { Bilinear, Quadratic, Compound };
  Family family = Family::Bilinear;
  double alpha = 0.0;
  double beta = 0.0;

  static WarpKind bilinear(double a) { return {Family::Bilinear, a, 0.0}; }
  static WarpKind quadratic(double b) { return {Family::Quadratic, 0.0, b}; }
  static WarpKind compound(double a, double b) {
    return {Family::Compound, a, b};
  }
  static WarpKind identity() { return bilinear(0.0); }

  bool is_identity() const { return alpha == 0.0 && beta == 0.0; }

  std::string describe() const {
    switch (family) {
      case Family::Bilinear:
        return "bilinear(alpha=" + std::to_string(alpha) + ")";
      case Family::Quadratic:
        return "quadratic(beta=" + std::to_string(beta) + ")";
      default:
        return "compound(alpha=" + std::to_string(alpha) +
               ",beta=" + std::to_string(beta) + ")";
    }
  }
};

enum class Direction { Deepen, Sharpen };

// Distortion band accepted by the parameter sampler. The defaults anchor the
// band at dist(bilinear 0.08) and dist(bilinear 0.10).
struct DistortionBand {
  double lo = 0.32;
  double hi = 0.40;
  Direction direction = Direction::Sharpen;

  void validate() const {
    if (!(0.0 < lo && lo < hi)) throw ArgumentError("distortion band: need 0 < lo < hi");
  }
};

enum class KindPolicy { BilinearOnly, CompoundOnly };

// Allpass phase |-i ln((z - alpha)/(1 - alpha z))| with z = e^{i omega},
// principal branch. Fixes 0 and pi, strictly increasing for |alpha| < 1.
inline double warp_bilinear(double omega, double alpha) {
  if (!(std::abs(alpha) < 1.0)) {
    throw ArgumentError("warp_bilinear: |alpha| must be < 1");
  }
  const std::complex<double> z = std::polar(1.0, omega);
  const std::complex<double> w = (z - alpha) / (1.0 - alpha * z);
  return std::abs(std::arg(w));
}

// omega + beta*(u - u^2) with u = omega/pi. Monotone on [0, pi] iff |beta| < pi.
inline double warp_quadratic(double omega, double beta) {
  if (!(std::abs(beta) < kPi)) {
    throw ArgumentError("warp_quadratic: |beta| >= pi breaks monotonicity");
  }
  const double u = omega / kPi;
  return omega + beta * (u - u * u);
}

inline double warp_compound(double omega, double alpha, double beta) {
  return warp_quadratic(warp_bilinear(omega, alpha), beta);
}

inline double warp_apply(const WarpKind& kind, double omega) {
  switch (kind.family) {
    case WarpKind::Family::Bilinear:
      return warp_bilinear(omega, kind.alpha);
    case WarpKind::Family::Quadratic:
      return warp_quadratic(omega, kind.beta);
    default:
      return warp_compound(omega, kind.alpha, kind.beta);
  }
}

namespace detail {

inline double inverse_quadratic(double omega_out, double beta) {
  if (beta == 0.0) return omega_out;
  // Solve beta*u^2 - (pi + beta)*u + omega_out = 0 for u in [0, 1].
  const double disc = (kPi + beta) * (kPi + beta) - 4.0 * beta * omega_out;
  if (disc < 0.0) {
    throw NumericError("inverse_warp: negative discriminant (non-monotone beta)");
  }
  const double u = ((kPi + beta) - std::sqrt(disc)) / (2.0 * beta);
  return kPi * u;
}

}  // namespace detail

// Inverse of warp_apply. The bilinear inverse is the same map with -alpha;
// the quadratic inverse is the closed-form root; the compound inverse
// composes them in reverse order.
inline double inverse_warp(const WarpKind& kind, double omega_out) {
  switch (kind.family) {
    case WarpKind::Family::Bilinear:
      return warp_bilinear(omega_out, -kind.alpha);
    case WarpKind::Family::Quadratic:
      return detail::inverse_quadratic(omega_out, kind.beta);
    default:
      return warp_bilinear(detail::inverse_quadratic(omega_out, kind.beta),
                           -kind.alpha);
  }
}

// Parameter checks plus a numeric sweep: endpoints fixed within 1e-9 and
// strictly increasing on a 1024-point grid.
inline void validate_warp(const WarpKind& kind) {
  constexpr std::size_t kGrid = 1024;
  if (kind.family != WarpKind::Family::Quadratic && !(std::abs(kind.alpha) < 1.0)) {
    throw ArgumentError("warp: |alpha| must be < 1");
  }
  if (kind.family != WarpKind::Family::Bilinear && !(std::abs(kind.beta) < kPi)) {
    throw ArgumentError("warp: |beta| must be < pi");
  }
  if (std::abs(warp_apply(kind, 0.0)) > 1e-9 ||
      std::abs(warp_apply(kind, kPi) - kPi) > 1e-9) {
    throw ArgumentError("warp: endpoints not fixed");
  }
  double prev = 0.0;
  for (std::size_t i = 1; i <= kGrid; ++i) {
    const double omega = kPi * static_cast<double>(i) / kGrid;
    const double v = warp_apply(kind, omega);
    if (!(v > prev)) throw ArgumentError("warp: not strictly increasing");
    prev = v;
  }
}

namespace detail {

// Composite Simpson rule on [0, pi].
template <typename F>
double simpson(F&& f, std::size_t intervals) {
  if (intervals % 2 != 0) ++intervals;
  const double h = kPi / static_cast<double>(intervals);
  double acc = f(0.0) + f(kPi);
  for (std::size_t i = 1; i < intervals; ++i) {
    acc += f(h * static_cast<double>(i)) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return acc * h / 3.0;
}

}  // namespace detail

inline constexpr std::size_t kQuadratureIntervals = 4096;

// L1 area between the warp and the identity over [0, pi]. Zero iff identity.
inline double distortion_strength(const WarpKind& kind) {
  if (kind.is_identity()) return 0.0;
  return detail::simpson(
      [&](double omega) { return std::abs(warp_apply(kind, omega) - omega); },
      kQuadratureIntervals);
}

// Exact parameter of the composition of two bilinear warps:
// applying alpha1 then alpha2 equals one warp with (a1+a2)/(1+a1*a2).
inline double compose_bilinear(double alpha1, double alpha2) {
  if (!(std::abs(alpha1) < 1.0 && std::abs(alpha2) < 1.0)) {
    throw ArgumentError("compose_bilinear: |alpha| must be < 1");
  }
  return (alpha1 + alpha2) / (1.0 + alpha1 * alpha2);
}

inline constexpr int kMaxSamplerRejections = 10000;

// Draws warp parameters for one utterance (or one segment).
//
// BilinearOnly draws |alpha| uniformly from [0.08, 0.10], signed by the
// direction. CompoundOnly rejection-samples (alpha, beta) from the box
// |alpha| <= 0.12, |beta| <= 0.5 (signs fixed by the direction) until the
// distortion strength lands inside the band; both factors always share a
// sign so they push the voice the same way.
inline WarpKind sample_warp_params(const DistortionBand& band, KindPolicy policy,
                                   Rng& rng) {
  band.validate();
  const double sign = band.direction == Direction::Sharpen ? 1.0 : -1.0;
  if (policy == KindPolicy::BilinearOnly) {
    const double mag = rng.uniform(0.08, 0.10);
    return WarpKind::bilinear(sign * mag);
  }
  for (int attempt = 0; attempt < kMaxSamplerRejections; ++attempt) {
    const double a = sign * rng.uniform(0.0, 0.12);
    const double b = sign * rng.uniform(0.0, 0.5);
    if (a * b <= 0.0) continue;  // zero draw: sign consistency unsatisfiable
    const WarpKind kind = WarpKind::compound(a, b);
    const double dist = distortion_strength(kind);
    if (dist >= band.lo && dist <= band.hi) return kind;
  }
  throw ConfigError("sample_warp_params: band unreachable from sampling box");
}

inline std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi > lo)) throw ArgumentError("make_grid: bad range");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>((hi - lo) / step) + 2);
  for (double c = lo; c <= hi + step / 2; c += step) grid.push_back(c);
  return grid;
}

// Best single-bilinear approximation residual: the minimum over the grid of
// the L1 distance between the given warp and a bilinear warp. Near zero for
// bilinear kinds (reducible), bounded away from zero for compound kinds
// with beta != 0.
inline double attack_reduce_residual(const WarpKind& kind,
                                     const std::vector<double>& search_grid) {
  if (search_grid.empty()) throw ArgumentError("attack_reduce_residual: empty grid");
  // The target warp is shared across candidates; tabulate it once on the
  // quadrature grid.
  const std::size_t n = kQuadratureIntervals;
  std::vector<double> target(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    target[i] = warp_apply(kind, kPi * static_cast<double>(i) / static_cast<double>(n));
  }
  const double h = kPi / static_cast<double>(n);
  double best = std::numeric_limits<double>::infinity();
  for (double c : search_grid) {
    if (!(std::abs(c) < 1.0)) continue;
    double acc = std::abs(target[0] - warp_bilinear(0.0, c)) +
                 std::abs(target[n] - warp_bilinear(kPi, c));
    for (std::size_t i = 1; i < n; ++i) {
      const double omega = h * static_cast<double>(i);
      acc += std::abs(target[i] - warp_bilinear(omega, c)) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    best = std::min(best, acc * h / 3.0);
  }
  return best;
}

}  // namespace voicesan

#endif  // VOICESAN_WARP_HPP
