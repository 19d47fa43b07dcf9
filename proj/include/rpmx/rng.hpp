#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "rpmx/errors.hpp"

namespace rpmx {

// PCG32 generator with explicit stream selection.  A (seed, stream) pair
// identifies a reproducible sequence; distinct streams are statistically
// independent, which is how parallel chains get their own randomness.
// All variate transforms are implemented here rather than with
// <random> distributions because the standard leaves those
// implementation-defined and the archives must be reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : state_(0u), inc_((stream << 1u) | 1u) {
    next_u32();
    state_ += seed;
    next_u32();
  }

  std::uint32_t next_u32() {
    std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    auto rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
  }

  std::uint64_t next_u64() {
    std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // Uniform on the open interval (0, 1); never returns 0 or 1, so logs of
  // the result are always finite.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller without caching the second variate: draws stay aligned with
  // the call sequence, which keeps replay simple.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  double exponential(double rate = 1.0) { return -std::log(uniform()) / rate; }

  // Marsaglia-Tsang for shape >= 1, boosted for shape < 1.  Rate, not scale.
  double gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0))
      throw std::invalid_argument("gamma: shape and rate must be positive");
    if (shape < 1.0) {
      double u = uniform();
      return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      double u = uniform();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v))
        return d * v / rate;
    }
  }

  double beta(double a, double b) {
    double x = gamma(a, 1.0);
    double y = gamma(b, 1.0);
    return x / (x + y);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Index draw proportional to exp(logw - max logw).  Weights need not be
  // normalized; all -inf is a numeric failure.
  int categorical_logits(std::span<const double> logw) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double w : logw) {
      if (std::isnan(w)) throw numeric_error("categorical_logits: NaN weight");
      if (w > mx) mx = w;
    }
    if (!std::isfinite(mx))
      throw numeric_error("categorical_logits: no finite weight");
    double total = 0.0;
    for (double w : logw) total += std::exp(w - mx);
    double u = uniform() * total;
    double cum = 0.0;
    for (std::size_t i = 0; i < logw.size(); ++i) {
      cum += std::exp(logw[i] - mx);
      if (u <= cum) return static_cast<int>(i);
    }
    return static_cast<int>(logw.size()) - 1;
  }

  int categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw numeric_error("categorical: negative or NaN weight");
      total += w;
    }
    if (!(total > 0.0)) throw numeric_error("categorical: zero total weight");
    double u = uniform() * total;
    double cum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      cum += weights[i];
      if (u <= cum) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

  int uniform_int(int n) {
    // Rejection-free modulo bias is negligible for the small n used here,
    // but bound the draw properly anyway.
    std::uint64_t bound = static_cast<std::uint64_t>(n);
    std::uint64_t threshold = (-bound) % bound;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return static_cast<int>(r % bound);
    }
  }

 private:
  std::uint64_t state_;
  std::uint64_t inc_;
};

}  // namespace rpmx
