#pragma once

// Two-sampler agreement harness for transition-kernel validation.  One
// stream draws (parameters, data) directly from the generative model; the
// other alternates a posterior sweep with a data redraw, which leaves the
// same joint distribution invariant when the sweep is correct.  Functionals
// of both streams are compared through z-scores; both sides use a
// batch-means standard error so chain autocorrelation is absorbed.

#include <cmath>
#include <cstddef>
#include <vector>

namespace jointcheck {

struct SeriesStats {
  double mean = 0.0;
  double se2 = 0.0;  // squared standard error of the mean
};

inline SeriesStats batch_stats(const std::vector<double>& xs) {
  std::size_t n = xs.size();
  std::size_t b = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  if (b < 1) b = 1;
  std::size_t nb = n / b;
  SeriesStats st;
  for (double v : xs) st.mean += v;
  st.mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t j = 0; j < nb; ++j) {
    double bm = 0.0;
    for (std::size_t t = j * b; t < (j + 1) * b; ++t) bm += xs[t];
    bm /= static_cast<double>(b);
    var += (bm - st.mean) * (bm - st.mean);
  }
  var /= static_cast<double>(nb > 1 ? nb - 1 : 1);
  st.se2 = var / static_cast<double>(nb);
  return st;
}

inline std::vector<double> z_scores(const std::vector<std::vector<double>>& a,
                                    const std::vector<std::vector<double>>& b) {
  std::vector<double> z(a.size());
  for (std::size_t f = 0; f < a.size(); ++f) {
    SeriesStats sa = batch_stats(a[f]);
    SeriesStats sb = batch_stats(b[f]);
    double denom = std::sqrt(sa.se2 + sb.se2);
    z[f] = denom > 0.0 ? (sa.mean - sb.mean) / denom : 0.0;
  }
  return z;
}

// Runs `iters` iterations of `step`, which fills one value per functional
// into the row it is handed.  Returns one series per functional.
template <class Step>
std::vector<std::vector<double>> collect(long iters, std::size_t width,
                                         Step&& step) {
  std::vector<std::vector<double>> out(width);
  for (auto& s : out) s.reserve(static_cast<std::size_t>(iters));
  std::vector<double> row(width, 0.0);
  for (long t = 0; t < iters; ++t) {
    step(row);
    for (std::size_t f = 0; f < width; ++f) out[f].push_back(row[f]);
  }
  return out;
}

}  // namespace jointcheck
