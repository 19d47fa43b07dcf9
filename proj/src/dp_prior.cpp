#include "rpmx/dp_prior.hpp"

#include <cmath>
#include <stdexcept>

#include "rpmx/special_functions.hpp"

namespace rpmx {

StickBreakResult stick_break(std::span<const double> sticks) {
  StickBreakResult out;
  out.weights.reserve(sticks.size());
  double remaining = 1.0;
  for (double v : sticks) {
    if (!(v > 0.0) || !(v < 1.0))
      throw std::invalid_argument("stick_break: fractions must lie in (0,1)");
    double w = v * remaining;
    out.weights.push_back(w);
    remaining -= w;
  }
  out.leftover = remaining;
  return out;
}

double eppf_log_prob(const Partition& p, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("eppf_log_prob: alpha <= 0");
  double lp = p.k() * std::log(alpha) - log_rising_factorial(alpha, p.n());
  for (int j = 0; j < p.k(); ++j) lp += std::lgamma(static_cast<double>(p.cluster_size(j)));
  return lp;
}

std::vector<double> crp_predictive(const Partition& others, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("crp_predictive: alpha <= 0");
  std::vector<double> probs(static_cast<std::size_t>(others.k()) + 1);
  double denom = alpha + others.n();
  for (int j = 0; j < others.k(); ++j)
    probs[static_cast<std::size_t>(j)] = others.cluster_size(j) / denom;
  probs.back() = alpha / denom;
  return probs;
}

double sample_alpha(Rng& rng, const Partition& p, const DpConcentration& conc) {
  double a = conc.prior.shape, b = conc.prior.rate;
  int n = p.n(), k = p.k();
  if (n == 0) return rng.gamma(a, b);
  // Classic two-stage auxiliary update: eta | alpha ~ Beta(alpha+1, n), then
  // alpha | eta from a two-component Gamma mixture.
  double eta = rng.beta(conc.alpha + 1.0, static_cast<double>(n));
  double rate = b - std::log(eta);
  double odds = (a + k - 1.0) / (n * rate);
  double shape = rng.uniform() < odds / (1.0 + odds) ? a + k : a + k - 1.0;
  return rng.gamma(shape, rate);
}

double similarity_log_marginal(const SimilarityColumn& col,
                               std::span<const double> values) {
  if (values.empty()) return 0.0;
  if (col.type == ColumnType::Binary) {
    double ones = 0.0;
    for (double v : values) {
      if (v != 0.0 && v != 1.0)
        throw std::invalid_argument("similarity_log_marginal: binary column with non 0/1 value");
      ones += v;
    }
    double m = static_cast<double>(values.size());
    return log_beta(col.beta.a + ones, col.beta.b + m - ones) -
           log_beta(col.beta.a, col.beta.b);
  }
  double m = static_cast<double>(values.size());
  double q = col.noise_prec, p0 = col.prec0;
  double sx = 0.0, sxx = 0.0;
  for (double v : values) {
    sx += v;
    sxx += v * v;
  }
  double post_prec = p0 + q * m;
  double mterm = q * sx + p0 * col.mean0;
  constexpr double kLog2Pi = 1.8378770664093454835606594728112;
  return 0.5 * m * (std::log(q) - kLog2Pi) + 0.5 * std::log(p0) -
         0.5 * std::log(post_prec) + 0.5 * mterm * mterm / post_prec -
         0.5 * (q * sxx + p0 * col.mean0 * col.mean0);
}

double ppmx_log_prior(const Partition& p, const Matrix<double>& x,
                      const Matrix<int>& gamma, double alpha,
                      std::span<const SimilarityColumn> similarity) {
  if (!(alpha > 0.0)) throw std::invalid_argument("ppmx_log_prior: alpha <= 0");
  if (static_cast<int>(x.rows()) != p.n())
    throw std::invalid_argument("ppmx_log_prior: covariate rows must match n");
  if (static_cast<int>(gamma.rows()) != p.k() || gamma.cols() != x.cols())
    throw std::invalid_argument("ppmx_log_prior: gamma must be k x d");
  if (similarity.size() != x.cols())
    throw std::invalid_argument("ppmx_log_prior: one similarity spec per column");

  double lp = 0.0;
  std::vector<double> vals;
  for (int j = 0; j < p.k(); ++j) {
    lp += std::log(alpha) + std::lgamma(static_cast<double>(p.cluster_size(j)));
    for (std::size_t d = 0; d < x.cols(); ++d) {
      if (gamma(static_cast<std::size_t>(j), d) == 0) continue;
      vals.clear();
      for (int i = 0; i < p.n(); ++i)
        if (p.label(i) == j) vals.push_back(x(static_cast<std::size_t>(i), d));
      lp += similarity_log_marginal(similarity[d], vals);
    }
  }
  return lp;
}

}  // namespace rpmx
