#include "rpmx/psbp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rpmx/special_functions.hpp"

namespace rpmx {

namespace {

double dot_skip(std::span<const double> coef, std::span<const double> x,
                std::size_t skip) {
  double s = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d)
    if (d != skip) s += coef[d] * x[d];
  return s;
}

double dot(std::span<const double> coef, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) s += coef[d] * x[d];
  return s;
}

}  // namespace

PsbpState psbp_init(const Dataset& data, const PsbpPriors& priors) {
  PsbpState st;
  st.K = priors.K;
  auto k = static_cast<std::size_t>(priors.K);
  auto d = static_cast<std::size_t>(data.d());
  st.xi = Matrix<double>(k, d, 0.0);
  st.gamma = Matrix<int>(k, d, 1);
  st.kappa.assign(d, priors.a_kappa / (priors.a_kappa + priors.b_kappa));
  st.u.assign(d, 1);
  st.theta = Matrix<double>(k, d, 0.0);
  st.tau.assign(d, priors.a_tau / priors.b_tau);
  st.lambda = 1.0;
  st.alloc.assign(static_cast<std::size_t>(data.n()), 0);
  st.latents.resize(static_cast<std::size_t>(data.n()));
  return st;
}

std::vector<double> probit_weights(const Matrix<double>& xi,
                                   std::span<const double> x) {
  std::size_t K = xi.rows();
  if (K == 0) throw std::invalid_argument("probit_weights: no components");
  std::vector<double> w(K, 0.0);
  double remaining = 1.0;
  for (std::size_t k = 0; k + 1 < K; ++k) {
    double frac = normal_cdf(dot(xi.row(k), x));
    w[k] = frac * remaining;
    remaining -= w[k];
    if (remaining < 0.0) remaining = 0.0;
  }
  w[K - 1] = remaining;  // the last component absorbs the rest
  return w;
}

void psbp_allocation_update(Rng& rng, PsbpState& st, const Dataset& data) {
  std::size_t K = static_cast<std::size_t>(st.K);
  std::vector<double> logw(K);
  std::vector<double> nu(K > 0 ? K - 1 : 0);
  for (int i = 0; i < data.n(); ++i) {
    auto xrow = data.x.row(static_cast<std::size_t>(i));
    double y = data.y[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k + 1 < K; ++k) nu[k] = dot(st.xi.row(k), xrow);
    double cum = 0.0;  // running sum of log(1 - Phi(nu_j))
    for (std::size_t k = 0; k < K; ++k) {
      double logpsi = k + 1 < K ? log_normal_cdf(nu[k]) + cum : cum;
      logw[k] = logpsi + normal_logpdf_prec(y, dot(st.theta.row(k), xrow), st.lambda);
      if (k + 1 < K) cum += log_normal_cdf(-nu[k]);
    }
    st.alloc[static_cast<std::size_t>(i)] = rng.categorical_logits(logw);
  }
}

void psbp_probit_augmentation_update(Rng& rng, PsbpState& st,
                                     const Dataset& data) {
  std::size_t K = static_cast<std::size_t>(st.K);
  for (int i = 0; i < data.n(); ++i) {
    auto xrow = data.x.row(static_cast<std::size_t>(i));
    auto c = static_cast<std::size_t>(st.alloc[static_cast<std::size_t>(i)]);
    std::size_t count = std::min(c + 1, K - 1);
    auto& lat = st.latents[static_cast<std::size_t>(i)];
    lat.resize(count);
    for (std::size_t j = 0; j < count; ++j) {
      double mean = dot(st.xi.row(j), xrow);
      lat[j] = truncated_normal_draw(
          rng, mean, 1.0, j == c ? HalfLine::Positive : HalfLine::Negative);
    }
  }
}

double psbp_gamma_log_odds(const PsbpState& st, const Dataset& data, int k,
                           int d, const PsbpPriors& priors) {
  auto kk = static_cast<std::size_t>(k);
  auto dd = static_cast<std::size_t>(d);
  double kappa = st.kappa[dd];
  if (kappa <= 0.0) return -std::numeric_limits<double>::infinity();
  if (kappa >= 1.0) return std::numeric_limits<double>::infinity();

  double lo = std::log(kappa) - std::log1p(-kappa);
  // Weight-side evidence from the probit latents of stick k.
  std::vector<double> xs, rs;
  if (k + 1 < st.K) {
    for (int i = 0; i < data.n(); ++i) {
      const auto& lat = st.latents[static_cast<std::size_t>(i)];
      if (lat.size() <= kk) continue;
      auto xrow = data.x.row(static_cast<std::size_t>(i));
      xs.push_back(xrow[dd]);
      rs.push_back(lat[kk] - dot_skip(st.xi.row(kk), xrow, dd));
    }
    lo += slab_minus_spike_log_evidence(priors.mu_xi, priors.tau_xi, 1.0, xs, rs);
  }
  // Response-side evidence from the observations sitting in component k.
  xs.clear();
  rs.clear();
  for (int i = 0; i < data.n(); ++i) {
    if (st.alloc[static_cast<std::size_t>(i)] != k) continue;
    auto xrow = data.x.row(static_cast<std::size_t>(i));
    xs.push_back(xrow[dd]);
    rs.push_back(data.y[static_cast<std::size_t>(i)] -
                 dot_skip(st.theta.row(kk), xrow, dd));
  }
  lo += slab_minus_spike_log_evidence(0.0, st.tau[dd], st.lambda, xs, rs);
  return lo;
}

void psbp_xi_gamma_update(Rng& rng, PsbpState& st, const Dataset& data,
                          const PsbpPriors& priors) {
  for (int k = 0; k < st.K; ++k) {
    auto kk = static_cast<std::size_t>(k);
    for (int d = 0; d < data.d(); ++d) {
      auto dd = static_cast<std::size_t>(d);
      double lo = psbp_gamma_log_odds(st, data, k, d, priors);
      bool include;
      if (std::isinf(lo))
        include = lo > 0.0;
      else
        include = rng.uniform() < 1.0 / (1.0 + std::exp(-lo));
      if (!include) {
        st.gamma(kk, dd) = 0;
        st.xi(kk, dd) = 0.0;
        st.theta(kk, dd) = 0.0;
        continue;
      }
      st.gamma(kk, dd) = 1;
      std::vector<double> xs, rs;
      if (k + 1 < st.K) {
        for (int i = 0; i < data.n(); ++i) {
          const auto& lat = st.latents[static_cast<std::size_t>(i)];
          if (lat.size() <= kk) continue;
          auto xrow = data.x.row(static_cast<std::size_t>(i));
          xs.push_back(xrow[dd]);
          rs.push_back(lat[kk] - dot_skip(st.xi.row(kk), xrow, dd));
        }
      }
      NormalPosterior xi_post =
          normal_coeff_conditional(priors.mu_xi, priors.tau_xi, 1.0, xs, rs);
      st.xi(kk, dd) = rng.normal(xi_post.mean, 1.0 / std::sqrt(xi_post.prec));

      xs.clear();
      rs.clear();
      for (int i = 0; i < data.n(); ++i) {
        if (st.alloc[static_cast<std::size_t>(i)] != k) continue;
        auto xrow = data.x.row(static_cast<std::size_t>(i));
        xs.push_back(xrow[dd]);
        rs.push_back(data.y[static_cast<std::size_t>(i)] -
                     dot_skip(st.theta.row(kk), xrow, dd));
      }
      NormalPosterior th_post =
          normal_coeff_conditional(0.0, st.tau[dd], st.lambda, xs, rs);
      st.theta(kk, dd) = rng.normal(th_post.mean, 1.0 / std::sqrt(th_post.prec));
    }
  }
}

void psbp_kappa_u_update(Rng& rng, PsbpState& st, const PsbpPriors& priors) {
  int K = st.K;
  for (std::size_t d = 0; d < st.kappa.size(); ++d) {
    int total = 0;
    for (int k = 0; k < K; ++k) total += st.gamma(static_cast<std::size_t>(k), d);
    if (total > 0) {
      st.u[d] = 1;
      st.kappa[d] = rng.beta(priors.a_kappa + total, priors.b_kappa + K - total);
      continue;
    }
    // All-zero column: weigh the active branch by the marginal probability
    // of K zeros under the Beta prior, against the inert point mass.
    double log_m1 = log_beta(priors.a_kappa, priors.b_kappa + K) -
                    log_beta(priors.a_kappa, priors.b_kappa);
    double p_active = 1.0 / (1.0 + std::exp(-log_m1));
    if (rng.uniform() < p_active) {
      st.u[d] = 1;
      st.kappa[d] = rng.beta(priors.a_kappa, priors.b_kappa + K);
    } else {
      st.u[d] = 0;
      st.kappa[d] = 0.0;
    }
  }
}

void psbp_tau_lambda_update(Rng& rng, PsbpState& st, const Dataset& data,
                            const PsbpPriors& priors) {
  for (std::size_t d = 0; d < st.tau.size(); ++d) {
    double ss = 0.0;
    std::size_t m = 0;
    for (int k = 0; k < st.K; ++k) {
      auto kk = static_cast<std::size_t>(k);
      if (st.gamma(kk, d) == 1) {
        ss += st.theta(kk, d) * st.theta(kk, d);
        ++m;
      }
    }
    GammaParams post = gamma_precision_update({priors.a_tau, priors.b_tau}, m, ss);
    st.tau[d] = rng.gamma(post.shape, post.rate);
  }
  double ss = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    auto c = static_cast<std::size_t>(st.alloc[static_cast<std::size_t>(i)]);
    double r = data.y[static_cast<std::size_t>(i)] -
               dot(st.theta.row(c), data.x.row(static_cast<std::size_t>(i)));
    ss += r * r;
  }
  GammaParams post = gamma_precision_update(
      {priors.a_lambda, priors.b_lambda}, static_cast<std::size_t>(data.n()), ss);
  st.lambda = rng.gamma(post.shape, post.rate);
}

void psbp_sweep(Rng& rng, PsbpState& st, const Dataset& data,
                const PsbpPriors& priors) {
  psbp_allocation_update(rng, st, data);
  psbp_probit_augmentation_update(rng, st, data);
  psbp_xi_gamma_update(rng, st, data, priors);
  psbp_kappa_u_update(rng, st, priors);
  psbp_tau_lambda_update(rng, st, data, priors);
}

double psbp_joint_loglik(const PsbpState& st, const Dataset& data) {
  double lp = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    auto xrow = data.x.row(static_cast<std::size_t>(i));
    auto c = static_cast<std::size_t>(st.alloc[static_cast<std::size_t>(i)]);
    std::vector<double> w = probit_weights(st.xi, xrow);
    lp += std::log(std::max(w[c], 1e-300));
    lp += normal_logpdf_prec(data.y[static_cast<std::size_t>(i)],
                             dot(st.theta.row(c), xrow), st.lambda);
  }
  return lp;
}

PsbpState psbp_prior_draw(Rng& rng, const Dataset& data, const PsbpPriors& priors) {
  PsbpState st = psbp_init(data, priors);
  auto K = static_cast<std::size_t>(priors.K);
  for (std::size_t d = 0; d < st.kappa.size(); ++d) {
    st.u[d] = rng.bernoulli(0.5) ? 1 : 0;
    st.kappa[d] = st.u[d] == 1 ? rng.beta(priors.a_kappa, priors.b_kappa) : 0.0;
    st.tau[d] = rng.gamma(priors.a_tau, priors.b_tau);
    for (std::size_t k = 0; k < K; ++k) {
      st.gamma(k, d) = rng.bernoulli(st.kappa[d]) ? 1 : 0;
      if (st.gamma(k, d) == 1) {
        st.xi(k, d) = rng.normal(priors.mu_xi, 1.0 / std::sqrt(priors.tau_xi));
        st.theta(k, d) = rng.normal(0.0, 1.0 / std::sqrt(st.tau[d]));
      } else {
        st.xi(k, d) = 0.0;
        st.theta(k, d) = 0.0;
      }
    }
  }
  st.lambda = rng.gamma(priors.a_lambda, priors.b_lambda);
  for (int i = 0; i < data.n(); ++i) {
    std::vector<double> w = probit_weights(st.xi, data.x.row(static_cast<std::size_t>(i)));
    st.alloc[static_cast<std::size_t>(i)] = rng.categorical(w);
  }
  return st;
}

void psbp_draw_response(Rng& rng, const PsbpState& st, Dataset& data) {
  double sd = 1.0 / std::sqrt(st.lambda);
  for (int i = 0; i < data.n(); ++i) {
    auto c = static_cast<std::size_t>(st.alloc[static_cast<std::size_t>(i)]);
    data.y[static_cast<std::size_t>(i)] =
        rng.normal(dot(st.theta.row(c), data.x.row(static_cast<std::size_t>(i))), sd);
  }
}

std::vector<FieldSpec> psbp_schema() {
  return {{"lambda", FieldKind::Scalar}, {"kappa", FieldKind::Vector},
          {"u", FieldKind::IntVector},   {"tau", FieldKind::Vector},
          {"xi", FieldKind::RealMatrix}, {"gamma", FieldKind::IntMatrix},
          {"theta", FieldKind::RealMatrix}};
}

DrawRecord psbp_record(const PsbpState& st, long iter) {
  DrawRecord rec;
  rec.iter = iter;
  rec.assign = st.alloc;
  rec.scalars = {st.lambda};
  rec.vectors.push_back(st.kappa);
  rec.vectors.emplace_back(st.u.begin(), st.u.end());
  rec.vectors.push_back(st.tau);
  rec.matrices.push_back(st.xi);
  Matrix<double> g(st.gamma.rows(), st.gamma.cols());
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) = st.gamma(i, j);
  rec.matrices.push_back(std::move(g));
  rec.matrices.push_back(st.theta);
  return rec;
}

double psbp_inclusion_probability(const DrawArchive& draws, int d) {
  if (draws.size() == 0)
    throw std::invalid_argument("inclusion probability of an empty archive");
  auto dd = static_cast<std::size_t>(d);
  std::size_t hits = 0;
  for (std::size_t t = 0; t < draws.size(); ++t) {
    const auto& g = draws.mat(t, "gamma");
    for (std::size_t k = 0; k < g.rows(); ++k) {
      if (g(k, dd) != 0.0) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(draws.size());
}

std::vector<double> psbp_predictive_density(const DrawArchive& draws,
                                            std::span<const double> xtilde,
                                            std::span<const double> grid) {
  if (draws.size() == 0)
    throw std::invalid_argument("predictive requires a non-empty archive");
  std::vector<double> dens(grid.size(), 0.0);
  for (std::size_t t = 0; t < draws.size(); ++t) {
    const auto& xi = draws.mat(t, "xi");
    const auto& theta = draws.mat(t, "theta");
    double lambda = draws.scalar(t, "lambda");
    std::vector<double> w = probit_weights(xi, xtilde);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      double v = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k)
        if (w[k] > 0.0)
          v += w[k] * std::exp(normal_logpdf_prec(grid[g], dot(theta.row(k), xtilde), lambda));
      dens[g] += v;
    }
  }
  for (double& v : dens) v /= static_cast<double>(draws.size());
  return dens;
}

double psbp_predictive_mean(const DrawArchive& draws,
                            std::span<const double> xtilde) {
  if (draws.size() == 0)
    throw std::invalid_argument("predictive requires a non-empty archive");
  double acc = 0.0;
  for (std::size_t t = 0; t < draws.size(); ++t) {
    const auto& xi = draws.mat(t, "xi");
    const auto& theta = draws.mat(t, "theta");
    std::vector<double> w = probit_weights(xi, xtilde);
    for (std::size_t k = 0; k < w.size(); ++k)
      acc += w[k] * dot(theta.row(k), xtilde);
  }
  return acc / static_cast<double>(draws.size());
}

}  // namespace rpmx
