#include "rpmx/rpms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rpmx/special_functions.hpp"

namespace rpmx {

namespace {

constexpr double kZetaFloor = 1e-12;

double clamp_prob(double z) {
  return std::min(1.0 - kZetaFloor, std::max(kZetaFloor, z));
}

double cluster_mean(const RpmsCluster& c, std::span<const double> xrow) {
  double m = c.intercept;
  for (std::size_t d = 0; d < xrow.size(); ++d) m += c.theta[d] * xrow[d];
  return m;
}

// Applies a reallocation move to the partition and keeps the cluster
// parameter table aligned with the relabeling.
void apply_move(RpmsState& st, int i, int target,
                std::optional<RpmsCluster> fresh) {
  MoveResult mv = st.partition.move_observation(i, target);
  std::vector<RpmsCluster> next(static_cast<std::size_t>(st.partition.k()));
  for (std::size_t j = 0; j < mv.label_map.size(); ++j) {
    int dst = mv.label_map[j];
    if (dst >= 0) next[static_cast<std::size_t>(dst)] = std::move(st.clusters[j]);
  }
  if (mv.created_cluster) {
    next[static_cast<std::size_t>(mv.new_label)] = std::move(*fresh);
  }
  st.clusters = std::move(next);
}

}  // namespace

RpmsState rpms_init(const Dataset& data, RpmsMode mode, const RpmsPriors& priors) {
  RpmsState st;
  st.mode = mode;
  st.partition = Partition::one_cluster(data.n());
  int d = data.d();
  RpmsCluster c;
  c.theta.assign(static_cast<std::size_t>(d), 0.0);
  if (mode == RpmsMode::Rpms) {
    c.zeta.resize(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j)
      c.zeta[static_cast<std::size_t>(j)] =
          data.types[static_cast<std::size_t>(j)] == ColumnType::Binary
              ? 0.5
              : priors.x_mean0;
  }
  if (data.n() > 0) st.clusters.push_back(std::move(c));
  st.hyper.pi.assign(static_cast<std::size_t>(d), 0.5);
  st.hyper.omega.assign(static_cast<std::size_t>(d), 0.5);
  st.hyper.tau.assign(static_cast<std::size_t>(d), 1.0);
  st.hyper.lambda = 1.0;
  st.hyper.conc = {1.0, priors.alpha_prior};
  return st;
}

double rpms_response_loglik(const RpmsCluster& cluster, double lambda, double y,
                            std::span<const double> xrow) {
  return normal_logpdf_prec(y, cluster_mean(cluster, xrow), lambda);
}

double rpms_covariate_loglik(RpmsMode mode, const RpmsCluster& cluster,
                             std::span<const double> xrow,
                             std::span<const ColumnType> types,
                             const RpmsPriors& priors) {
  if (mode == RpmsMode::Ssm)
    throw std::logic_error("covariate likelihood undefined with a fixed design");
  double lp = 0.0;
  for (std::size_t d = 0; d < xrow.size(); ++d) {
    if (types[d] == ColumnType::Binary) {
      double z = clamp_prob(cluster.zeta[d]);
      lp += xrow[d] == 1.0 ? std::log(z) : std::log1p(-z);
    } else {
      lp += normal_logpdf_prec(xrow[d], cluster.zeta[d], priors.x_noise_prec);
    }
  }
  return lp;
}

RpmsCluster rpms_draw_g0(Rng& rng, const RpmsHyper& hyper,
                         const RpmsPriors& priors,
                         std::span<const ColumnType> types) {
  RpmsCluster c;
  std::size_t d = hyper.pi.size();
  c.theta.resize(d);
  c.zeta.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    c.theta[j] = rng.uniform() < hyper.pi[j]
                     ? 0.0
                     : rng.normal(priors.mu0, 1.0 / std::sqrt(hyper.tau[j]));
    c.zeta[j] = types[j] == ColumnType::Binary
                    ? rng.beta(priors.a_zeta, priors.b_zeta)
                    : rng.normal(priors.x_mean0, 1.0 / std::sqrt(priors.x_prec0));
  }
  if (priors.intercept)
    c.intercept = rng.normal(0.0, 1.0 / std::sqrt(priors.intercept_prec));
  return c;
}

void rpms_reallocate_observation(Rng& rng, RpmsState& st, int i,
                                 const Dataset& data, const RpmsPriors& priors) {
  int k = st.partition.k();
  int old = st.partition.label(i);
  bool singleton = st.partition.cluster_size(old) == 1;
  int m = priors.m_aux;
  auto xrow = data.x.row(static_cast<std::size_t>(i));
  double y = data.y[static_cast<std::size_t>(i)];
  double lambda = st.hyper.lambda;

  std::vector<RpmsCluster> aux;
  aux.reserve(static_cast<std::size_t>(m));
  if (singleton) aux.push_back(st.clusters[static_cast<std::size_t>(old)]);
  while (static_cast<int>(aux.size()) < m)
    aux.push_back(rpms_draw_g0(rng, st.hyper, priors, data.types));

  auto loglik = [&](const RpmsCluster& c) {
    double lp = rpms_response_loglik(c, lambda, y, xrow);
    if (st.mode == RpmsMode::Rpms)
      lp += rpms_covariate_loglik(st.mode, c, xrow, data.types, priors);
    return lp;
  };

  std::vector<double> logw(static_cast<std::size_t>(k + m));
  for (int j = 0; j < k; ++j) {
    int nj = st.partition.cluster_size(j) - (j == old ? 1 : 0);
    logw[static_cast<std::size_t>(j)] =
        nj == 0 ? -std::numeric_limits<double>::infinity()
                : std::log(static_cast<double>(nj)) +
                      loglik(st.clusters[static_cast<std::size_t>(j)]);
  }
  double log_alpha_m = std::log(st.hyper.conc.alpha / m);
  for (int t = 0; t < m; ++t)
    logw[static_cast<std::size_t>(k + t)] =
        log_alpha_m + loglik(aux[static_cast<std::size_t>(t)]);

  int choice = rng.categorical_logits(logw);
  if (choice < k) {
    if (choice != old) apply_move(st, i, choice, std::nullopt);
  } else {
    apply_move(st, i, Partition::kNewCluster,
               std::move(aux[static_cast<std::size_t>(choice - k)]));
  }
}

double rpms_spike_probability(double pi_d, double mu0, double tau_d,
                              double lambda, std::span<const double> x,
                              std::span<const double> resid) {
  if (pi_d <= 0.0) return 0.0;
  if (pi_d >= 1.0) return 1.0;
  double ls = slab_minus_spike_log_evidence(mu0, tau_d, lambda, x, resid);
  double log_odds_spike = std::log(pi_d) - std::log1p(-pi_d) - ls;
  return 1.0 / (1.0 + std::exp(-log_odds_spike));
}

void rpms_update_theta_spike_slab(Rng& rng, RpmsState& st, int j, int d,
                                  const Dataset& data, const RpmsPriors& priors) {
  auto& cluster = st.clusters[static_cast<std::size_t>(j)];
  std::vector<double> xs, rs;
  for (int i = 0; i < data.n(); ++i) {
    if (st.partition.label(i) != j) continue;
    auto xrow = data.x.row(static_cast<std::size_t>(i));
    double r = data.y[static_cast<std::size_t>(i)] - cluster.intercept;
    for (int dd = 0; dd < data.d(); ++dd)
      if (dd != d) r -= cluster.theta[static_cast<std::size_t>(dd)] *
                        xrow[static_cast<std::size_t>(dd)];
    xs.push_back(xrow[static_cast<std::size_t>(d)]);
    rs.push_back(r);
  }
  double tau_d = st.hyper.tau[static_cast<std::size_t>(d)];
  double p_spike = rpms_spike_probability(st.hyper.pi[static_cast<std::size_t>(d)],
                                          priors.mu0, tau_d, st.hyper.lambda, xs, rs);
  if (rng.uniform() < p_spike) {
    cluster.theta[static_cast<std::size_t>(d)] = 0.0;
    return;
  }
  NormalPosterior post =
      normal_coeff_conditional(priors.mu0, tau_d, st.hyper.lambda, xs, rs);
  cluster.theta[static_cast<std::size_t>(d)] =
      rng.normal(post.mean, 1.0 / std::sqrt(post.prec));
}

namespace {

void update_intercept(Rng& rng, RpmsState& st, int j, const Dataset& data,
                      const RpmsPriors& priors) {
  auto& cluster = st.clusters[static_cast<std::size_t>(j)];
  std::vector<double> ones, rs;
  for (int i = 0; i < data.n(); ++i) {
    if (st.partition.label(i) != j) continue;
    auto xrow = data.x.row(static_cast<std::size_t>(i));
    double r = data.y[static_cast<std::size_t>(i)];
    for (int dd = 0; dd < data.d(); ++dd)
      r -= cluster.theta[static_cast<std::size_t>(dd)] * xrow[static_cast<std::size_t>(dd)];
    ones.push_back(1.0);
    rs.push_back(r);
  }
  NormalPosterior post = normal_coeff_conditional(0.0, priors.intercept_prec,
                                                  st.hyper.lambda, ones, rs);
  cluster.intercept = rng.normal(post.mean, 1.0 / std::sqrt(post.prec));
}

}  // namespace

void rpms_update_cluster_covariates(Rng& rng, RpmsState& st, int j,
                                    const Dataset& data, const RpmsPriors& priors) {
  auto& cluster = st.clusters[static_cast<std::size_t>(j)];
  for (int d = 0; d < data.d(); ++d) {
    if (data.types[static_cast<std::size_t>(d)] == ColumnType::Binary) {
      double ones = 0.0, count = 0.0;
      for (int i = 0; i < data.n(); ++i) {
        if (st.partition.label(i) != j) continue;
        ones += data.x(static_cast<std::size_t>(i), static_cast<std::size_t>(d));
        count += 1.0;
      }
      cluster.zeta[static_cast<std::size_t>(d)] =
          rng.beta(priors.a_zeta + ones, priors.b_zeta + count - ones);
    } else {
      double sx = 0.0, count = 0.0;
      for (int i = 0; i < data.n(); ++i) {
        if (st.partition.label(i) != j) continue;
        sx += data.x(static_cast<std::size_t>(i), static_cast<std::size_t>(d));
        count += 1.0;
      }
      double prec = priors.x_prec0 + priors.x_noise_prec * count;
      double mean = (priors.x_prec0 * priors.x_mean0 + priors.x_noise_prec * sx) / prec;
      cluster.zeta[static_cast<std::size_t>(d)] =
          rng.normal(mean, 1.0 / std::sqrt(prec));
    }
  }
}

void rpms_update_hypers(Rng& rng, RpmsState& st, const Dataset& data,
                        const RpmsPriors& priors) {
  int k = st.partition.k();
  int dim = static_cast<int>(st.hyper.pi.size());
  double point = priors.spike_at_one ? 1.0 : 0.0;

  for (int d = 0; d < dim; ++d) {
    int zero_count = 0;
    for (const auto& c : st.clusters)
      if (c.theta[static_cast<std::size_t>(d)] == 0.0) ++zero_count;

    // Point mass survives only if its likelihood pi^z (1-pi)^(k-z) is
    // nonzero at the point location.
    bool point_possible = point == 0.0 ? zero_count == 0 : zero_count == k;
    double a1 = priors.a_pi + zero_count;
    double b1 = priors.b_pi + (k - zero_count);
    double omega = st.hyper.omega[static_cast<std::size_t>(d)];
    bool take_point = false;
    if (point_possible && omega < 1.0) {
      double log_w_point = std::log1p(-omega);
      double log_w_slab = std::log(omega) + log_beta(a1, b1) -
                          log_beta(priors.a_pi, priors.b_pi);
      double p_point = 1.0 / (1.0 + std::exp(log_w_slab - log_w_point));
      take_point = rng.uniform() < p_point;
    }
    st.hyper.pi[static_cast<std::size_t>(d)] =
        take_point ? point : rng.beta(a1, b1);

    int from_slab = st.hyper.pi[static_cast<std::size_t>(d)] == point ? 0 : 1;
    st.hyper.omega[static_cast<std::size_t>(d)] =
        rng.beta(priors.a_omega + from_slab, priors.b_omega + 1 - from_slab);

    double ss = 0.0;
    std::size_t nz = 0;
    for (const auto& c : st.clusters) {
      double th = c.theta[static_cast<std::size_t>(d)];
      if (th != 0.0) {
        double dev = th - priors.mu0;
        ss += dev * dev;
        ++nz;
      }
    }
    GammaParams tau_post = gamma_precision_update({priors.a_tau, priors.b_tau}, nz, ss);
    st.hyper.tau[static_cast<std::size_t>(d)] = rng.gamma(tau_post.shape, tau_post.rate);
  }

  double ss = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    const auto& c = st.clusters[static_cast<std::size_t>(st.partition.label(i))];
    double r = data.y[static_cast<std::size_t>(i)] -
               cluster_mean(c, data.x.row(static_cast<std::size_t>(i)));
    ss += r * r;
  }
  GammaParams lam_post = gamma_precision_update(
      {priors.a_lambda, priors.b_lambda}, static_cast<std::size_t>(data.n()), ss);
  st.hyper.lambda = rng.gamma(lam_post.shape, lam_post.rate);

  st.hyper.conc.alpha = sample_alpha(rng, st.partition, st.hyper.conc);
}

void rpms_sweep(Rng& rng, RpmsState& st, const Dataset& data,
                const RpmsPriors& priors, bool fixed_partition) {
  if (!fixed_partition)
    for (int i = 0; i < data.n(); ++i)
      rpms_reallocate_observation(rng, st, i, data, priors);
  for (int j = 0; j < st.partition.k(); ++j) {
    if (priors.intercept) update_intercept(rng, st, j, data, priors);
    for (int d = 0; d < data.d(); ++d)
      rpms_update_theta_spike_slab(rng, st, j, d, data, priors);
    if (st.mode == RpmsMode::Rpms)
      rpms_update_cluster_covariates(rng, st, j, data, priors);
  }
  rpms_update_hypers(rng, st, data, priors);
}

double rpms_joint_loglik(const RpmsState& st, const Dataset& data,
                         const RpmsPriors& priors) {
  double lp = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    const auto& c = st.clusters[static_cast<std::size_t>(st.partition.label(i))];
    auto xrow = data.x.row(static_cast<std::size_t>(i));
    lp += rpms_response_loglik(c, st.hyper.lambda, data.y[static_cast<std::size_t>(i)], xrow);
    if (st.mode == RpmsMode::Rpms)
      lp += rpms_covariate_loglik(st.mode, c, xrow, data.types, priors);
  }
  return lp;
}

RpmsState rpms_prior_draw(Rng& rng, int n, std::span<const ColumnType> types,
                          RpmsMode mode, const RpmsPriors& priors) {
  RpmsState st;
  st.mode = mode;
  std::size_t d = types.size();
  st.hyper.pi.resize(d);
  st.hyper.omega.resize(d);
  st.hyper.tau.resize(d);
  double point = priors.spike_at_one ? 1.0 : 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    st.hyper.omega[j] = rng.beta(priors.a_omega, priors.b_omega);
    st.hyper.pi[j] = rng.uniform() < st.hyper.omega[j]
                         ? rng.beta(priors.a_pi, priors.b_pi)
                         : point;
    st.hyper.tau[j] = rng.gamma(priors.a_tau, priors.b_tau);
  }
  st.hyper.lambda = rng.gamma(priors.a_lambda, priors.b_lambda);
  st.hyper.conc = {rng.gamma(priors.alpha_prior.shape, priors.alpha_prior.rate),
                   priors.alpha_prior};

  // Sequential urn draw of the partition.
  std::vector<int> assign(static_cast<std::size_t>(n));
  Partition p;
  for (int i = 0; i < n; ++i) {
    std::vector<double> probs = crp_predictive(p, st.hyper.conc.alpha);
    int c = rng.categorical(probs);
    assign[static_cast<std::size_t>(i)] = c;
    std::vector<int> sofar(assign.begin(), assign.begin() + i + 1);
    p = Partition::from_assign(sofar);
  }
  st.partition = p;
  for (int j = 0; j < st.partition.k(); ++j)
    st.clusters.push_back(rpms_draw_g0(rng, st.hyper, priors, types));
  return st;
}

void rpms_draw_data(Rng& rng, const RpmsState& st, const RpmsPriors& priors,
                    Dataset& data) {
  for (int i = 0; i < data.n(); ++i) {
    const auto& c = st.clusters[static_cast<std::size_t>(st.partition.label(i))];
    if (st.mode == RpmsMode::Rpms) {
      for (int d = 0; d < data.d(); ++d) {
        auto dd = static_cast<std::size_t>(d);
        data.x(static_cast<std::size_t>(i), dd) =
            data.types[dd] == ColumnType::Binary
                ? (rng.bernoulli(c.zeta[dd]) ? 1.0 : 0.0)
                : rng.normal(c.zeta[dd], 1.0 / std::sqrt(priors.x_noise_prec));
      }
    }
    data.y[static_cast<std::size_t>(i)] =
        rng.normal(cluster_mean(c, data.x.row(static_cast<std::size_t>(i))),
                   1.0 / std::sqrt(st.hyper.lambda));
  }
}

std::vector<FieldSpec> rpms_schema(RpmsMode mode, bool intercept) {
  std::vector<FieldSpec> s{{"lambda", FieldKind::Scalar},
                           {"alpha", FieldKind::Scalar},
                           {"pi", FieldKind::Vector},
                           {"omega", FieldKind::Vector},
                           {"tau", FieldKind::Vector},
                           {"theta", FieldKind::RealMatrix}};
  if (mode == RpmsMode::Rpms) s.push_back({"zeta", FieldKind::RealMatrix});
  if (intercept) s.push_back({"intercept", FieldKind::Vector});
  return s;
}

DrawRecord rpms_record(const RpmsState& st, long iter) {
  DrawRecord rec;
  rec.iter = iter;
  rec.assign = st.partition.assign();
  rec.scalars = {st.hyper.lambda, st.hyper.conc.alpha};
  rec.vectors = {st.hyper.pi, st.hyper.omega, st.hyper.tau};
  Matrix<double> theta;
  for (const auto& c : st.clusters) theta.append_row(c.theta);
  rec.matrices.push_back(std::move(theta));
  if (st.mode == RpmsMode::Rpms) {
    Matrix<double> zeta;
    for (const auto& c : st.clusters) zeta.append_row(c.zeta);
    rec.matrices.push_back(std::move(zeta));
  }
  return rec;
}

namespace {

// Shared core of the predictive summaries: per retained draw, component
// weights and means at the query profile.
template <class Consume>
void rpms_predictive_scan(const DrawArchive& draws, std::span<const double> xtilde,
                          RpmsMode mode, Rng& rng, const RpmsPriors& priors,
                          std::span<const ColumnType> types, Consume&& consume) {
  if (draws.size() == 0)
    throw std::invalid_argument("predictive requires a non-empty archive");
  std::vector<double> w;
  std::vector<double> means;
  for (std::size_t t = 0; t < draws.size(); ++t) {
    const auto& assign = draws.assign(t);
    const auto& theta = draws.mat(t, "theta");
    double lambda = draws.scalar(t, "lambda");
    double alpha = draws.scalar(t, "alpha");
    std::size_t k = theta.rows();
    std::vector<double> sizes(k, 0.0);
    for (int lbl : assign) sizes[static_cast<std::size_t>(lbl)] += 1.0;

    w.assign(k + 1, 0.0);
    means.assign(k + 1, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      double m = 0.0;
      for (std::size_t d = 0; d < xtilde.size(); ++d)
        m += theta(j, d) * xtilde[d];
      if (draws.has_field("intercept")) m += draws.vec(t, "intercept")[j];
      means[j] = m;
      double wt = sizes[j];
      if (mode == RpmsMode::Rpms) {
        const auto& zeta = draws.mat(t, "zeta");
        RpmsCluster c;
        c.zeta.assign(zeta.row(j).begin(), zeta.row(j).end());
        wt *= std::exp(rpms_covariate_loglik(RpmsMode::Rpms, c, xtilde, types, priors));
      }
      w[j] = wt;
    }
    // Fresh base-measure component carrying the unoccupied mass.
    double wnew = alpha;
    if (wnew > 0.0) {
      RpmsHyper h;
      h.pi = draws.vec(t, "pi");
      h.tau = draws.vec(t, "tau");
      RpmsCluster g0 = rpms_draw_g0(rng, h, priors, types);
      double m = g0.intercept;
      for (std::size_t d = 0; d < xtilde.size(); ++d) m += g0.theta[d] * xtilde[d];
      means[k] = m;
      if (mode == RpmsMode::Rpms)
        wnew *= std::exp(rpms_covariate_loglik(RpmsMode::Rpms, g0, xtilde, types, priors));
    }
    w[k] = wnew;

    double total = 0.0;
    for (double v : w) total += v;
    for (double& v : w) v /= total;
    consume(w, means, lambda);
  }
}

}  // namespace

std::vector<double> rpms_predictive_density(const DrawArchive& draws,
                                            std::span<const double> xtilde,
                                            std::span<const double> grid,
                                            RpmsMode mode, Rng& rng,
                                            const RpmsPriors& priors,
                                            std::span<const ColumnType> types) {
  std::vector<double> dens(grid.size(), 0.0);
  rpms_predictive_scan(draws, xtilde, mode, rng, priors, types,
                       [&](const std::vector<double>& w,
                           const std::vector<double>& means, double lambda) {
                         for (std::size_t g = 0; g < grid.size(); ++g) {
                           double v = 0.0;
                           for (std::size_t j = 0; j < w.size(); ++j)
                             if (w[j] > 0.0)
                               v += w[j] * std::exp(normal_logpdf_prec(
                                               grid[g], means[j], lambda));
                           dens[g] += v;
                         }
                       });
  for (double& v : dens) v /= static_cast<double>(draws.size());
  return dens;
}

double rpms_predictive_mean(const DrawArchive& draws,
                            std::span<const double> xtilde, RpmsMode mode,
                            Rng& rng, const RpmsPriors& priors,
                            std::span<const ColumnType> types) {
  double acc = 0.0;
  rpms_predictive_scan(draws, xtilde, mode, rng, priors, types,
                       [&](const std::vector<double>& w,
                           const std::vector<double>& means, double) {
                         for (std::size_t j = 0; j < w.size(); ++j)
                           acc += w[j] * means[j];
                       });
  return acc / static_cast<double>(draws.size());
}

std::vector<double> rpms_inclusion_weighted(const DrawArchive& draws) {
  if (draws.size() == 0) return {};
  std::size_t dim = static_cast<std::size_t>(draws.meta().d);
  std::vector<double> incl(dim, 0.0);
  for (std::size_t t = 0; t < draws.size(); ++t) {
    const auto& assign = draws.assign(t);
    const auto& theta = draws.mat(t, "theta");
    std::vector<double> sizes(theta.rows(), 0.0);
    for (int lbl : assign) sizes[static_cast<std::size_t>(lbl)] += 1.0;
    double n = static_cast<double>(assign.size());
    for (std::size_t j = 0; j < theta.rows(); ++j)
      for (std::size_t d = 0; d < dim; ++d)
        if (theta(j, d) != 0.0) incl[d] += sizes[j] / n;
  }
  for (double& v : incl) v /= static_cast<double>(draws.size());
  return incl;
}

}  // namespace rpmx
