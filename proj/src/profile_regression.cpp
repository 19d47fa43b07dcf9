#include "rpmx/profile_regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "rpmx/distributions.hpp"
#include "rpmx/special_functions.hpp"

namespace rpmx {

namespace {

constexpr double kProbFloor = 1e-12;

double clamp_prob(double p) {
  return std::clamp(p, kProbFloor, 1.0 - kProbFloor);
}

double lse2(double a, double b) {
  if (a < b) std::swap(a, b);
  if (std::isinf(a) && a < 0.0) return a;
  return a + std::log1p(std::exp(b - a));
}

// Keep the per-cluster table aligned with the canonical relabeling a
// partition move produces.
void apply_move(PrState& st, int i, int target, std::optional<PrCluster> fresh) {
  MoveResult mv = st.partition.move_observation(i, target);
  std::vector<PrCluster> next(static_cast<std::size_t>(st.partition.k()));
  for (std::size_t j = 0; j < mv.label_map.size(); ++j) {
    int dst = mv.label_map[j];
    if (dst >= 0) next[static_cast<std::size_t>(dst)] = std::move(st.clusters[j]);
  }
  if (mv.created_cluster)
    next[static_cast<std::size_t>(mv.new_label)] = std::move(*fresh);
  st.clusters = std::move(next);
}

}  // namespace

double PrEmpirical::log_density(std::size_t d, double x) const {
  if (types[d] == ColumnType::Binary)
    return x != 0.0 ? std::log(p1[d]) : std::log1p(-p1[d]);
  return normal_logpdf_prec(x, mean[d], prec[d]);
}

PrEmpirical pr_empirical_from_data(const Dataset& data) {
  PrEmpirical emp;
  emp.types = data.types;
  auto d = static_cast<std::size_t>(data.d());
  auto n = static_cast<std::size_t>(data.n());
  emp.p1.assign(d, 0.0);
  emp.mean.assign(d, 0.0);
  emp.prec.assign(d, 1.0);
  if (n == 0) throw std::invalid_argument("empirical table of an empty dataset");
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += data.x(i, j);
    double m = sum / static_cast<double>(n);
    if (emp.types[j] == ColumnType::Binary) {
      emp.p1[j] = clamp_prob(m);
    } else {
      emp.mean[j] = m;
      double ss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double c = data.x(i, j) - m;
        ss += c * c;
      }
      double var = ss / static_cast<double>(n);
      emp.prec[j] = var > kProbFloor ? 1.0 / var : 1.0;
    }
  }
  return emp;
}

double vs_covariate_density(double pi_d, double model_density,
                            double fallback_density) {
  return pi_d * model_density + (1.0 - pi_d) * fallback_density;
}

double pr_profile_log_density(ColumnType type, double zeta, double x,
                              const PrPriors& priors) {
  if (type == ColumnType::Binary) {
    double p = clamp_prob(zeta);
    return x != 0.0 ? std::log(p) : std::log1p(-p);
  }
  return normal_logpdf_prec(x, zeta, priors.x_noise_prec);
}

PrState pr_init(const Dataset& data, const PrPriors& priors) {
  PrState st;
  st.partition = Partition::one_cluster(data.n());
  PrCluster c;
  c.theta = 0.0;
  auto d = static_cast<std::size_t>(data.d());
  c.zeta.resize(d);
  for (std::size_t j = 0; j < d; ++j)
    c.zeta[j] = data.types[j] == ColumnType::Binary ? 0.5 : priors.x_mean0;
  st.clusters = {std::move(c)};
  st.pi.assign(d, 0.5);
  st.lambda = 1.0;
  st.conc = {1.0, priors.alpha_prior};
  st.member = Matrix<int>(static_cast<std::size_t>(data.n()), d, 1);
  return st;
}

PrCluster pr_draw_g0(Rng& rng, const PrPriors& priors,
                     std::span<const ColumnType> types) {
  PrCluster c;
  c.theta = rng.normal(0.0, 1.0 / std::sqrt(priors.theta_prec));
  c.zeta.resize(types.size());
  for (std::size_t j = 0; j < types.size(); ++j)
    c.zeta[j] = types[j] == ColumnType::Binary
                    ? rng.beta(priors.a_zeta, priors.b_zeta)
                    : rng.normal(priors.x_mean0, 1.0 / std::sqrt(priors.x_prec0));
  return c;
}

double pr_obs_log_weight(const PrState& st, const PrCluster& cluster,
                         const PrEmpirical& emp, const Dataset& data, int i,
                         const PrPriors& priors) {
  auto ii = static_cast<std::size_t>(i);
  double lp = normal_logpdf_prec(data.y[ii], cluster.theta, st.lambda);
  for (std::size_t d = 0; d < st.pi.size(); ++d) {
    double x = data.x(ii, d);
    double lp_model = pr_profile_log_density(emp.types[d], cluster.zeta[d], x, priors);
    double lp_fall = emp.log_density(d, x);
    double pi_d = st.pi[d];
    lp += lse2(std::log(pi_d) + lp_model, std::log1p(-pi_d) + lp_fall);
  }
  return lp;
}

void pr_reallocate_observation(Rng& rng, PrState& st, int i,
                               const Dataset& data, const PrEmpirical& emp,
                               const PrPriors& priors) {
  int k = st.partition.k();
  int old = st.partition.label(i);
  bool singleton = st.partition.cluster_size(old) == 1;
  int m = priors.m_aux;

  std::vector<PrCluster> aux;
  aux.reserve(static_cast<std::size_t>(m));
  if (singleton) aux.push_back(st.clusters[static_cast<std::size_t>(old)]);
  while (static_cast<int>(aux.size()) < m)
    aux.push_back(pr_draw_g0(rng, priors, emp.types));

  std::vector<double> logw(static_cast<std::size_t>(k + m));
  for (int j = 0; j < k; ++j) {
    int nj = st.partition.cluster_size(j) - (j == old ? 1 : 0);
    logw[static_cast<std::size_t>(j)] =
        nj == 0 ? -std::numeric_limits<double>::infinity()
                : std::log(static_cast<double>(nj)) +
                      pr_obs_log_weight(st, st.clusters[static_cast<std::size_t>(j)],
                                        emp, data, i, priors);
  }
  double log_alpha_m = std::log(st.conc.alpha / m);
  for (int t = 0; t < m; ++t)
    logw[static_cast<std::size_t>(k + t)] =
        log_alpha_m +
        pr_obs_log_weight(st, aux[static_cast<std::size_t>(t)], emp, data, i, priors);

  int choice = rng.categorical_logits(logw);
  if (choice < k) {
    if (choice != old) apply_move(st, i, choice, std::nullopt);
  } else {
    apply_move(st, i, Partition::kNewCluster,
               std::move(aux[static_cast<std::size_t>(choice - k)]));
  }
}

void pr_update_memberships(Rng& rng, PrState& st, const Dataset& data,
                           const PrEmpirical& emp, const PrPriors& priors) {
  for (int i = 0; i < data.n(); ++i) {
    auto ii = static_cast<std::size_t>(i);
    const PrCluster& cl = st.clusters[static_cast<std::size_t>(st.partition.label(i))];
    for (std::size_t d = 0; d < st.pi.size(); ++d) {
      double pi_d = st.pi[d];
      double x = data.x(ii, d);
      double lo = std::log(pi_d) - std::log1p(-pi_d) +
                  pr_profile_log_density(emp.types[d], cl.zeta[d], x, priors) -
                  emp.log_density(d, x);
      double p = std::isinf(lo) ? (lo > 0.0 ? 1.0 : 0.0)
                                : 1.0 / (1.0 + std::exp(-lo));
      st.member(ii, d) = rng.uniform() < p ? 1 : 0;
    }
  }
}

void pr_update_clusters(Rng& rng, PrState& st, const Dataset& data,
                        const PrPriors& priors) {
  for (int j = 0; j < st.partition.k(); ++j) {
    auto& cl = st.clusters[static_cast<std::size_t>(j)];
    std::vector<double> ys, ones;
    for (int i = 0; i < data.n(); ++i) {
      if (st.partition.label(i) != j) continue;
      ys.push_back(data.y[static_cast<std::size_t>(i)]);
      ones.push_back(1.0);
    }
    NormalPosterior post =
        normal_coeff_conditional(0.0, priors.theta_prec, st.lambda, ones, ys);
    cl.theta = rng.normal(post.mean, 1.0 / std::sqrt(post.prec));

    for (std::size_t d = 0; d < cl.zeta.size(); ++d) {
      if (data.types[d] == ColumnType::Binary) {
        std::vector<int> xs;
        for (int i = 0; i < data.n(); ++i) {
          if (st.partition.label(i) != j) continue;
          if (st.member(static_cast<std::size_t>(i), d) == 0) continue;
          xs.push_back(data.x(static_cast<std::size_t>(i), d) != 0.0 ? 1 : 0);
        }
        BetaParams bp = beta_bernoulli_update({priors.a_zeta, priors.b_zeta}, xs);
        cl.zeta[d] = rng.beta(bp.a, bp.b);
      } else {
        std::vector<double> xs, on;
        for (int i = 0; i < data.n(); ++i) {
          if (st.partition.label(i) != j) continue;
          if (st.member(static_cast<std::size_t>(i), d) == 0) continue;
          xs.push_back(data.x(static_cast<std::size_t>(i), d));
          on.push_back(1.0);
        }
        NormalPosterior zp = normal_coeff_conditional(
            priors.x_mean0, priors.x_prec0, priors.x_noise_prec, on, xs);
        cl.zeta[d] = rng.normal(zp.mean, 1.0 / std::sqrt(zp.prec));
      }
    }
  }
}

void pr_update_hypers(Rng& rng, PrState& st, const Dataset& data,
                      const PrPriors& priors) {
  for (std::size_t d = 0; d < st.pi.size(); ++d) {
    int in_model = 0;
    for (int i = 0; i < data.n(); ++i)
      in_model += st.member(static_cast<std::size_t>(i), d);
    st.pi[d] = rng.beta(priors.a_pi + in_model,
                        priors.b_pi + data.n() - in_model);
  }

  double ss = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    double r = data.y[static_cast<std::size_t>(i)] -
               st.clusters[static_cast<std::size_t>(st.partition.label(i))].theta;
    ss += r * r;
  }
  GammaParams post = gamma_precision_update(
      {priors.a_lambda, priors.b_lambda}, static_cast<std::size_t>(data.n()), ss);
  st.lambda = rng.gamma(post.shape, post.rate);

  st.conc.alpha = sample_alpha(rng, st.partition, st.conc);
}

void pr_sweep(Rng& rng, PrState& st, const Dataset& data,
              const PrEmpirical& emp, const PrPriors& priors,
              bool fixed_partition) {
  if (!fixed_partition)
    for (int i = 0; i < data.n(); ++i)
      pr_reallocate_observation(rng, st, i, data, emp, priors);
  pr_update_memberships(rng, st, data, emp, priors);
  pr_update_clusters(rng, st, data, priors);
  pr_update_hypers(rng, st, data, priors);
}

double pr_joint_loglik(const PrState& st, const Dataset& data,
                       const PrEmpirical& emp, const PrPriors& priors) {
  double lp = 0.0;
  for (int i = 0; i < data.n(); ++i)
    lp += pr_obs_log_weight(
        st, st.clusters[static_cast<std::size_t>(st.partition.label(i))], emp,
        data, i, priors);
  return lp;
}

PrState pr_prior_draw(Rng& rng, int n, std::span<const ColumnType> types,
                      const PrPriors& priors) {
  PrState st;
  auto d = types.size();
  st.pi.resize(d);
  for (std::size_t j = 0; j < d; ++j)
    st.pi[j] = rng.beta(priors.a_pi, priors.b_pi);
  st.lambda = rng.gamma(priors.a_lambda, priors.b_lambda);
  st.conc = {rng.gamma(priors.alpha_prior.shape, priors.alpha_prior.rate),
             priors.alpha_prior};

  std::vector<int> assign(static_cast<std::size_t>(n));
  Partition p;
  for (int i = 0; i < n; ++i) {
    std::vector<double> probs = crp_predictive(p, st.conc.alpha);
    assign[static_cast<std::size_t>(i)] = rng.categorical(probs);
    std::vector<int> sofar(assign.begin(), assign.begin() + i + 1);
    p = Partition::from_assign(sofar);
  }
  st.partition = p;
  st.clusters.resize(static_cast<std::size_t>(st.partition.k()));
  for (auto& cl : st.clusters) cl = pr_draw_g0(rng, priors, types);

  st.member = Matrix<int>(static_cast<std::size_t>(n), d, 0);
  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i)
    for (std::size_t j = 0; j < d; ++j)
      st.member(i, j) = rng.bernoulli(st.pi[j]) ? 1 : 0;
  return st;
}

void pr_draw_data(Rng& rng, const PrState& st, const PrEmpirical& emp,
                  const PrPriors& priors, Dataset& data) {
  double sd = 1.0 / std::sqrt(st.lambda);
  for (int i = 0; i < data.n(); ++i) {
    auto ii = static_cast<std::size_t>(i);
    const PrCluster& cl = st.clusters[static_cast<std::size_t>(st.partition.label(i))];
    for (std::size_t d = 0; d < cl.zeta.size(); ++d) {
      bool from_model = st.member(ii, d) == 1;
      if (emp.types[d] == ColumnType::Binary) {
        double p = from_model ? clamp_prob(cl.zeta[d]) : emp.p1[d];
        data.x(ii, d) = rng.bernoulli(p) ? 1.0 : 0.0;
      } else {
        double mu = from_model ? cl.zeta[d] : emp.mean[d];
        double prec = from_model ? priors.x_noise_prec : emp.prec[d];
        data.x(ii, d) = rng.normal(mu, 1.0 / std::sqrt(prec));
      }
    }
    data.y[ii] = rng.normal(cl.theta, sd);
  }
}

std::vector<FieldSpec> pr_schema() {
  return {{"lambda", FieldKind::Scalar},
          {"alpha", FieldKind::Scalar},
          {"pi", FieldKind::Vector},
          {"theta", FieldKind::Vector},
          {"zeta", FieldKind::RealMatrix}};
}

DrawRecord pr_record(const PrState& st, long iter) {
  DrawRecord rec;
  rec.iter = iter;
  rec.assign = st.partition.assign();
  rec.scalars = {st.lambda, st.conc.alpha};
  rec.vectors.push_back(st.pi);
  std::vector<double> thetas;
  thetas.reserve(st.clusters.size());
  for (const auto& cl : st.clusters) thetas.push_back(cl.theta);
  rec.vectors.push_back(std::move(thetas));
  Matrix<double> zeta;
  for (const auto& cl : st.clusters) zeta.append_row(cl.zeta);
  rec.matrices.push_back(std::move(zeta));
  return rec;
}

namespace {

// Per retained draw: component weights and intercepts at the query profile,
// with one fresh base-measure draw standing in for the unoccupied mass.
template <class Consume>
void pr_predictive_scan(const DrawArchive& draws, const PrEmpirical& emp,
                        std::span<const double> xtilde, Rng& rng,
                        const PrPriors& priors, Consume&& consume) {
  if (draws.size() == 0)
    throw std::invalid_argument("predictive requires a non-empty archive");
  for (std::size_t t = 0; t < draws.size(); ++t) {
    const auto& assign = draws.assign(t);
    const auto& zeta = draws.mat(t, "zeta");
    const auto& thetas = draws.vec(t, "theta");
    const auto& pi = draws.vec(t, "pi");
    double lambda = draws.scalar(t, "lambda");
    double alpha = draws.scalar(t, "alpha");
    std::size_t k = zeta.rows();
    std::vector<double> sizes(k, 0.0);
    for (int lbl : assign) sizes[static_cast<std::size_t>(lbl)] += 1.0;

    auto profile_weight = [&](std::span<const double> z) {
      double w = 1.0;
      for (std::size_t d = 0; d < xtilde.size(); ++d) {
        double pm = std::exp(
            pr_profile_log_density(emp.types[d], z[d], xtilde[d], priors));
        double pf = std::exp(emp.log_density(d, xtilde[d]));
        w *= vs_covariate_density(pi[d], pm, pf);
      }
      return w;
    };

    std::vector<double> w(k + 1), means(k + 1);
    for (std::size_t j = 0; j < k; ++j) {
      w[j] = sizes[j] * profile_weight(zeta.row(j));
      means[j] = thetas[j];
    }
    PrCluster g0 = pr_draw_g0(rng, priors, emp.types);
    w[k] = alpha * profile_weight(g0.zeta);
    means[k] = g0.theta;
    double total = 0.0;
    for (double v : w) total += v;
    if (total <= 0.0) {
      w.assign(k + 1, 1.0 / static_cast<double>(k + 1));
    } else {
      for (double& v : w) v /= total;
    }
    consume(w, means, lambda);
  }
}

}  // namespace

std::vector<double> pr_predictive_density(const DrawArchive& draws,
                                          const PrEmpirical& emp,
                                          std::span<const double> xtilde,
                                          std::span<const double> grid,
                                          Rng& rng, const PrPriors& priors) {
  std::vector<double> dens(grid.size(), 0.0);
  pr_predictive_scan(draws, emp, xtilde, rng, priors,
                     [&](const std::vector<double>& w,
                         const std::vector<double>& means, double lambda) {
                       for (std::size_t g = 0; g < grid.size(); ++g) {
                         double v = 0.0;
                         for (std::size_t j = 0; j < w.size(); ++j)
                           v += w[j] * std::exp(normal_logpdf_prec(
                                           grid[g], means[j], lambda));
                         dens[g] += v;
                       }
                     });
  for (double& v : dens) v /= static_cast<double>(draws.size());
  return dens;
}

double pr_predictive_mean(const DrawArchive& draws, const PrEmpirical& emp,
                          std::span<const double> xtilde, Rng& rng,
                          const PrPriors& priors) {
  double acc = 0.0;
  pr_predictive_scan(draws, emp, xtilde, rng, priors,
                     [&](const std::vector<double>& w,
                         const std::vector<double>& means, double) {
                       for (std::size_t j = 0; j < w.size(); ++j)
                         acc += w[j] * means[j];
                     });
  return acc / static_cast<double>(draws.size());
}

double pr_relevance(const DrawArchive& draws, int d) {
  if (draws.size() == 0)
    throw std::invalid_argument("relevance of an empty archive");
  double acc = 0.0;
  for (std::size_t t = 0; t < draws.size(); ++t)
    acc += draws.vec(t, "pi")[static_cast<std::size_t>(d)];
  return acc / static_cast<double>(draws.size());
}

}  // namespace rpmx
