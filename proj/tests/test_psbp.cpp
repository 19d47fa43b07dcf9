#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "rpmx/psbp.hpp"
#include "rpmx/special_functions.hpp"

using namespace rpmx;

namespace {

constexpr double kPi = 3.14159265358979323846;

Dataset tiny_data(std::vector<std::vector<double>> rows, std::vector<double> y) {
  Dataset data;
  data.x = Matrix<double>::from_rows(rows);
  data.y = std::move(y);
  data.types.assign(data.x.cols(), ColumnType::Continuous);
  for (std::size_t j = 0; j < data.x.cols(); ++j)
    data.names.push_back("x" + std::to_string(j + 1));
  return data;
}

// Hand-built state used by the quadrature oracle below.
PsbpState oracle_state(const Dataset& data, const PsbpPriors& priors) {
  PsbpState st = psbp_init(data, priors);
  st.xi = Matrix<double>::from_rows({{0.5, -0.2}, {0.1, 0.9}, {0.0, 0.0}});
  st.theta = Matrix<double>::from_rows({{1.0, 0.2}, {-0.5, 0.4}, {0.3, 0.0}});
  st.kappa = {0.3, 0.7};
  st.tau = {2.0, 0.5};
  st.lambda = 1.3;
  st.alloc = {0, 1, 2, 1};
  st.latents = {{0.3}, {-0.4, 0.8}, {-0.2, -0.9}, {-1.0, 0.5}};
  return st;
}

double grid_evidence(double mu, double tau, double prec,
                     const std::vector<double>& xs,
                     const std::vector<double>& rs) {
  const int grid = 240001;
  const double lo = -30.0, hi = 30.0;
  double dx = (hi - lo) / (grid - 1);
  std::vector<double> lw(grid);
  double spike = 0.0;
  for (double r : rs) spike += normal_logpdf_prec(r, 0.0, prec);
  for (int g = 0; g < grid; ++g) {
    double v = lo + g * dx;
    double lp = normal_logpdf_prec(v, mu, tau);
    for (std::size_t i = 0; i < xs.size(); ++i)
      lp += normal_logpdf_prec(rs[i], v * xs[i], prec);
    lw[static_cast<std::size_t>(g)] = lp;
  }
  return log_sum_exp(lw) + std::log(dx) - spike;
}

}  // namespace

TEST_CASE("probit weights: flat sticks, saturation, normalization") {
  Matrix<double> flat(3, 2, 0.0);
  std::vector<double> x{1.0, -2.0};
  std::vector<double> w = probit_weights(flat, x);
  CHECK(w[0] == 0.5);
  CHECK(w[1] == 0.25);
  CHECK(w[2] == 0.25);

  Matrix<double> sat = Matrix<double>::from_rows({{40.0, 0.0}, {1.0, 1.0}, {0.0, 0.0}});
  std::vector<double> e1{1.0, 0.0};
  std::vector<double> ws = probit_weights(sat, e1);
  CHECK(ws[0] == 1.0);
  CHECK(ws[1] == 0.0);
  CHECK(ws[2] == 0.0);

  Rng rng(51, 0);
  for (int rep = 0; rep < 50; ++rep) {
    Matrix<double> xi(5, 2);
    for (std::size_t k = 0; k < 5; ++k)
      for (std::size_t d = 0; d < 2; ++d) xi(k, d) = rng.normal(0.0, 2.0);
    std::vector<double> xr{rng.normal(), rng.normal()};
    std::vector<double> wr = probit_weights(xi, xr);
    double total = 0.0;
    for (double v : wr) {
      CHECK(v >= 0.0);
      total += v;
    }
    CHECK(std::abs(total - 1.0) < 1e-15);
  }

  CHECK_THROWS_AS(probit_weights(Matrix<double>(0, 2), x), std::invalid_argument);
}

TEST_CASE("a zeroed coefficient column leaves the weights untouched") {
  Matrix<double> xi = Matrix<double>::from_rows({{0.7, 0.0}, {-1.2, 0.0}, {0.0, 0.0}});
  std::vector<double> a{0.5, -8.0}, b{0.5, 311.0};
  CHECK(probit_weights(xi, a) == probit_weights(xi, b));
}

TEST_CASE("initial state shape") {
  Dataset data = tiny_data({{1.0, 0.0}, {0.0, 1.0}}, {0.1, -0.2});
  PsbpPriors priors;
  priors.K = 7;
  PsbpState st = psbp_init(data, priors);
  CHECK(st.K == 7);
  CHECK(st.xi.rows() == 7);
  CHECK(st.theta.cols() == 2);
  CHECK(st.kappa == std::vector<double>{0.5, 0.5});
  CHECK(st.alloc == std::vector<int>{0, 0});
}

TEST_CASE("allocation frequencies match the stick-weighted likelihood") {
  Dataset data = tiny_data({{1.0}}, {0.5});
  PsbpPriors priors;
  priors.K = 2;
  PsbpState st = psbp_init(data, priors);
  st.xi(0, 0) = 0.4;
  st.theta(0, 0) = 1.2;
  st.theta(1, 0) = -0.8;
  st.lambda = 1.0;

  double psi0 = normal_cdf(0.4);
  double f0 = std::exp(normal_logpdf_prec(0.5, 1.2, 1.0));
  double f1 = std::exp(normal_logpdf_prec(0.5, -0.8, 1.0));
  double p0 = psi0 * f0 / (psi0 * f0 + (1.0 - psi0) * f1);

  Rng rng(52, 0);
  const long iters = 200000;
  long hits = 0;
  for (long t = 0; t < iters; ++t) {
    psbp_allocation_update(rng, st, data);
    if (st.alloc[0] == 0) ++hits;
  }
  CHECK(std::abs(hits / static_cast<double>(iters) - p0) < 0.005);
}

TEST_CASE("probit latents carry the right count, signs, and means") {
  Dataset data = tiny_data({{1.0}, {1.0}}, {0.0, 0.0});
  PsbpPriors priors;
  priors.K = 3;
  PsbpState st = psbp_init(data, priors);
  st.alloc = {0, 2};

  Rng rng(53, 0);
  const long iters = 200000;
  double s0 = 0.0, s1a = 0.0, s1b = 0.0;
  for (long t = 0; t < iters; ++t) {
    psbp_probit_augmentation_update(rng, st, data);
    REQUIRE(st.latents[0].size() == 1);
    REQUIRE(st.latents[1].size() == 2);
    CHECK(st.latents[0][0] > 0.0);
    CHECK(st.latents[1][0] < 0.0);
    CHECK(st.latents[1][1] < 0.0);
    s0 += st.latents[0][0];
    s1a += st.latents[1][0];
    s1b += st.latents[1][1];
  }
  double half = std::sqrt(2.0 / kPi);
  CHECK(std::abs(s0 / iters - half) < 0.0067);
  CHECK(std::abs(s1a / iters + half) < 0.0067);
  CHECK(std::abs(s1b / iters + half) < 0.0067);
}

TEST_CASE("inclusion log odds match direct integration of both evidence terms") {
  Dataset data = tiny_data({{1.0, 0.5}, {-0.3, 1.2}, {0.8, -0.7}, {0.2, 0.1}},
                           {0.4, -1.1, 2.2, 0.9});
  PsbpPriors priors;
  priors.K = 3;
  PsbpState st = oracle_state(data, priors);

  for (int k = 0; k < 3; ++k) {
    for (int d = 0; d < 2; ++d) {
      auto kk = static_cast<std::size_t>(k);
      auto dd = static_cast<std::size_t>(d);
      double expect = std::log(st.kappa[dd]) - std::log1p(-st.kappa[dd]);
      std::vector<double> xs, rs;
      if (k + 1 < st.K) {
        for (std::size_t i = 0; i < 4; ++i) {
          if (st.latents[i].size() <= kk) continue;
          double base = 0.0;
          for (std::size_t j = 0; j < 2; ++j)
            if (j != dd) base += st.xi(kk, j) * data.x(i, j);
          xs.push_back(data.x(i, dd));
          rs.push_back(st.latents[i][kk] - base);
        }
        expect += grid_evidence(priors.mu_xi, priors.tau_xi, 1.0, xs, rs);
      }
      xs.clear();
      rs.clear();
      for (std::size_t i = 0; i < 4; ++i) {
        if (st.alloc[i] != k) continue;
        double base = 0.0;
        for (std::size_t j = 0; j < 2; ++j)
          if (j != dd) base += st.theta(kk, j) * data.x(i, j);
        xs.push_back(data.x(i, dd));
        rs.push_back(data.y[i] - base);
      }
      expect += grid_evidence(0.0, st.tau[dd], st.lambda, xs, rs);
      CHECK(std::abs(psbp_gamma_log_odds(st, data, k, d, priors) - expect) < 1e-6);
    }
  }
}

TEST_CASE("a pinned inclusion rate forces the gate deterministically") {
  Dataset data = tiny_data({{1.0, 0.5}, {-0.3, 1.2}, {0.8, -0.7}, {0.2, 0.1}},
                           {0.4, -1.1, 2.2, 0.9});
  PsbpPriors priors;
  priors.K = 3;
  PsbpState st = oracle_state(data, priors);
  st.kappa = {0.0, 1.0};
  CHECK(psbp_gamma_log_odds(st, data, 1, 0, priors) ==
        -std::numeric_limits<double>::infinity());
  CHECK(psbp_gamma_log_odds(st, data, 1, 1, priors) ==
        std::numeric_limits<double>::infinity());

  Rng rng(54, 0);
  psbp_xi_gamma_update(rng, st, data, priors);
  for (int k = 0; k < 3; ++k) {
    auto kk = static_cast<std::size_t>(k);
    CHECK(st.gamma(kk, 0) == 0);
    CHECK(st.xi(kk, 0) == 0.0);
    CHECK(st.theta(kk, 0) == 0.0);
    CHECK(st.gamma(kk, 1) == 1);
  }
}

TEST_CASE("inclusion rate update mixes the point mass with the counted posterior") {
  Dataset data = tiny_data({{1.0}}, {0.0});
  PsbpPriors priors;
  priors.K = 3;
  PsbpState st = psbp_init(data, priors);

  SUBCASE("an inert column revives with the marginal zero probability") {
    double m1 = std::exp(log_beta(0.5, 0.5 + 3) - log_beta(0.5, 0.5));
    // Smooth substitution check of the same integral.
    const int grid = 200001;
    double dt = (kPi / 2.0) / (grid - 1);
    double quad = 0.0;
    for (int g = 0; g < grid; ++g) {
      double c2 = std::cos(g * dt) * std::cos(g * dt);
      double v = std::pow(c2, 3) * (2.0 / kPi);
      quad += (g == 0 || g == grid - 1) ? 0.5 * v : v;
    }
    quad *= dt;
    CHECK(std::abs(m1 - quad) < 1e-9);
    double p_active = m1 / (1.0 + m1);

    for (int k = 0; k < 3; ++k) st.gamma(static_cast<std::size_t>(k), 0) = 0;
    Rng rng(55, 0);
    const long iters = 200000;
    long active = 0;
    double ksum = 0.0;
    for (long t = 0; t < iters; ++t) {
      psbp_kappa_u_update(rng, st, priors);
      if (st.u[0] == 1) {
        ++active;
        ksum += st.kappa[0];
      } else {
        CHECK(st.kappa[0] == 0.0);
      }
    }
    CHECK(std::abs(active / static_cast<double>(iters) - p_active) < 0.005);
    // Active draws follow Beta(a, b + K).
    CHECK(std::abs(ksum / active - 0.125) < 0.0035);
  }

  SUBCASE("any active gate keeps the column alive") {
    st.gamma(0, 0) = 1;
    st.gamma(1, 0) = 0;
    st.gamma(2, 0) = 1;
    Rng rng(56, 0);
    const long iters = 200000;
    double ksum = 0.0;
    for (long t = 0; t < iters; ++t) {
      psbp_kappa_u_update(rng, st, priors);
      CHECK(st.u[0] == 1);
      ksum += st.kappa[0];
    }
    // Beta(0.5 + 2, 0.5 + 1)
    CHECK(std::abs(ksum / iters - 0.625) < 0.0025);
  }
}

TEST_CASE("precision updates count only gated coefficients") {
  Dataset data = tiny_data({{1.0, 0.0}, {0.0, 1.0}}, {1.0, -0.5});
  PsbpPriors priors;
  priors.K = 3;
  PsbpState st = psbp_init(data, priors);
  st.gamma = Matrix<int>(3, 2, 0);
  st.gamma(0, 0) = 1;
  st.gamma(2, 0) = 1;
  st.theta = Matrix<double>::from_rows({{0.7, 0.0}, {0.0, 0.0}, {-0.2, 0.0}});
  st.alloc = {0, 1};

  Rng rng(57, 0);
  const long iters = 200000;
  double t0 = 0.0, t1 = 0.0, lam = 0.0;
  for (long t = 0; t < iters; ++t) {
    psbp_tau_lambda_update(rng, st, data, priors);
    t0 += st.tau[0];
    t1 += st.tau[1];
    lam += st.lambda;
  }
  // tau_0 ~ Gamma(1 + 1, 5 + (0.49 + 0.04)/2); tau_1 keeps its prior.
  CHECK(std::abs(t0 / iters - 2.0 / 5.265) < 0.003);
  CHECK(std::abs(t1 / iters - 0.2) < 0.0023);
  // Residuals 0.3 and -0.5: lambda ~ Gamma(1 + 1, 1 + 0.17).
  CHECK(std::abs(lam / iters - 2.0 / 1.17) < 0.0135);
}

TEST_CASE("sweeps preserve the gate linkage and bookkeeping invariants") {
  Rng gen(58, 0);
  const int n = 25;
  Dataset data;
  data.types = {ColumnType::Continuous, ColumnType::Continuous};
  data.names = {"x1", "x2"};
  data.x = Matrix<double>(n, 2);
  data.y.resize(n);
  for (int i = 0; i < n; ++i) {
    auto ii = static_cast<std::size_t>(i);
    data.x(ii, 0) = gen.normal();
    data.x(ii, 1) = gen.normal();
    data.y[ii] = 1.5 * data.x(ii, 0) + gen.normal();
  }

  PsbpPriors priors;
  priors.K = 5;
  PsbpState st = psbp_init(data, priors);
  Rng rng(59, 0);
  for (int sweep = 0; sweep < 50; ++sweep) {
    psbp_sweep(rng, st, data, priors);
    for (int k = 0; k < st.K; ++k) {
      auto kk = static_cast<std::size_t>(k);
      for (std::size_t d = 0; d < 2; ++d) {
        if (st.gamma(kk, d) == 0) {
          CHECK(st.xi(kk, d) == 0.0);
          CHECK(st.theta(kk, d) == 0.0);
        } else {
          CHECK(st.xi(kk, d) != 0.0);
          CHECK(st.theta(kk, d) != 0.0);
        }
      }
    }
    for (std::size_t d = 0; d < 2; ++d) {
      int total = 0;
      for (int k = 0; k < st.K; ++k) total += st.gamma(static_cast<std::size_t>(k), d);
      if (st.u[d] == 0) {
        CHECK(st.kappa[d] == 0.0);
        CHECK(total == 0);
      } else {
        CHECK(st.kappa[d] > 0.0);
      }
      if (total > 0) CHECK(st.u[d] == 1);
    }
    for (int i = 0; i < n; ++i) {
      auto ii = static_cast<std::size_t>(i);
      auto c = static_cast<std::size_t>(st.alloc[ii]);
      CHECK(st.alloc[ii] >= 0);
      CHECK(st.alloc[ii] < st.K);
      CHECK(st.latents[ii].size() ==
            std::min(c + 1, static_cast<std::size_t>(st.K - 1)));
      for (std::size_t j = 0; j < st.latents[ii].size(); ++j) {
        if (j == c)
          CHECK(st.latents[ii][j] > 0.0);
        else
          CHECK(st.latents[ii][j] < 0.0);
      }
    }
    CHECK(std::isfinite(psbp_joint_loglik(st, data)));
  }
}

TEST_CASE("column relevance is the frequency of a live gate column") {
  ArchiveMeta meta;
  meta.model = "psbp";
  meta.iterations = 5;
  meta.n = 2;
  meta.d = 1;
  DrawArchive arc(meta, psbp_schema());
  for (int t = 0; t < 5; ++t) {
    DrawRecord rec;
    rec.iter = t;
    rec.assign = {0, 1};
    rec.scalars = {1.0};
    rec.vectors = {{0.5}, {1.0}, {1.0}};
    double live = t < 3 ? 1.0 : 0.0;
    rec.matrices.push_back(Matrix<double>(2, 1, 0.4));
    rec.matrices.push_back(Matrix<double>::from_rows({{live}, {0.0}}));
    rec.matrices.push_back(Matrix<double>(2, 1, 0.2));
    arc.append(std::move(rec));
  }
  CHECK(psbp_inclusion_probability(arc, 0) == 0.6);
}

TEST_CASE("an all-zero covariate column relaxes to its prior inclusion rate") {
  Rng gen(60, 0);
  const int n = 30;
  Dataset data;
  data.types = {ColumnType::Binary, ColumnType::Continuous};
  data.names = {"x1", "x2"};
  data.x = Matrix<double>(n, 2, 0.0);
  data.y.resize(n);
  for (int i = 0; i < n; ++i) {
    auto ii = static_cast<std::size_t>(i);
    data.x(ii, 0) = gen.bernoulli(0.5) ? 1.0 : 0.0;
    data.y[ii] = 3.0 * data.x(ii, 0) + gen.normal();
  }

  // The u/kappa subchain over the dead column mixes slowly (u can only drop
  // to 0 when the whole gate column is zero), so the run needs to be long.
  PsbpPriors priors;
  priors.K = 8;
  PsbpState st = psbp_init(data, priors);
  ArchiveMeta meta;
  meta.model = "psbp";
  meta.iterations = 20000;
  meta.burn_in = 1000;
  meta.n = n;
  meta.d = 2;
  DrawArchive arc(meta, psbp_schema());
  Rng rng(61, 0);
  for (int t = 0; t < 20000; ++t) {
    psbp_sweep(rng, st, data, priors);
    if (t >= 1000) arc.append(psbp_record(st, t));
  }

  double m1 = std::exp(log_beta(0.5, 0.5 + 8) - log_beta(0.5, 0.5));
  double prior_incl = 0.5 * (1.0 - m1);
  double got = psbp_inclusion_probability(arc, 1);
  CHECK(std::abs(got - prior_incl) < 0.06);
  CHECK(psbp_inclusion_probability(arc, 0) > 0.8);
}

TEST_CASE("predictive mixture matches a hand computation") {
  ArchiveMeta meta;
  meta.model = "psbp";
  meta.iterations = 1;
  meta.n = 4;
  meta.d = 2;
  DrawArchive arc(meta, psbp_schema());
  Matrix<double> xi = Matrix<double>::from_rows({{0.5, -0.2}, {0.1, 0.9}, {0.0, 0.0}});
  Matrix<double> theta = Matrix<double>::from_rows({{1.0, 0.2}, {-0.5, 0.4}, {0.3, 0.0}});
  DrawRecord rec;
  rec.iter = 0;
  rec.assign = {0, 1, 2, 1};
  rec.scalars = {1.3};
  rec.vectors = {{0.3, 0.7}, {1.0, 1.0}, {2.0, 0.5}};
  rec.matrices = {xi, Matrix<double>(3, 2, 1.0), theta};
  arc.append(std::move(rec));

  std::vector<double> xt{1.0, 0.5};
  double nu0 = 0.5 - 0.2 * 0.5, nu1 = 0.1 + 0.9 * 0.5;
  double w0 = normal_cdf(nu0);
  double w1 = normal_cdf(nu1) * (1.0 - w0);
  double w2 = 1.0 - w0 - w1;
  double m0 = 1.0 + 0.2 * 0.5, m1 = -0.5 + 0.4 * 0.5, m2 = 0.3;

  std::vector<double> grid{-1.0, 0.0, 1.5};
  std::vector<double> dens = psbp_predictive_density(arc, xt, grid);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double expect = w0 * std::exp(normal_logpdf_prec(grid[g], m0, 1.3)) +
                    w1 * std::exp(normal_logpdf_prec(grid[g], m1, 1.3)) +
                    w2 * std::exp(normal_logpdf_prec(grid[g], m2, 1.3));
    CHECK(std::abs(dens[g] - expect) < 1e-14);
  }
  CHECK(std::abs(psbp_predictive_mean(arc, xt) - (w0 * m0 + w1 * m1 + w2 * m2)) <
        1e-14);
}

TEST_CASE("generative draws have the advertised moments") {
  Dataset data = tiny_data({{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}}, {0.0, 0.0, 0.0});
  PsbpPriors priors;
  Rng rng(62, 0);
  const long reps = 20000;
  double u = 0.0, g = 0.0, lam = 0.0, tau = 0.0;
  for (long t = 0; t < reps; ++t) {
    PsbpState st = psbp_prior_draw(rng, data, priors);
    for (std::size_t d = 0; d < 2; ++d) {
      u += st.u[d];
      tau += st.tau[d];
      for (int k = 0; k < st.K; ++k)
        g += st.gamma(static_cast<std::size_t>(k), d);
    }
    lam += st.lambda;
    for (int a : st.alloc) {
      CHECK(a >= 0);
      CHECK(a < priors.K);
    }
    psbp_draw_response(rng, st, data);
    for (double y : data.y) CHECK(std::isfinite(y));
  }
  CHECK(std::abs(u / (2.0 * reps) - 0.5) < 0.02);
  CHECK(std::abs(g / (2.0 * reps * priors.K) - 0.25) < 0.01);
  CHECK(std::abs(lam / reps - 1.0) < 0.03);
  CHECK(std::abs(tau / (2.0 * reps) - 0.2) < 0.007);
}

TEST_CASE("draw records follow the schema") {
  Dataset data = tiny_data({{1.0, 0.0}, {0.0, 1.0}}, {0.3, -0.3});
  PsbpPriors priors;
  priors.K = 4;
  PsbpState st = psbp_init(data, priors);
  DrawRecord rec = psbp_record(st, 7);
  std::vector<FieldSpec> schema = psbp_schema();
  CHECK(schema.size() == 7);
  CHECK(rec.scalars.size() == 1);
  CHECK(rec.vectors.size() == 3);
  CHECK(rec.matrices.size() == 3);
  CHECK(rec.matrices[0].rows() == 4);
  CHECK(rec.matrices[1](0, 0) == 1.0);
  CHECK(rec.assign.size() == 2);
}
