#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "rpmx/dp_prior.hpp"
#include "rpmx/matrix.hpp"
#include "rpmx/partition.hpp"
#include "rpmx/rng.hpp"
#include "rpmx/special_functions.hpp"

using namespace rpmx;

namespace {

// Visits every set partition of {0..n-1} as a restricted growth string,
// which is exactly the canonical labeling Partition uses.
void enumerate_partitions(int n,
                          const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> a(static_cast<std::size_t>(n), 0);
  std::function<void(int, int)> rec = [&](int i, int mx) {
    if (i == n) {
      visit(a);
      return;
    }
    for (int l = 0; l <= mx + 1; ++l) {
      a[static_cast<std::size_t>(i)] = l;
      rec(i + 1, std::max(mx, l));
    }
  };
  if (n == 0) return;
  rec(1, 0);
}

// Probability of reaching a canonical assignment by seating observations
// one at a time with the urn rule.
double urn_log_prob(const std::vector<int>& a, double alpha) {
  Partition p;
  double lp = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::vector<double> probs = crp_predictive(p, alpha);
    int l = a[i];
    lp += std::log(l < p.k() ? probs[static_cast<std::size_t>(l)] : probs.back());
    std::vector<int> prefix(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(i) + 1);
    p = Partition::from_assign(prefix);
  }
  return lp;
}

}  // namespace

TEST_CASE("stick breaking") {
  std::vector<double> s1{0.3, 0.5};
  StickBreakResult r1 = stick_break(s1);
  CHECK(r1.weights == std::vector<double>{0.3, 0.35});
  CHECK(r1.leftover == doctest::Approx(0.35).epsilon(1e-15));

  std::vector<double> s2{0.5, 0.5, 0.5};
  StickBreakResult r2 = stick_break(s2);
  CHECK(r2.weights == std::vector<double>{0.5, 0.25, 0.125});
  CHECK(r2.leftover == 0.125);

  StickBreakResult r3 = stick_break(std::vector<double>{});
  CHECK(r3.weights.empty());
  CHECK(r3.leftover == 1.0);

  std::vector<double> bad{0.5, 1.0};
  CHECK_THROWS_AS(stick_break(bad), std::invalid_argument);
  std::vector<double> bad2{0.0};
  CHECK_THROWS_AS(stick_break(bad2), std::invalid_argument);
}

TEST_CASE("partition prior normalizes over all set partitions") {
  for (double alpha : {0.5, 1.0, 2.3}) {
    for (int n = 1; n <= 8; ++n) {
      double total = 0.0;
      enumerate_partitions(n, [&](const std::vector<int>& a) {
        total += std::exp(eppf_log_prob(Partition::from_assign(a), alpha));
      });
      CHECK(std::abs(total - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("partition prior agrees with the sequential urn") {
  for (double alpha : {0.7, 1.0, 3.1}) {
    for (int n = 1; n <= 6; ++n) {
      enumerate_partitions(n, [&](const std::vector<int>& a) {
        double direct = eppf_log_prob(Partition::from_assign(a), alpha);
        CHECK(std::abs(direct - urn_log_prob(a, alpha)) < 1e-12);
      });
    }
  }
}

TEST_CASE("partition prior frozen values and exchangeability") {
  CHECK(std::abs(eppf_log_prob(Partition::from_assign({0, 0}), 1.0) -
                 std::log(0.5)) < 1e-14);
  CHECK(std::abs(eppf_log_prob(Partition::from_assign({0, 0, 0}), 1.0) -
                 std::log(1.0 / 3.0)) < 1e-14);
  CHECK(eppf_log_prob(Partition::from_assign({0}), 2.0) == 0.0);

  // Permuting the observation indices leaves the probability unchanged.
  Rng rng(21, 0);
  std::vector<int> a{0, 1, 1, 0, 2, 1, 3, 0};
  double base = eppf_log_prob(Partition::from_assign(a), 1.4);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<int> perm = a;
    for (std::size_t i = perm.size(); i > 1; --i)
      std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(i)))]);
    CHECK(std::abs(eppf_log_prob(Partition::from_assign(perm), 1.4) - base) < 1e-12);
  }
}

TEST_CASE("urn predictive probabilities") {
  Partition p = Partition::from_assign({0, 0, 1});
  std::vector<double> probs = crp_predictive(p, 1.0);
  CHECK(probs == std::vector<double>{0.5, 0.25, 0.25});

  std::vector<double> empty = crp_predictive(Partition{}, 2.0);
  CHECK(empty == std::vector<double>{1.0});

  std::vector<double> tiny = crp_predictive(Partition::one_cluster(5), 1e-12);
  CHECK(std::abs(tiny[0] - 1.0) < 1e-12);
  CHECK(tiny[1] < 1e-12);
}

TEST_CASE("moving observations between clusters") {
  Partition p = Partition::from_assign({0, 0, 1});
  MoveResult mv = p.move_observation(2, 0);
  CHECK(p.assign() == std::vector<int>{0, 0, 0});
  CHECK(p.k() == 1);
  CHECK(mv.removed_cluster);
  CHECK(mv.new_label == 0);
  CHECK(mv.label_map == std::vector<int>{0, -1});

  Partition q = Partition::from_assign({0, 0});
  MoveResult mq = q.move_observation(1, Partition::kNewCluster);
  CHECK(q.assign() == std::vector<int>{0, 1});
  CHECK(mq.created_cluster);
  CHECK(mq.new_label == 1);

  Partition r = Partition::from_assign({0, 1});
  r.move_observation(1, 0);
  CHECK(r.assign() == std::vector<int>{0, 0});

  CHECK_THROWS_AS(r.move_observation(5, 0), std::out_of_range);
  CHECK_THROWS_AS(r.move_observation(0, 3), std::out_of_range);
}

TEST_CASE("every move has an exact inverse") {
  Rng rng(22, 0);
  for (int rep = 0; rep < 400; ++rep) {
    int n = 2 + rng.uniform_int(9);
    std::vector<int> a(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i)] = rng.uniform_int(4);
    Partition p = Partition::from_assign(a);
    Partition before = p;

    int i = rng.uniform_int(n);
    int old_label = p.label(i);
    bool was_singleton = p.cluster_size(old_label) == 1;
    int target = rng.uniform_int(p.k() + 1);
    if (target == p.k()) target = Partition::kNewCluster;

    MoveResult mv = p.move_observation(i, target);
    // Sizes always describe a valid partition of n.
    int total = 0;
    for (int j = 0; j < p.k(); ++j) total += p.cluster_size(j);
    CHECK(total == n);

    int back = was_singleton ? Partition::kNewCluster
                             : mv.label_map[static_cast<std::size_t>(old_label)];
    p.move_observation(i, back);
    CHECK(p == before);
  }
}

TEST_CASE("concentration resampling recovers the prior with no data") {
  Rng rng(23, 0);
  DpConcentration conc{1.0, {2.0, 4.0}};
  const long n = 200000;
  double s = 0.0;
  for (long t = 0; t < n; ++t) s += sample_alpha(rng, Partition{}, conc);
  CHECK(std::abs(s / n - 0.5) < 0.004);
}

TEST_CASE("concentration chain matches the exact posterior mean") {
  // Fixed partition with n=20, k=5; the stationary law of repeated updates
  // is p(alpha | k, n), whose mean a dense grid integral pins down.
  std::vector<int> a(20);
  for (int i = 0; i < 20; ++i) a[static_cast<std::size_t>(i)] = i % 5;
  Partition p = Partition::from_assign(a);
  const double pa = 1.0, pb = 1.0;
  const int n = 20, k = 5;

  const int grid = 200000;
  const double hi = 80.0;
  std::vector<double> lw(grid);
  double dx = hi / grid;
  for (int g = 0; g < grid; ++g) {
    double al = (g + 0.5) * dx;
    lw[static_cast<std::size_t>(g)] = k * std::log(al) + std::lgamma(al) -
                                      std::lgamma(al + n) + (pa - 1.0) * std::log(al) -
                                      pb * al;
  }
  double mx = *std::max_element(lw.begin(), lw.end());
  double num = 0.0, den = 0.0;
  for (int g = 0; g < grid; ++g) {
    double w = std::exp(lw[static_cast<std::size_t>(g)] - mx);
    num += ((g + 0.5) * dx) * w;
    den += w;
  }
  double exact = num / den;

  Rng rng(24, 0);
  DpConcentration conc{1.0, {pa, pb}};
  const long iters = 300000, burn = 2000;
  double s = 0.0;
  for (long t = 0; t < iters + burn; ++t) {
    conc.alpha = sample_alpha(rng, p, conc);
    if (t >= burn) s += conc.alpha;
  }
  CHECK(std::abs(s / iters - exact) < 0.05);
}

TEST_CASE("more clusters pull the concentration up") {
  Rng rng(25, 0);
  auto chain_mean = [&](int k) {
    std::vector<int> a(20);
    for (int i = 0; i < 20; ++i) a[static_cast<std::size_t>(i)] = i % k;
    Partition p = Partition::from_assign(a);
    DpConcentration conc{1.0, {1.0, 1.0}};
    double s = 0.0;
    for (long t = 0; t < 20000; ++t) {
      conc.alpha = sample_alpha(rng, p, conc);
      s += conc.alpha;
    }
    return s / 20000.0;
  };
  CHECK(chain_mean(10) > chain_mean(2));
}

TEST_CASE("similarity marginals") {
  SimilarityColumn bin;
  bin.type = ColumnType::Binary;
  bin.beta = {1.0, 1.0};
  std::vector<double> ones{1.0, 1.0};
  CHECK(std::abs(similarity_log_marginal(bin, ones) - std::log(1.0 / 3.0)) < 1e-14);
  CHECK(similarity_log_marginal(bin, std::vector<double>{}) == 0.0);
  std::vector<double> bad{1.0, 0.5};
  CHECK_THROWS_AS(similarity_log_marginal(bin, bad), std::invalid_argument);

  // Identical rows in one cluster beat the same rows split apart.
  std::vector<double> one{1.0};
  CHECK(similarity_log_marginal(bin, ones) > 2.0 * similarity_log_marginal(bin, one));

  SimilarityColumn con;
  con.type = ColumnType::Continuous;
  con.mean0 = 0.0;
  con.prec0 = 1.0;
  con.noise_prec = 1.0;
  std::vector<double> zero{0.0};
  CHECK(std::abs(similarity_log_marginal(con, zero) -
                 normal_logpdf_prec(0.0, 0.0, 0.5)) < 1e-13);

  // Chain rule: joint marginal equals first marginal times the posterior
  // predictive of the second value.
  Rng rng(26, 0);
  for (int rep = 0; rep < 30; ++rep) {
    double v1 = rng.uniform(-3.0, 3.0), v2 = rng.uniform(-3.0, 3.0);
    std::vector<double> both{v1, v2}, first{v1};
    double post_prec = con.prec0 + con.noise_prec;
    double post_mean = (con.noise_prec * v1 + con.prec0 * con.mean0) / post_prec;
    double pred_prec = 1.0 / (1.0 / con.noise_prec + 1.0 / post_prec);
    double expect = similarity_log_marginal(con, first) +
                    normal_logpdf_prec(v2, post_mean, pred_prec);
    CHECK(std::abs(similarity_log_marginal(con, both) - expect) < 1e-12);
  }
}

TEST_CASE("gated product-partition prior") {
  Rng rng(27, 0);
  std::vector<int> a{0, 1, 1, 0, 2, 1};
  Partition p = Partition::from_assign(a);
  int n = p.n(), k = p.k();
  Matrix<double> x(static_cast<std::size_t>(n), 2);
  for (int i = 0; i < n; ++i)
    for (std::size_t d = 0; d < 2; ++d)
      x(static_cast<std::size_t>(i), d) = rng.bernoulli(0.5) ? 1.0 : 0.0;
  std::vector<SimilarityColumn> sim(2);
  const double alpha = 1.3;

  // All gates closed: pure product-partition cohesions, which differ from
  // the exchangeable form only by the normalizing rising factorial.
  Matrix<int> gamma0(static_cast<std::size_t>(k), 2, 0);
  double got = ppmx_log_prior(p, x, gamma0, alpha, sim);
  double expect = 0.0;
  for (int j = 0; j < k; ++j)
    expect += std::log(alpha) + std::lgamma(static_cast<double>(p.cluster_size(j)));
  CHECK(std::abs(got - expect) < 1e-12);
  CHECK(std::abs(got - (eppf_log_prob(p, alpha) +
                        log_rising_factorial(alpha, n))) < 1e-10);

  // Opening one gate adds exactly that cluster-column marginal.
  Matrix<int> gamma1 = gamma0;
  gamma1(0, 0) = 1;
  std::vector<double> vals;
  for (int i = 0; i < n; ++i)
    if (p.label(i) == 0) vals.push_back(x(static_cast<std::size_t>(i), 0));
  CHECK(std::abs(ppmx_log_prior(p, x, gamma1, alpha, sim) - got -
                 similarity_log_marginal(sim[0], vals)) < 1e-12);

  // Two identical rows prefer co-clustering once the gate is open.
  Partition together = Partition::from_assign({0, 0});
  Partition apart = Partition::from_assign({0, 1});
  Matrix<double> x2 = Matrix<double>::from_rows({{1.0}, {1.0}});
  std::vector<SimilarityColumn> sim1(1);
  Matrix<int> g_t(1, 1, 1), g_a(2, 1, 1);
  CHECK(ppmx_log_prior(together, x2, g_t, 1.0, sim1) >
        ppmx_log_prior(apart, x2, g_a, 1.0, sim1));

  Matrix<int> wrong(static_cast<std::size_t>(k + 1), 2, 0);
  CHECK_THROWS_AS(ppmx_log_prior(p, x, wrong, alpha, sim), std::invalid_argument);
}
