#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "rpmx/partition.hpp"
#include "rpmx/rng.hpp"
#include "rpmx/summaries.hpp"

using namespace rpmx;

namespace {

DrawArchive assign_archive(int n, const std::vector<std::vector<int>>& assigns,
                           bool fixed = false) {
  ArchiveMeta meta;
  meta.model = "rpms";
  meta.iterations = static_cast<long>(assigns.size());
  meta.n = n;
  meta.d = 1;
  meta.fixed_partition = fixed;
  DrawArchive arc(meta, {{"lambda", FieldKind::Scalar}});
  long t = 0;
  for (const auto& a : assigns) {
    DrawRecord rec;
    rec.iter = t++;
    rec.assign = a;
    rec.scalars = {1.0};
    arc.append(std::move(rec));
  }
  return arc;
}

}  // namespace

TEST_CASE("coclustering frequencies") {
  DrawArchive same = assign_archive(3, {{0, 0, 1}, {0, 0, 1}});
  Matrix<double> p = coclustering_matrix(same);
  CHECK(p(0, 1) == 1.0);
  CHECK(p(0, 2) == 0.0);
  CHECK(p(1, 2) == 0.0);
  CHECK(p(2, 2) == 1.0);

  DrawArchive split = assign_archive(4, {{0, 0, 1, 1}, {0, 1, 0, 1}});
  Matrix<double> q = coclustering_matrix(split);
  CHECK(q(0, 1) == 0.5);
  CHECK(q(0, 2) == 0.5);
  CHECK(q(0, 3) == 0.0);
  CHECK(q(1, 2) == 0.0);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(q(i, i) == 1.0);
    for (std::size_t j = 0; j < 4; ++j) CHECK(q(i, j) == q(j, i));
  }

  DrawArchive empty = assign_archive(2, {});
  CHECK_THROWS_AS(coclustering_matrix(empty), std::invalid_argument);
}

TEST_CASE("pairwise loss and its minimizing draw") {
  std::vector<std::vector<int>> assigns;
  for (int r = 0; r < 3; ++r) assigns.push_back({0, 0, 1, 1});
  for (int r = 0; r < 2; ++r) assigns.push_back({0, 0, 0, 1});
  assigns.push_back({0, 1, 2, 3});
  DrawArchive arc = assign_archive(4, assigns);
  Matrix<double> p = coclustering_matrix(arc);

  // Pair frequencies: (0,1)=5/6, (0,2)=(1,2)=2/6, (2,3)=3/6, rest 0.
  std::vector<int> a{0, 0, 1, 1}, b{0, 0, 0, 1}, c{0, 1, 2, 3};
  CHECK(std::abs(binder_loss(a, p) - 8.0 / 6.0) < 1e-12);
  CHECK(std::abs(binder_loss(b, p) - 2.0) < 1e-12);
  CHECK(std::abs(binder_loss(c, p) - 2.0) < 1e-12);

  PointEstimate best = binder_point_estimate(arc);
  CHECK(best.assign == a);
  CHECK(best.draw_index == 0);
  CHECK(std::abs(best.loss - 8.0 / 6.0) < 1e-12);

  std::vector<int> wrong_size{0, 1};
  CHECK_THROWS_AS(binder_loss(wrong_size, p), std::invalid_argument);
}

TEST_CASE("point estimate is stable under duplication and relabeling") {
  std::vector<std::vector<int>> assigns{{0, 0, 1, 1}, {0, 0, 1, 1}, {0, 0, 0, 1},
                                        {0, 1, 2, 3}};
  DrawArchive arc = assign_archive(4, assigns);
  std::vector<std::vector<int>> doubled = assigns;
  doubled.insert(doubled.end(), assigns.begin(), assigns.end());
  DrawArchive dup = assign_archive(4, doubled);
  CHECK(binder_point_estimate(arc).assign == binder_point_estimate(dup).assign);

  // Relabeled draws induce the same pair structure.
  std::vector<std::vector<int>> relabeled{{1, 1, 0, 0}, {1, 1, 0, 0}, {2, 2, 2, 0},
                                          {3, 2, 1, 0}};
  DrawArchive rel = assign_archive(4, relabeled);
  Matrix<double> p = coclustering_matrix(arc);
  Matrix<double> q = coclustering_matrix(rel);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(p(i, j) == q(i, j));
  CHECK(Partition::from_assign(binder_point_estimate(rel).assign) ==
        Partition::from_assign(binder_point_estimate(arc).assign));
}

TEST_CASE("tied losses keep the earliest draw") {
  DrawArchive arc = assign_archive(4, {{0, 0, 1, 1}, {0, 1, 0, 1}});
  PointEstimate best = binder_point_estimate(arc);
  CHECK(best.draw_index == 0);
  CHECK(best.assign == std::vector<int>{0, 0, 1, 1});
}

TEST_CASE("autocorrelation estimator") {
  std::vector<double> flat(50, 3.25);
  CHECK(autocorrelation(flat, 1) == 0.0);

  std::vector<double> alt(400);
  for (std::size_t t = 0; t < alt.size(); ++t) alt[t] = t % 2 == 0 ? 1.0 : -1.0;
  CHECK(autocorrelation(alt, 0) == 1.0);
  CHECK(std::abs(autocorrelation(alt, 1) + 1.0) < 1e-12);
  CHECK(std::abs(autocorrelation(alt, 2) - 1.0) < 1e-12);

  Rng rng(81, 0);
  std::vector<double> noise(100000);
  for (double& v : noise) v = rng.normal();
  CHECK(std::abs(autocorrelation(noise, 1)) < 0.01);
  CHECK(std::abs(autocorrelation(noise, 7)) < 0.01);

  CHECK_THROWS_AS(autocorrelation(alt, -1), std::invalid_argument);
  CHECK_THROWS_AS(autocorrelation(alt, 400), std::invalid_argument);
  std::vector<double> empty;
  CHECK_THROWS_AS(autocorrelation(empty, 0), std::invalid_argument);
}

TEST_CASE("per-cluster inclusion frequencies need a frozen clustering") {
  auto make = [](bool fixed, std::vector<Matrix<double>> thetas) {
    ArchiveMeta meta;
    meta.model = "rpms";
    meta.iterations = static_cast<long>(thetas.size());
    meta.n = 3;
    meta.d = 2;
    meta.fixed_partition = fixed;
    DrawArchive arc(meta, {{"theta", FieldKind::RealMatrix}});
    long t = 0;
    for (auto& th : thetas) {
      DrawRecord rec;
      rec.iter = t++;
      rec.assign = {0, 1, 0};
      rec.matrices.push_back(std::move(th));
      arc.append(std::move(rec));
    }
    return arc;
  };

  std::vector<Matrix<double>> thetas;
  thetas.push_back(Matrix<double>::from_rows({{1.0, 0.0}, {2.0, 0.0}}));
  thetas.push_back(Matrix<double>::from_rows({{0.5, 1.0}, {0.0, 0.0}}));
  thetas.push_back(Matrix<double>::from_rows({{-1.0, 0.0}, {3.0, 0.0}}));
  thetas.push_back(Matrix<double>::from_rows({{2.0, 0.0}, {0.0, 0.0}}));

  DrawArchive loose = make(false, thetas);
  CHECK_THROWS_AS(marginal_inclusion_by_cluster(loose), std::invalid_argument);

  DrawArchive fixed = make(true, thetas);
  Matrix<double> freq = marginal_inclusion_by_cluster(fixed);
  CHECK(freq(0, 0) == 1.0);
  CHECK(freq(0, 1) == 0.25);
  CHECK(freq(1, 0) == 0.5);
  CHECK(freq(1, 1) == 0.0);

  std::vector<Matrix<double>> ragged;
  ragged.push_back(Matrix<double>::from_rows({{1.0, 0.0}, {2.0, 0.0}}));
  ragged.push_back(Matrix<double>::from_rows({{1.0, 0.0}}));
  DrawArchive bad = make(true, ragged);
  CHECK_THROWS_AS(marginal_inclusion_by_cluster(bad), std::invalid_argument);
}

TEST_CASE("occupied cluster counts use distinct labels") {
  DrawArchive arc =
      assign_archive(3, {{0, 0, 0}, {0, 3, 3}, {0, 1, 2}, {0, 1, 0}});
  std::vector<double> dist = cluster_count_distribution(arc);
  REQUIRE(dist.size() == 3);
  CHECK(dist[0] == 0.25);
  CHECK(dist[1] == 0.5);
  CHECK(dist[2] == 0.25);
  double total = 0.0;
  for (double v : dist) total += v;
  CHECK(std::abs(total - 1.0) < 1e-15);
}
