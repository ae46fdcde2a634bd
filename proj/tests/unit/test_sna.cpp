#include "doctest.h"

#include <cmath>
#include <sstream>

#include "clickstream/rng.hpp"
#include "clickstream/sna.hpp"

using namespace clickstream;
using namespace clickstream::sna;

namespace {

double stats_like_r(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd ca = a.array() - a.mean(), cb = b.array() - b.mean();
  return ca.dot(cb) / std::sqrt(ca.squaredNorm() * cb.squaredNorm());
}

Adjacency random_graph(Eigen::Index n, double p, CounterRng& rng) {
  return make_adjacency(n, [&](Eigen::Index, Eigen::Index) { return rng.bernoulli(p); });
}

}  // namespace

TEST_CASE("comembership networks") {
  std::vector<int> same(5, 2);
  const auto full = comembership_network(same);
  CHECK(density(full) == 1.0);
  std::vector<int> distinct{0, 1, 2, 3};
  CHECK(density(comembership_network(distinct)) == 0.0);
  std::vector<int> ab{0, 0, 0, 1, 1};
  const auto g = comembership_network(ab);
  CHECK(g.ties() == 4);
  g.validate();
  std::vector<std::string> text{"A", "A", "A", "B", "B"};
  CHECK(exact_match_matrix<std::string>(text).bits == g.bits);
  CHECK(density(Adjacency{}) == 0.0);
}

TEST_CASE("multiplex and") {
  CounterRng rng(2);
  for (int t = 0; t < 20; ++t) {
    const auto a = random_graph(15, 0.4, rng);
    const auto b = random_graph(15, 0.3, rng);
    const auto m = multiplex_and(a, b);
    long brute = 0;
    for (Eigen::Index i = 0; i < 15; ++i)
      for (Eigen::Index j = i + 1; j < 15; ++j) brute += a.tie(i, j) && b.tie(i, j);
    CHECK(m.ties() == brute);
    CHECK(density(m) <= std::min(density(a), density(b)));
    CHECK(multiplex_and(a, a).bits == a.bits);
    CHECK(multiplex_and(a, make_adjacency(15, [](auto, auto) { return false; })).ties() == 0);
  }
  CHECK_THROWS_AS(multiplex_and(random_graph(3, 0.5, rng), random_graph(4, 0.5, rng)), std::domain_error);
}

TEST_CASE("validation") {
  Adjacency a;
  a.bits = BitMatrix::Zero(2, 2);
  a.bits(0, 1) = 1;
  CHECK_THROWS_AS(a.validate(), std::invalid_argument);
  a.bits(1, 0) = 1;
  a.validate();
  a.labels = {"x"};
  CHECK_THROWS_AS(a.validate(), std::invalid_argument);
}

TEST_CASE("E-I index and group density") {
  std::vector<int> part{0, 0, 0, 1, 1};
  const auto internal = comembership_network(part);
  CHECK(ei_index(internal, part) == doctest::Approx(-1.0));
  const auto external = make_adjacency(5, [&](auto i, auto j) { return part[i] != part[j]; });
  CHECK(ei_index(external, part) == doctest::Approx(1.0));
  // Three internal ties plus one crossing tie.
  auto mixed = make_adjacency(5, [](auto i, auto j) {
    return (i == 0 && j == 1) || (i == 1 && j == 2) || (i == 3 && j == 4) || (i == 2 && j == 3);
  });
  CHECK(ei_index(mixed, part) == doctest::Approx(-0.5));
  const auto rep = density_by_group(mixed, part);
  CHECK(rep.internal_ties == 3);
  CHECK(rep.external_ties == 1);
  REQUIRE(rep.groups.size() == 2);
  CHECK(rep.groups[0].density == doctest::Approx(2.0 / 3.0));
  CHECK(rep.groups[1].density == doctest::Approx(1.0));
  CHECK_FALSE(ei_index(make_adjacency(5, [](auto, auto) { return false; }), part).has_value());
}

TEST_CASE("dyad vector under relabeling") {
  auto a = make_adjacency(3, [](auto i, auto j) { return i == 0 && j == 2; });
  std::vector<Eigen::Index> perm{2, 1, 0};
  Eigen::VectorXd plain = dyad_vector(a), moved = dyad_vector(a, perm);
  CHECK(plain.size() == 3);
  CHECK(plain(1) == 1.0);
  CHECK(moved(1) == 1.0);
  std::vector<Eigen::Index> swap01{1, 0, 2};
  CHECK(dyad_vector(a, swap01)(2) == 1.0);
}

TEST_CASE("qap self correlation") {
  CounterRng rng(4);
  const auto a = random_graph(20, 0.3, rng);
  const auto q = qap_correlation(a, a, 199, 7);
  CHECK(q.r_observed == doctest::Approx(1.0));
  CHECK(q.p >= 1.0 / 200.0);
  CHECK(q.p < 0.02);
  CHECK(q.permuted.size() == 199);
  const auto again = qap_correlation(a, a, 199, 7);
  CHECK(again.permuted == q.permuted);
  const auto empty = make_adjacency(20, [](auto, auto) { return false; });
  CHECK(qap_correlation(a, empty, 10, 1).undefined);
}

TEST_CASE("relabeled copy sits inside the permutation distribution") {
  CounterRng rng(6);
  const auto a = random_graph(12, 0.4, rng);
  std::vector<Eigen::Index> perm{3, 7, 1, 0, 11, 5, 9, 2, 4, 10, 6, 8};
  const Eigen::VectorXd moved = dyad_vector(a, perm);
  Adjacency b;
  b.bits = BitMatrix::Zero(12, 12);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < 12; ++i)
    for (Eigen::Index j = i + 1; j < 12; ++j, ++k)
      if (moved(k) != 0) b.bits(i, j) = b.bits(j, i) = 1;
  const auto q = qap_correlation(a, b, 400, 3);
  const Eigen::VectorXd da = dyad_vector(a);
  CHECK(q.r_observed == doctest::Approx(stats_like_r(da, moved)).epsilon(1e-12));
  std::vector<Eigen::Index> inverse(12);
  for (Eigen::Index i = 0; i < 12; ++i) inverse[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = i;
  CHECK(dyad_vector(b, inverse) == da);
}

TEST_CASE("qap regression") {
  CounterRng rng(8);
  const auto y = random_graph(15, 0.4, rng);
  std::vector<Adjacency> xs{y};
  const auto r = qap_regression(y, xs, 50, 1);
  CHECK(r.coefficients(0) == doctest::Approx(1.0));
  CHECK(std::abs(r.intercept) < 1e-12);
  CHECK(r.r_squared == doctest::Approx(1.0));
  std::vector<Adjacency> twins{y, y};
  std::vector<std::string> names{"first", "second"};
  try {
    qap_regression(y, twins, 10, 1, names);
    FAIL("collinear predictors accepted");
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find("first") != std::string::npos);
    CHECK(std::string(e.what()).find("second") != std::string::npos);
  }
  std::vector<Adjacency> flat{make_adjacency(15, [](auto, auto) { return false; })};
  CHECK_THROWS_AS(qap_regression(y, flat, 10, 1), std::domain_error);
}

TEST_CASE("edge list") {
  auto a = make_adjacency(3, [](auto i, auto j) { return i == 0 && j == 2; }, {"a", "b", "c"});
  std::ostringstream out;
  write_edge_list(out, a);
  CHECK(out.str().find("a\tc\n") != std::string::npos);
}

TEST_CASE("planted dyadic effect is recovered") {
  CounterRng rng(31);
  const auto x = random_graph(50, 0.5, rng);
  const auto y = make_adjacency(50, [&](auto i, auto j) { return rng.bernoulli(x.tie(i, j) ? 0.7 : 0.2); });
  std::vector<Adjacency> xs{x};
  const auto r = qap_regression(y, xs, 1000, 2);
  CHECK(std::abs(r.coefficients(0) - 0.5) <= 0.05);
  CHECK(std::abs(r.intercept - 0.2) <= 0.05);
  CHECK(r.p(0) < 0.01);
}
