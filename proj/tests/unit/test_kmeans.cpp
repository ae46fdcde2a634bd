#include "doctest.h"

#include "clickstream/kmeans.hpp"
#include "clickstream/markov.hpp"

using namespace clickstream;

namespace {

Eigen::MatrixXd blobs(int per, std::uint64_t seed) {
  CounterRng rng(seed);
  Eigen::MatrixXd x(3 * per, 2);
  const double cx[3] = {0, 10, 0}, cy[3] = {0, 0, 10};
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < per; ++i) x.row(c * per + i) << rng.normal(cx[c], 0.5), rng.normal(cy[c], 0.5);
  return x;
}

}  // namespace

TEST_CASE("separated blobs are recovered") {
  const auto x = blobs(30, 4);
  std::vector<int> truth;
  for (int c = 0; c < 3; ++c) truth.insert(truth.end(), 30, c);
  const auto r = kmeans<double>(x, {3, 9, 5, 100});
  CHECK(adjusted_rand_index(r.assignment, truth) == doctest::Approx(1.0));
  for (std::size_t i = 1; i < r.wcss_trace.size(); ++i) CHECK(r.wcss_trace[i] <= r.wcss_trace[i - 1] + 1e-9);
  const auto again = kmeans<double>(x, {3, 9, 5, 100});
  CHECK(again.assignment == r.assignment);
  CHECK(again.wcss == r.wcss);
}

TEST_CASE("degenerate k") {
  const auto x = blobs(3, 1);
  CHECK(kmeans<double>(x, {9, 0, 2, 50}).wcss == doctest::Approx(0.0));
  Eigen::MatrixXd same = Eigen::MatrixXd::Constant(5, 3, 2.5);
  const auto one = kmeans<double>(same, {1, 0, 1, 50});
  CHECK(one.centroids.row(0).isApprox(same.row(0)));
  CHECK(one.wcss == 0.0);
  CHECK_THROWS_AS(kmeans<double>(x, {0, 0, 1, 10}), std::domain_error);
  CHECK_THROWS_AS(kmeans<double>(x, {10, 0, 1, 10}), std::domain_error);
}

TEST_CASE("single precision instantiation") {
  Eigen::MatrixXf x = blobs(10, 2).cast<float>();
  const auto r = kmeans<float>(x, {3, 1, 3, 50});
  CHECK(r.assignment.size() == 30);
}

TEST_CASE("adjusted rand index") {
  std::vector<int> a{0, 0, 1, 1}, b{1, 1, 0, 0}, c{0, 1, 0, 1};
  CHECK(adjusted_rand_index(a, b) == doctest::Approx(1.0));
  CHECK(adjusted_rand_index(a, c) < 0.0);
  std::vector<int> d{0, 0, 1};
  CHECK_THROWS(adjusted_rand_index(a, d));
}

TEST_CASE("identical sequences cluster together") {
  ingest::Vwss v;
  v.tokens = parse_concatenated("PlPaSfPl");
  v.token_times = {0, 1, 2, 3};
  v.token_rates = {1, 1, 1, 1};
  std::vector<ingest::Vwss> rows(6, v);
  const auto r = markov::cluster_vwss_metrics(rows, {1, 0, 2, 50});
  CHECK(r.result.wcss == doctest::Approx(0.0));
  for (int a : r.result.assignment) CHECK(a == 0);
}

TEST_CASE("skippers and rewatchers separate on metrics") {
  std::vector<ingest::Vwss> rows;
  for (int i = 0; i < 20; ++i) {
    ingest::Vwss v;
    v.tokens = parse_concatenated(i < 10 ? "PlSfSfPlSfSf" : "PlSbPaSbPaSb");
    v.token_times = {0, 5, 10, 15 + i * 0.1, 20, 25};
    v.token_rates = std::vector<double>(6, 1.0);
    rows.push_back(v);
  }
  const auto r = markov::cluster_vwss_metrics(rows, {2, 3, 5, 100});
  std::vector<int> truth(20, 0);
  std::fill(truth.begin() + 10, truth.end(), 1);
  CHECK(adjusted_rand_index(r.result.assignment, truth) == doctest::Approx(1.0));
}
