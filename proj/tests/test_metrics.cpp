#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "biclink/metrics.hpp"
#include "metric_oracle.hpp"

using namespace biclink;

namespace {

std::vector<ScoredPair> pairs_of(const std::vector<double>& s, const std::vector<int>& y) {
  std::vector<ScoredPair> out;
  for (std::size_t i = 0; i < s.size(); ++i) out.push_back({"o" + std::to_string(i), "a", s[i], y[i]});
  return out;
}

// Precision-recall step area from one explicit threshold per distinct score.
double aupr_oracle(const std::vector<double>& s, const std::vector<int>& y) {
  std::set<double, std::greater<>> cuts(s.begin(), s.end());
  double pos = 0;
  for (int l : y) pos += l;
  double area = 0.0, prev = 0.0;
  for (double c : cuts) {
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i] >= c) (y[i] ? tp : fp) += 1;
    area += (tp / pos - prev) * (tp / (tp + fp));
    prev = tp / pos;
  }
  return area;
}

}  // namespace

TEST_CASE("hand-worked case") {
  const auto r = compute_metrics(pairs_of({0.9, 0.8, 0.4, 0.2}, {1, 0, 1, 0}), 0.5);
  CHECK(r.auc == 0.75);
  CHECK(r.f1 == 0.5);
  CHECK(r.counts.tp == 1);
  CHECK(r.counts.fp == 1);
  CHECK(r.counts.fn == 1);
  CHECK(r.counts.tn == 1);
  // Sweep: (R 1/2, P 1), (1/2, 1/2), (1, 2/3), (1, 1/2).
  CHECK(r.aupr == doctest::Approx(0.5 * 1.0 + 0.5 * (2.0 / 3.0)));
}

TEST_CASE("perfect separation and all ties") {
  const auto r = compute_metrics(pairs_of({0.9, 0.8, 0.3, 0.1}, {1, 1, 0, 0}), 0.5);
  CHECK(r.auc == 1.0);
  CHECK(r.aupr == 1.0);
  CHECK(r.f1 == 1.0);
  const auto t = compute_metrics(pairs_of({0.4, 0.4, 0.4, 0.4}, {1, 0, 1, 0}), 0.5);
  CHECK(t.auc == 0.5);
  CHECK(t.aupr == 0.5);
  CHECK(t.f1 == 0.0);
  const auto at = compute_metrics(pairs_of({0.5, 0.4}, {1, 0}), 0.5);
  CHECK(at.counts.tp == 1);
}

TEST_CASE("single class is an error") {
  CHECK_THROWS(compute_metrics(pairs_of({0.1, 0.2}, {1, 1}), 0.5));
  CHECK_THROWS(compute_metrics(pairs_of({0.1, 0.2}, {0, 0}), 0.5));
  CHECK_THROWS(compute_metrics({}, 0.5));
  CHECK_THROWS(compute_metrics(pairs_of({NAN, 0.2}, {1, 0}), 0.5));
}

TEST_CASE("metrics match the oracles on random inputs") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 300;
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % 20) / 20.0;
      y[i] = static_cast<int>(rng() % 2);
    }
    y[0] = 1;
    y[1] = 0;
    const auto r = compute_metrics(pairs_of(s, y), 0.5);
    CHECK(std::abs(r.auc - testutil::concordant_fraction(s, y)) <= 1e-12);
    CHECK(std::abs(r.aupr - aupr_oracle(s, y)) <= 1e-12);
    CHECK(r.f1 >= 0.0);
    CHECK(r.f1 <= 1.0);
    const double p = r.precision, rc = r.recall;
    if (p + rc > 0) CHECK(r.f1 == doctest::Approx(2 * p * rc / (p + rc)));

    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = std::exp(3.0 * s[i]) - 7.0;
    const auto rt = compute_metrics(pairs_of(t, y), std::exp(1.5) - 7.0);
    CHECK(rt.auc == r.auc);
    CHECK(rt.aupr == r.aupr);
    CHECK(rt.f1 == r.f1);
  }
}

TEST_CASE("median threshold and output formats") {
  const auto p = pairs_of({0.1, 0.9, 0.3, 0.5}, {0, 1, 0, 1});
  CHECK(median_threshold(p) == doctest::Approx(0.4));
  std::ostringstream out;
  write_predictions(out, std::vector<ScoredPair>{{"g", "m", 0.25, 1}});
  CHECK(out.str() == "g\tm\t0.25\t1\n");
  const auto json = report_to_json(compute_metrics(p, 0.4), "cn");
  for (const char* key : {"\"f1\"", "\"auc\"", "\"aupr\"", "\"threshold\"", "\"counts\""})
    CHECK(json.find(key) != std::string::npos);
}
