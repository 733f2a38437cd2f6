#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "mibo/metrics/kfold.hpp"
#include "mibo/metrics/metrics.hpp"
#include "mibo/metrics/report.hpp"
#include "mibo/metrics/stationarity.hpp"
#include "support.hpp"

using namespace mibo;
using namespace mibo::metrics;
using autodiff::Tensor;

TEST_CASE("integer feasibility gap") {
  CHECK(integer_feasibility_gap(std::vector<double>{0.9, 0.1, 1.0}) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(integer_feasibility_gap(std::vector<double>{0, 1, 1, 0}) == 0.0);
  // All coordinates round to zero: the denominator floors at 1.
  CHECK(integer_feasibility_gap(std::vector<double>{0.3, 0.4}) == doctest::Approx(0.5));
  CHECK(integer_feasibility_gap(std::vector<double>{0.5}) == 0.5);
  CHECK_THROWS_AS(integer_feasibility_gap(std::vector<double>{1.5}), std::invalid_argument);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto w = test::uniform_vector(rng, 12, 0, 1);
    const double g = integer_feasibility_gap(w);
    CHECK(g >= 0.0);
    std::shuffle(w.begin(), w.end(), rng);
    CHECK(integer_feasibility_gap(w) == doctest::Approx(g).epsilon(1e-14));
  }
}

TEST_CASE("mse and accuracy") {
  const auto p = Tensor::matrix(2, 2, {1, 2, 3, 4});
  CHECK(mean_squared_error(p, Tensor::matrix(2, 2, {1, 2, 3, 6})) == 1.0);
  CHECK_THROWS_AS(mean_squared_error(p, Tensor::vector({1, 2})), std::invalid_argument);
  const auto logits = Tensor::matrix(3, 3, {0.1, 2, 0, 5, 1, 1, 0, 0, 3});
  CHECK(accuracy(logits, Tensor::vector({1, 0, 0})) == doctest::Approx(2.0 / 3.0));
  CHECK(accuracy(logits, Tensor::matrix(3, 3, {0, 1, 0, 1, 0, 0, 0, 0, 1})) == 1.0);
  CHECK(task_metric(logits, Tensor::vector({1, 0, 2}), models::HeadKind::classification) == 1.0);
  CHECK(task_metric(p, p, models::HeadKind::position) == 0.0);
}

TEST_CASE("running average") {
  const auto r = running_average(std::vector<double>{4, 2, 0, 2});
  CHECK(r == std::vector<double>{4, 3, 2, 2});
  CHECK(running_average(std::vector<double>{}).empty());
}

TEST_CASE("stationarity series reads the history") {
  std::vector<solver::HistoryRow> h(3);
  for (std::size_t i = 0; i < 3; ++i) {
    h[i].delta_w_sq = i + 1.0;
    h[i].grad_u_sq = 2.0;
    h[i].grad_v_sq = i == 0 ? 3.0 : 0.0;
  }
  const auto s = stationarity_series(h);
  CHECK(s.s_w == std::vector<double>{1, 1.5, 2});
  CHECK(s.s_u == std::vector<double>{2, 2, 2});
  CHECK(s.s_v == std::vector<double>{3, 1.5, 1});
  CHECK_THROWS(stationarity_series(std::span<const solver::HistoryRow>{}));
}

TEST_CASE("convergence slope recovers power laws") {
  for (double p : {0.25, 0.5, 1.0}) {
    std::vector<double> s(2000);
    for (std::size_t t = 1; t <= s.size(); ++t) s[t - 1] = 3.0 * std::pow(static_cast<double>(t), -p);
    CHECK(fit_convergence_slope(s) == doctest::Approx(-p).epsilon(1e-9));
  }
  std::mt19937_64 rng(8);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<double> s(2000);
  for (std::size_t t = 1; t <= s.size(); ++t) s[t - 1] = std::pow(static_cast<double>(t), -0.5) * std::exp(noise(rng));
  CHECK(std::abs(fit_convergence_slope(s) + 0.5) < 0.02);
  CHECK_THROWS_AS(fit_convergence_slope(std::vector<double>(5, 1.0)), std::invalid_argument);
  std::vector<double> zeros_early(100, 1.0);
  zeros_early[0] = 0.0;
  CHECK(fit_convergence_slope(zeros_early) == doctest::Approx(0.0));
  zeros_early[50] = 0.0;
  CHECK_THROWS_AS(fit_convergence_slope(zeros_early), std::invalid_argument);
}

TEST_CASE("k-fold partition") {
  SUBCASE("equal folds") {
    const auto f = kfold_partition(100, 5, 1);
    REQUIRE(f.size() == 5);
    for (const auto& fold : f) CHECK(fold.size() == 20);
  }
  SUBCASE("sizes differ by at most one, disjoint and covering") {
    for (std::size_t n : {7u, 23u, 64u}) {
      for (std::size_t k : {2u, 3u, 5u}) {
        const auto f = kfold_partition(n, k, n + k);
        std::vector<std::size_t> all;
        std::size_t lo = n, hi = 0;
        for (const auto& fold : f) {
          all.insert(all.end(), fold.begin(), fold.end());
          lo = std::min(lo, fold.size());
          hi = std::max(hi, fold.size());
        }
        CHECK(hi - lo <= 1);
        std::sort(all.begin(), all.end());
        std::vector<std::size_t> want(n);
        std::iota(want.begin(), want.end(), 0);
        CHECK(all == want);
      }
    }
  }
  SUBCASE("leave-one-out") {
    const auto f = kfold_partition(6, 6, 2);
    for (const auto& fold : f) CHECK(fold.size() == 1);
  }
  SUBCASE("reproducible and seed dependent") {
    CHECK(kfold_partition(50, 5, 9) == kfold_partition(50, 5, 9));
    CHECK(kfold_partition(50, 5, 9) != kfold_partition(50, 5, 10));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(kfold_partition(10, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(kfold_partition(3, 4, 1), std::invalid_argument);
  }
}

TEST_CASE("k-fold evaluation calls the trainer on complementary splits") {
  std::set<std::size_t> tested;
  const auto report = kfold_evaluate(10, 5, 4, [&](const auto& train, const auto& test) {
    CHECK(train.size() + test.size() == 10);
    for (auto i : test) {
      CHECK(std::find(train.begin(), train.end(), i) == train.end());
      tested.insert(i);
    }
    return NamedMetrics{{"n", static_cast<double>(test.size())}};
  });
  CHECK(tested.size() == 10);
  REQUIRE(report.find("n"));
  CHECK(report.find("n")->values.size() == 5);
  CHECK(report.find("n")->mean == 2.0);
  CHECK(report.find("missing") == nullptr);
}

TEST_CASE("summaries use the sample standard deviation") {
  const auto s = summarize("m", {1, 2, 3, 4});
  CHECK(s.mean == 2.5);
  CHECK(s.stddev == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(summarize("one", {7}).stddev == 0.0);
}

TEST_CASE("report json round trip and key order") {
  EvalReport r;
  r.method = "spg";
  r.seeds = {1, 2};
  r.folds = 2;
  r.metrics.push_back(summarize("loc_mse", {0.1, 1.0 / 3.0, 0.2, 0.25}));
  r.metrics.push_back(summarize("gap", {0, 0, 0.5, 1e-17}));
  const auto text = report_to_json(r);
  CHECK(text.find("\"method\"") < text.find("\"seeds\""));
  CHECK(text.find("\"seeds\"") < text.find("\"folds\""));
  CHECK(text.find("\"folds\"") < text.find("\"metrics\""));
  const auto back = report_from_json(text);
  CHECK(back.method == r.method);
  CHECK(back.seeds == r.seeds);
  CHECK(back.folds == 2);
  REQUIRE(back.metrics.size() == 2);
  CHECK(back.metrics[0].values == r.metrics[0].values);
  CHECK(back.metrics[1].values == r.metrics[1].values);
  CHECK(back.metrics[0].mean == r.metrics[0].mean);
  CHECK(report_to_json(back) == text);
  CHECK_THROWS(report_from_json("{"));
}

TEST_CASE("merged reports and table rendering") {
  EvalReport a{"spg", {1}, 2, {summarize("gap", {0.1, 0.2})}};
  EvalReport b{"spg", {2}, 2, {summarize("gap", {0.3, 0.4})}};
  const auto m = merge_reports({a, b});
  CHECK(m.seeds == std::vector<std::uint64_t>{1, 2});
  CHECK(m.find("gap")->values == std::vector<double>{0.1, 0.2, 0.3, 0.4});
  const auto table = render_table({m, EvalReport{"penalty", {1, 2}, 2, {summarize("gap", {0.5, 0.6})}}});
  CHECK(table.find("spg") != std::string::npos);
  CHECK(table.find("penalty") != std::string::npos);
  CHECK(table.find("+/-") != std::string::npos);
}
