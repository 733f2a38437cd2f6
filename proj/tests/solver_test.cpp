#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "doctest.h"
#include "mibo/solver/history.hpp"
#include "mibo/solver/polytope.hpp"
#include "mibo/solver/proximal.hpp"
#include "mibo/solver/sampler.hpp"
#include "mibo/solver/spg_mibo.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace mibo;
using namespace mibo::solver;

TEST_CASE("regularizer examples and oracle") {
  CHECK(regularizer_G(std::vector<double>{0, 1, 1, 0}) == 0.0);
  CHECK(regularizer_G(std::vector<double>(4, 0.5)) == 1.0);
  CHECK(regularizer_G(std::vector<double>{0.3, 0.8}) == doctest::Approx(0.13).epsilon(1e-15));
  CHECK_THROWS_AS(regularizer_G(std::vector<double>{1.2}), std::invalid_argument);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto w = test::uniform_vector(rng, 1 + trial % 8, 0, 1);
    CHECK(regularizer_G(w) == doctest::Approx(test::corner_min_oracle(w)).epsilon(1e-14));
    CHECK(regularizer_G(w) > 0.0);
  }
  const auto g = regularizer_gradient(std::vector<double>{0.2, 0.9});
  CHECK(g[0] == doctest::Approx(0.4));
  CHECK(g[1] == doctest::Approx(-0.2));
}

TEST_CASE("prox examples") {
  for (double eta : {1e-3, 0.5, 1.0, 10.0}) {
    const auto p = prox(std::vector<double>{0.0, 1.0}, eta);
    CHECK(p[0] == 0.0);
    CHECK(p[1] == 1.0);
  }
  CHECK(prox(std::vector<double>{0.4}, 0.5)[0] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(prox(std::vector<double>{0.8}, 0.5)[0] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK_THROWS_AS(prox(std::vector<double>{0.4}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(prox(std::vector<double>{0.4}, -1.0), std::invalid_argument);
}

TEST_CASE("prox agrees with a grid-search minimizer") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0, 1), log_eta(std::log(1e-3), 0.0);
  for (int trial = 0; trial < 60; ++trial) {
    const double w = unit(rng);
    const double eta = std::exp(log_eta(rng));
    CAPTURE(w);
    CAPTURE(eta);
    CHECK(std::abs(prox(std::vector<double>{w}, eta)[0] - test::prox_grid_oracle(w, eta, 1e-5)) < 1e-5);
  }
}

TEST_CASE("clamping before prox equals the box-constrained argmin") {
  for (double w : {-0.7, -0.01, 1.01, 1.8}) {
    for (double eta : {0.01, 0.3, 1.0}) {
      const double clamped = std::clamp(w, 0.0, 1.0);
      CHECK(std::abs(prox(std::vector<double>{clamped}, eta)[0] - test::prox_grid_oracle(w, eta, 1e-5)) < 1e-5);
    }
  }
}

TEST_CASE("prox is monotone, box-preserving, with fixed points exactly 0 and 1") {
  std::mt19937_64 rng(2);
  for (double eta : {1e-3, 0.05, 0.7}) {
    std::vector<double> w(2001);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<double>(i) / 2000.0;
    const auto p = prox(w, eta);
    for (std::size_t i = 0; i < p.size(); ++i) {
      CHECK(p[i] >= 0.0);
      CHECK(p[i] <= 1.0);
      if (i > 0) CHECK(p[i] >= p[i - 1]);
      if (i != 0 && i != p.size() - 1) CHECK(p[i] != w[i]);
    }
  }
}

TEST_CASE("quadratic penalty") {
  CHECK(quadratic_penalty(std::vector<double>{0, 1, 0}, 3.0) == 0.0);
  CHECK(quadratic_penalty(std::vector<double>(4, 0.5), 1.0) == 1.0);
  const double h = 1e-6;
  const double slope = (quadratic_penalty(std::vector<double>{0.5 + h}, 1.0) -
                        quadratic_penalty(std::vector<double>{0.5 - h}, 1.0)) / (2 * h);
  CHECK(std::abs(slope) < 1e-9);
}

TEST_CASE("step size schedule") {
  CHECK(step_size(1.0, 1) == 1.0);
  CHECK(step_size(1.0, 4) == 0.5);
  CHECK(step_size(1.0, 16) == 0.25);
}

TEST_CASE("J value") {
  CHECK(J_value(2.0, 1.0) == 1.0);
  CHECK(J_value(0.7, 0.7) == 0.0);
  CHECK(J_value(0.1, 0.9) >= 0.0);
}

TEST_CASE("polytope: linearized plane is violated at its own iterate") {
  Polytope p(3, 2);
  const std::vector<double> w{0.2, 0.7, 0.5}, theta{1.0, -2.0};
  const std::vector<double> gw{0.3, -0.1, 0.2}, gt{0.5, 0.25};
  const auto ev = p.update(0.5, gw, gt, w, theta, 0.01);
  CHECK(ev.added);
  CHECK(p.size() == 1);
  CHECK(p.planes()[0].multiplier == 0.0);
  CHECK(p.planes()[0].value(w, theta) == doctest::Approx(0.49));
  // Moving along -grad lowers the plane value by |grad|^2 * step.
  std::vector<double> w2 = w, t2 = theta;
  for (std::size_t i = 0; i < 3; ++i) w2[i] -= gw[i];
  for (std::size_t i = 0; i < 2; ++i) t2[i] -= gt[i];
  CHECK(p.planes()[0].value(w2, t2) == doctest::Approx(0.49 - (0.09 + 0.01 + 0.04 + 0.25 + 0.0625)));
}

TEST_CASE("polytope: scripted add/drop trace") {
  // Each step: force multipliers, then update with J against eps = 0.5.
  struct Step {
    std::vector<double> lambdas;  // for the planes present before the update, in order
    double J;
    std::vector<std::uint64_t> dropped;
    bool added;
    std::vector<std::uint64_t> after;  // plane ids after the update
  };
  const std::vector<Step> script{
      {{}, 1.0, {}, true, {1}},            // J > eps: add plane 1
      {{0.0}, 0.1, {}, false, {1}},        // plane 1 inactive once
      {{0.0}, 2.0, {1}, true, {2}},        // inactive twice: drop 1, add 2
      {{0.3}, 0.2, {}, false, {2}},        // active: counter resets
      {{0.0}, 0.9, {}, true, {2, 3}},      // plane 2 inactive once, add 3
      {{0.0, 0.0}, 0.0, {2}, false, {3}},  // drop 2; plane 3 inactive once
      {{1e-9}, 0.5, {3}, false, {}},       // below tolerance counts as zero; J == eps does not add
  };
  Polytope p(2, 1);
  const std::vector<double> w{0.5, 0.5}, th{0.0}, gw{1.0, 0.0}, gt{0.0};
  for (std::size_t s = 0; s < script.size(); ++s) {
    CAPTURE(s);
    const auto& st = script[s];
    REQUIRE(st.lambdas.size() == p.size());
    for (std::size_t l = 0; l < p.size(); ++l) p.planes()[l].multiplier = st.lambdas[l];
    const auto ev = p.update(st.J, gw, gt, w, th, 0.5);
    CHECK(ev.dropped == st.dropped);
    CHECK(ev.added == st.added);
    std::vector<std::uint64_t> ids;
    for (const auto& pl : p.planes()) ids.push_back(pl.id);
    CHECK(ids == st.after);
  }
}

TEST_CASE("polytope ascent keeps multipliers non-negative") {
  Polytope p(1, 1);
  p.update(1.0, std::vector<double>{1.0}, std::vector<double>{0.0}, std::vector<double>{0.0},
           std::vector<double>{0.0}, 0.1);
  p.ascend(std::vector<double>{-5.0}, 1.0);
  CHECK(p.planes()[0].multiplier == 0.0);
  p.ascend(std::vector<double>{2.0}, 0.5);
  CHECK(p.planes()[0].multiplier == 1.0);
  CHECK(p.lambda_sum() == 1.0);
}

TEST_CASE("minibatch sampler covers each epoch exactly once") {
  std::vector<std::size_t> rows(10);
  std::iota(rows.begin(), rows.end(), 100);
  MinibatchSampler s(rows, 4, 9);
  CHECK(s.batches_per_epoch() == 3);
  std::vector<std::size_t> seen;
  for (int b = 0; b < 3; ++b) {
    auto batch = s.next();
    seen.insert(seen.end(), batch.begin(), batch.end());
  }
  std::sort(seen.begin(), seen.end());
  CHECK(seen == rows);
  MinibatchSampler again(rows, 4, 9);
  MinibatchSampler fresh(rows, 4, 9);
  CHECK(again.next() == fresh.next());
}

namespace {

struct Toy {
  models::TaskTable table;
  SolverConfig config;
  std::vector<std::size_t> rows;

  explicit Toy(std::uint64_t seed, std::size_t samples = 8) : table(test::toy_table(16, samples, seed)) {
    config.hidden = {6, 5};
    config.seed = seed;
    config.batch_size = 4;
    config.T = 30;
    rows.resize(samples);
    std::iota(rows.begin(), rows.end(), 0);
  }
};

}  // namespace

TEST_CASE("solver config validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate(64));
  CHECK(c.resolved_n_min(64) == 21);
  CHECK(c.resolved_n_max(64) == 32);
  c.n_min = 20;
  c.n_max = 10;
  CHECK_THROWS_AS(c.validate(64), std::invalid_argument);
  c = {};
  c.eta = 0;
  CHECK_THROWS_AS(c.validate(64), std::invalid_argument);
  c = {};
  c.K = 0;
  CHECK_THROWS_AS(c.validate(64), std::invalid_argument);
  c = {};
  c.n_max = 65;
  CHECK_THROWS_AS(c.validate(64), std::invalid_argument);
}

TEST_CASE("lagrangian examples") {
  Toy toy(1);
  BilevelProblem problem(toy.table, toy.rows, toy.config);
  auto state = initial_state(problem, toy.config);
  const auto batch = toy.table.batch(toy.rows, problem.sensing_head);
  state.w.assign(16, 0.0);
  for (std::size_t i = 0; i < 16; i += 2) state.w[i] = 1.0;
  state.dual = {};
  const double ls = problem.sensing.loss(batch, state.theta2, state.w);
  CHECK(lagrangian(problem, state, batch).total() == ls);

  // One constant plane with lambda = 1, c = 5.
  state.polytope.update(1.0, std::vector<double>(16, 0.0), std::vector<double>(state.theta1.size(), 0.0), state.w,
                        state.theta1, -4.0);
  state.polytope.planes()[0].multiplier = 1.0;
  auto parts = lagrangian(problem, state, batch);
  CHECK(parts.planes == 5.0);
  CHECK(parts.total() == doctest::Approx(ls + 5.0 + parts.cardinality));
  state.polytope.planes()[0].multiplier = 2.0;
  CHECK(lagrangian(problem, state, batch).total() > parts.total());
}

TEST_CASE("lagrangian gradient matches finite differences") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Toy toy(seed);
    BilevelProblem problem(toy.table, toy.rows, toy.config);
    auto state = initial_state(problem, toy.config);
    std::mt19937_64 rng(seed);
    state.w = test::uniform_vector(rng, 16, 0.05, 0.45);
    for (std::size_t i = 1; i < 16; i += 2) state.w[i] += 0.5;
    for (int l = 0; l < 2; ++l) {
      state.polytope.update(1.0, test::uniform_vector(rng, 16, -1, 1),
                            test::uniform_vector(rng, state.theta1.size(), -1, 1), state.w, state.theta1, 0.1);
      state.polytope.planes().back().multiplier = 0.5 + l;
    }
    state.dual = {0.3, 0.7};
    const auto batch = toy.table.batch(toy.rows, problem.sensing_head);
    const auto g = lagrangian_gradient(problem, state, batch, true);
    const double h = 1e-6;
    auto fd = [&](std::vector<double>& v, std::size_t i) {
      const double s = v[i];
      v[i] = s + h;
      const double up = lagrangian(problem, state, batch).total();
      v[i] = s - h;
      const double dn = lagrangian(problem, state, batch).total();
      v[i] = s;
      return (up - dn) / (2 * h);
    };
    auto rel = [](double a, double n) { return std::abs(a - n) / std::max(std::abs(a), 1e-8); };
    for (std::size_t i = 0; i < 16; ++i) CHECK(rel(g.w[i], fd(state.w, i)) < 1e-4);
    for (std::size_t i = 0; i < state.theta1.size(); i += 5) CHECK(rel(g.theta1[i], fd(state.theta1, i)) < 1e-4);
    for (std::size_t i = 0; i < state.theta2.size(); i += 5) CHECK(rel(g.theta2[i], fd(state.theta2, i)) < 1e-4);
  }
}

TEST_CASE("lower-level estimate") {
  Toy toy(4);
  BilevelProblem problem(toy.table, toy.rows, toy.config);
  const auto state = initial_state(problem, toy.config);
  const auto b = toy.table.batch(toy.rows, models::HeadKind::position);

  SUBCASE("K = 1 is one plain gradient step") {
    const std::vector<models::Batch> steps{b};
    const auto est = estimate_lower_optimum(problem.localization, state.theta1, state.w, steps, b, 0.1);
    const auto e = problem.localization.evaluate(b, state.theta1, state.w, true);
    for (std::size_t i = 0; i < est.theta1.size(); ++i) CHECK(est.theta1[i] == doctest::Approx(state.theta1[i] - 0.1 * e.grad_theta[i]).epsilon(1e-13));
    for (std::size_t i = 0; i < est.w.size(); ++i) {
      CHECK(est.w[i] == std::clamp(state.w[i] - 0.1 * e.grad_selection[i], 0.0, 1.0));
    }
  }
  SUBCASE("small steps descend on a fixed batch") {
    const double start = problem.localization.loss(b, state.theta1, state.w);
    for (int trial = 0; trial < 20; ++trial) {
      const std::vector<models::Batch> steps(5, b);
      const double eta = 0.005 * (1 + trial % 4);
      const auto est = estimate_lower_optimum(problem.localization, state.theta1, state.w, steps, b, eta);
      CHECK(est.loss <= start);
    }
  }
  SUBCASE("inputs are untouched") {
    auto t = state.theta1;
    const std::vector<models::Batch> steps(3, b);
    estimate_lower_optimum(problem.localization, t, state.w, steps, b, 0.1);
    CHECK(t == state.theta1);
  }
}

TEST_CASE("spg step at a stationary integer point leaves the state unchanged") {
  Toy toy(2);
  BilevelProblem problem(toy.table, toy.rows, toy.config);
  auto state = initial_state(problem, toy.config);
  // Zero output weights and a zero selection make every loss gradient vanish
  // except at the output bias; pin that bias to the targets' mean instead.
  state.w.assign(16, 0.0);
  for (std::size_t i = 0; i < 8; ++i) state.w[i] = 1.0;  // |w| = 8 inside [5, 8]
  std::fill(state.theta2.begin(), state.theta2.end(), 0.0);
  const auto batch = toy.table.batch(toy.rows, problem.sensing_head);
  const std::size_t classes = toy.table.classes();
  for (std::size_t r = 0; r < batch.size(); ++r) {
    for (std::size_t c = 0; c < classes; ++c) {
      state.theta2[state.theta2.size() - classes + c] += batch.targets[r * classes + c] / batch.size();
    }
  }
  const auto before = state;
  const auto d = spg_step(problem, state, batch, 1, toy.config);
  CHECK(d.delta_w_sq == 0.0);
  CHECK(state.w == before.w);
  for (std::size_t i = 0; i < state.theta2.size(); ++i) CHECK(std::abs(state.theta2[i] - before.theta2[i]) < 1e-15);
  CHECK(state.theta1 == before.theta1);
  CHECK(state.dual.mu1 == 0.0);
  CHECK(state.dual.mu2 == 0.0);
}

TEST_CASE("spg step aborts on non-finite gradients naming the block") {
  Toy toy(3);
  BilevelProblem problem(toy.table, toy.rows, toy.config);
  auto state = initial_state(problem, toy.config);
  std::vector<double> gw(16, 0.0);
  gw[3] = std::numeric_limits<double>::infinity();
  state.polytope.update(1.0, gw, std::vector<double>(state.theta1.size(), 0.0), state.w, state.theta1, 0.1);
  state.polytope.planes()[0].multiplier = 1.0;
  const auto batch = toy.table.batch(toy.rows, problem.sensing_head);
  try {
    spg_step(problem, state, batch, 1, toy.config);
    FAIL("expected an abort");
  } catch (const SolverAbort& e) {
    CHECK(std::string(e.what()).find("'w'") != std::string::npos);
  }
  CHECK_THROWS_AS(spg_step(problem, state, batch, 0, toy.config), std::invalid_argument);
}

TEST_CASE("spg run invariants and determinism") {
  Toy toy(6, 24);
  toy.config.T = 40;
  BilevelProblem problem(toy.table, toy.rows, toy.config);
  const auto a = run_spg_mibo(problem, toy.config);
  const auto b = run_spg_mibo(problem, toy.config);
  CHECK(history_csv(a.history) == history_csv(b.history));
  CHECK(a.w == b.w);
  REQUIRE(a.history.size() == 40);
  for (std::size_t t = 0; t < a.history.size(); ++t) {
    const auto& row = a.history[t];
    CHECK(row.iter == t + 1);
    CHECK(row.eta_t == step_size(toy.config.eta, t + 1));
    CHECK(row.mu1 >= 0.0);
    CHECK(row.mu2 >= 0.0);
    CHECK(row.lambda_sum >= 0.0);
    CHECK(row.J >= 0.0);
  }
  for (double v : a.w) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("planes are added exactly when J exceeds eps") {
  Toy toy(7, 16);
  toy.config.T = 25;
  toy.config.eps = 1e-7;
  toy.config.eta = 0.5;
  BilevelProblem problem(toy.table, toy.rows, toy.config);
  const auto r = run_spg_mibo(problem, toy.config);
  std::size_t prev = 0, most = 0;
  for (const auto& row : r.history) {
    most = std::max(most, row.num_planes);
    if (row.J > 1e-7) CHECK(row.num_planes >= 1);
    if (row.J <= 1e-7) CHECK(row.num_planes <= prev);
    prev = row.num_planes;
  }
  CHECK(most >= 1);
}

TEST_CASE("baselines") {
  Toy toy(8, 16);
  toy.config.T = 20;
  BilevelProblem problem(toy.table, toy.rows, toy.config);
  SUBCASE("penalty run is deterministic and keeps w in the open box") {
    const auto a = run_penalty_baseline(problem, toy.config, 1.0);
    const auto b = run_penalty_baseline(problem, toy.config, 1.0);
    CHECK(a.w == b.w);
    CHECK(a.history.size() == 20);
    for (double v : a.w) CHECK((v > 0.0 && v < 1.0));
    CHECK_THROWS_AS(run_penalty_baseline(problem, toy.config, 0.0), std::invalid_argument);
  }
  SUBCASE("single-task history length") {
    const auto loc = run_single_task(problem, Task::localization, toy.config);
    CHECK(loc.history.size() == 20);
    CHECK(loc.history[0].loss_s == 0.0);
    CHECK(loc.theta2 == problem.sensing.init_parameters(toy.config.seed * 2 + 2));
  }
}

TEST_CASE("sensing-only on constant labels reaches the trivial floor") {
  auto ds = test::toy_dataset(16, 24, 12);
  for (auto& s : ds.samples) s.state = 1;
  auto table = models::TaskTable::from_dataset(ds);
  std::vector<std::size_t> rows(24);
  std::iota(rows.begin(), rows.end(), 0);
  table.standardize(rows);
  SolverConfig c;
  c.hidden = {6};
  c.T = 400;
  c.eta = 0.5;
  c.batch_size = 8;
  BilevelProblem problem(table, rows, c);
  const auto r = run_single_task(problem, Task::sensing, c);
  CHECK(r.history.back().loss_s < 1e-3);
}

TEST_CASE("history csv round trip with 17 significant digits") {
  std::vector<HistoryRow> rows(3);
  for (std::size_t i = 0; i < 3; ++i) {
    rows[i].iter = i + 1;
    rows[i].eta_t = 0.1 / std::sqrt(i + 1.0);
    rows[i].loss_s = 1.0 / 3.0;
    rows[i].num_planes = i;
    rows[i].grad_u_sq = 0.1 * i;
    rows[i].grad_v_sq = 1e-300;
  }
  const auto dir = std::filesystem::temp_directory_path() / "mibo_history_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "history.csv") << history_csv(rows);
  std::ofstream(dir / "diagnostics.csv") << diagnostics_csv(rows);
  const auto back = read_history(dir / "history.csv", dir / "diagnostics.csv");
  REQUIRE(back.size() == 3);
  CHECK(back[2].eta_t == rows[2].eta_t);
  CHECK(back[1].loss_s == rows[1].loss_s);
  CHECK(back[2].grad_u_sq == rows[2].grad_u_sq);
  CHECK(back[0].grad_v_sq == 1e-300);
  CHECK(history_csv(rows).rfind(std::string(kHistoryHeader) + "\n", 0) == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("in-flight history is flushed and removed on completion") {
  const auto dir = std::filesystem::temp_directory_path() / "mibo_flush_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  HistoryFlusher f(dir / "h.partial", 2);
  std::vector<HistoryRow> rows(1);
  f.maybe_flush(rows);
  rows.resize(3);
  f.maybe_flush(rows);
  std::ifstream in(dir / "h.partial");
  std::string line;
  int n = 0;
  while (std::getline(in, line)) ++n;
  CHECK(n == 4);
  f.finish();
  CHECK(!std::filesystem::exists(dir / "h.partial"));
  std::filesystem::remove_all(dir);
}
