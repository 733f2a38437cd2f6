#include <cmath>
#include <random>

#include "doctest.h"
#include "mibo/autodiff/graph.hpp"
#include "support.hpp"

using namespace mibo::autodiff;

namespace {

Tensor random_tensor(std::mt19937_64& rng, std::vector<std::size_t> shape, double lo = -1, double hi = 1) {
  Tensor t(shape);
  std::uniform_real_distribution<double> u(lo, hi);
  for (auto& v : t.data) v = u(rng);
  return t;
}

}  // namespace

TEST_CASE("tensor shape invariants") {
  CHECK_THROWS_AS(Tensor({2, 3}, std::vector<double>(5)), std::invalid_argument);
  Tensor m = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m.row(1)[0] == 4);
  CHECK(shape_string({2, 3}) == "[2x3]");
}

TEST_CASE("forward examples") {
  SUBCASE("identity") {
    Graph g;
    g.input({3});
    const std::vector<Tensor> in{Tensor::vector({1, 2, 3})};
    CHECK(g.forward(in).data == std::vector<double>{1, 2, 3});
  }
  SUBCASE("sigmoid of zero") {
    Graph g;
    g.sigmoid(g.input({1}));
    const std::vector<Tensor> in{Tensor::vector({0})};
    CHECK(g.forward(in)[0] == 0.5);
  }
  SUBCASE("mse of equal vectors") {
    Graph g;
    g.mse(g.input({2}), g.input({2}));
    const std::vector<Tensor> in{Tensor::vector({1, 2}), Tensor::vector({1, 2})};
    CHECK(g.forward(in)[0] == 0.0);
  }
  SUBCASE("affine, relu, row-broadcast mul, concat") {
    Graph g;
    auto x = g.input({0, 2});
    auto w = g.parameter(Tensor::matrix(2, 2, {1, -1, 2, 0}));
    auto b = g.parameter(Tensor::vector({0.5, -3}));
    auto a = g.affine(x, g.node(w), g.node(b));
    auto r = g.relu(a);
    auto m = g.parameter(Tensor::matrix(1, 2, {2, 10}));
    auto p = g.mul(r, g.node(m));
    g.concat(p, a, 1);
    const std::vector<Tensor> in{Tensor::matrix(2, 2, {1, 2, 3, 1})};
    const auto& out = g.forward(in);
    // rows of a: [1-2+0.5, 2-3] = [-0.5, -1]; [3-1+0.5, 6-3] = [2.5, 3]
    CHECK(out.shape == std::vector<std::size_t>{2, 4});
    CHECK(out.data == std::vector<double>{0, 0, -0.5, -1, 5, 30, 2.5, 3});
  }
  SUBCASE("softmax cross-entropy with uniform logits") {
    Graph g;
    const auto logits = g.input({0, 3});
    g.softmax_cross_entropy(logits, g.input({0}));
    const std::vector<Tensor> in{Tensor::matrix(2, 3, {0, 0, 0, 1, 1, 1}), Tensor::vector({0, 2})};
    CHECK(g.forward(in)[0] == doctest::Approx(std::log(3.0)));
  }
}

TEST_CASE("forward rejects mismatched and non-finite inputs naming the node") {
  Graph g;
  g.relu(g.input({0, 3}, "x"));
  const std::vector<Tensor> bad{Tensor::matrix(1, 2, {1, 2})};
  try {
    g.forward(bad);
    FAIL("expected a shape error");
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("'x'") != std::string::npos);
  }
  const std::vector<Tensor> nan{Tensor::matrix(1, 3, {1, NAN, 2})};
  CHECK_THROWS(g.forward(nan));
  Graph h;
  auto a = h.input({0, 3});
  auto b = h.input({0, 2});
  h.mul(a, b);
  const std::vector<Tensor> ab{Tensor::matrix(1, 3, {1, 2, 3}), Tensor::matrix(1, 2, {1, 2})};
  CHECK_THROWS_AS(h.forward(ab), ShapeError);
}

TEST_CASE("backward examples") {
  SUBCASE("x squared at 3") {
    Graph g;
    auto x = g.parameter(Tensor::vector({3}));
    g.mul(g.node(x), g.node(x));
    g.forward({});
    CHECK(g.backward()[0][0] == 6.0);
  }
  SUBCASE("sigmoid slope at zero") {
    Graph g;
    auto x = g.parameter(Tensor::vector({0}));
    g.sigmoid(g.node(x));
    g.forward({});
    CHECK(g.backward()[0][0] == 0.25);
  }
  SUBCASE("mse at its minimum") {
    Graph g;
    auto x = g.parameter(Tensor::vector({1, -2, 5}));
    g.mse(g.node(x), g.input({3}));
    const std::vector<Tensor> in{Tensor::vector({1, -2, 5})};
    g.forward(in);
    const auto grads = g.backward();
    for (double v : grads[0].data) CHECK(v == 0.0);
  }
  SUBCASE("errors") {
    Graph g;
    auto x = g.parameter(Tensor::vector({1, 2}));
    g.relu(g.node(x));
    CHECK_THROWS_AS(g.backward(), std::logic_error);
    g.forward({});
    CHECK_THROWS_AS(g.backward(), std::logic_error);  // not scalar
  }
}

TEST_CASE("finite-difference check examples") {
  SUBCASE("quadratic") {
    Graph g;
    auto x = g.parameter(Tensor::vector({0.7, -1.3}));
    g.mse(g.mul(g.node(x), g.node(x)), g.input({2}));
    const std::vector<Tensor> in{Tensor::vector({0.1, 0.2})};
    g.forward(in);
    CHECK(finite_difference_check(g, 1e-5) < 1e-6);
  }
  SUBCASE("constant graph") {
    Graph g;
    auto x = g.parameter(Tensor::vector({0.3}));
    auto zero = g.parameter(Tensor::vector({0.0}));
    g.mul(g.node(x), g.node(zero));
    g.forward({});
    // d/dx = 0 exactly; d/dzero = 0.3 and is checked as well
    CHECK(finite_difference_check(g, 1e-5) < 1e-9);
  }
  SUBCASE("two-layer sigmoid perceptron, seed 0") {
    std::mt19937_64 rng(0);
    Graph g;
    auto x = g.input({0, 4});
    auto w1 = g.parameter(random_tensor(rng, {5, 4}));
    auto b1 = g.parameter(random_tensor(rng, {5}));
    auto w2 = g.parameter(random_tensor(rng, {2, 5}));
    auto b2 = g.parameter(random_tensor(rng, {2}));
    auto h = g.sigmoid(g.affine(x, g.node(w1), g.node(b1)));
    g.mse(g.affine(h, g.node(w2), g.node(b2)), g.input({0, 2}));
    const std::vector<Tensor> in{random_tensor(rng, {6, 4}), random_tensor(rng, {6, 2})};
    g.forward(in);
    CHECK(finite_difference_check(g, 1e-5) < 1e-4);
  }
}

// Random small graphs drawn from the whole op set; each must pass the
// central-difference check at relative tolerance 1e-4.
TEST_CASE("gradients match finite differences on 100 random graphs") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, 4);
    std::uniform_int_distribution<std::size_t> dim(1, 4);
    const std::size_t rows = dim(rng) + 1;
    std::size_t width = dim(rng);

    Graph g;
    std::vector<Tensor> inputs;
    auto x = g.input({0, width});
    inputs.push_back(random_tensor(rng, {rows, width}, -2, 2));
    NodeId cur = x;
    const int depth = 1 + static_cast<int>(dim(rng));
    for (int layer = 0; layer < depth; ++layer) {
      switch (pick(rng)) {
        case 0: {
          const std::size_t out = dim(rng);
          auto w = g.parameter(random_tensor(rng, {out, width}));
          auto b = g.parameter(random_tensor(rng, {out}));
          cur = g.affine(cur, g.node(w), g.node(b));
          width = out;
          break;
        }
        case 1:
          cur = g.relu(cur);
          break;
        case 2:
          cur = g.sigmoid(cur);
          break;
        case 3: {
          auto m = g.parameter(random_tensor(rng, {1, width}, 0.5, 1.5));
          cur = g.mul(cur, g.node(m));
          break;
        }
        case 4: {
          auto w = g.parameter(random_tensor(rng, {width, width}));
          auto b = g.parameter(random_tensor(rng, {width}));
          auto side = g.affine(cur, g.node(w), g.node(b));
          cur = g.concat(cur, side, 1);
          width *= 2;
          break;
        }
      }
    }
    // Always finish with a trainable layer so every graph has parameters.
    const std::size_t classes = 2 + dim(rng) % 3;
    auto w = g.parameter(random_tensor(rng, {classes, width}));
    auto b = g.parameter(random_tensor(rng, {classes}));
    auto head = g.affine(cur, g.node(w), g.node(b));
    if (seed % 3 == 0) {
      // Row-stacked copy exercises axis-0 concat.
      auto stacked = g.concat(head, head, 0);
      g.mse(stacked, g.input({0, classes}));
      inputs.push_back(random_tensor(rng, {2 * rows, classes}));
    } else if (seed % 3 == 1) {
      g.mse(head, g.input({0, classes}));
      inputs.push_back(random_tensor(rng, {rows, classes}));
    } else {
      g.softmax_cross_entropy(head, g.input({0}));
      Tensor labels({rows});
      for (auto& l : labels.data) l = static_cast<double>(rng() % classes);
      inputs.push_back(labels);
    }
    g.forward(inputs);
    CAPTURE(seed);
    CHECK(finite_difference_check(g, 1e-6) < 1e-4);
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("forward is bitwise deterministic") {
  std::mt19937_64 rng(9);
  Graph g;
  auto x = g.input({0, 3});
  auto w = g.parameter(random_tensor(rng, {4, 3}));
  auto b = g.parameter(random_tensor(rng, {4}));
  g.sigmoid(g.affine(x, g.node(w), g.node(b)));
  const std::vector<Tensor> in{random_tensor(rng, {5, 3})};
  const Tensor first = g.forward(in);
  const Tensor second = g.forward(in);
  CHECK(first.data == second.data);
}

TEST_CASE("gradient of a sum of losses is the sum of gradients") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    Graph g;
    auto x1 = g.input({0, 3});
    auto x2 = g.input({0, 3});
    auto y1 = g.input({0, 2});
    auto y2 = g.input({0, 2});
    auto w = g.parameter(random_tensor(rng, {2, 3}));
    auto b = g.parameter(random_tensor(rng, {2}));
    auto p1 = g.sigmoid(g.affine(x1, g.node(w), g.node(b)));
    auto p2 = g.sigmoid(g.affine(x2, g.node(w), g.node(b)));
    auto l1 = g.mse(p1, y1);
    auto l2 = g.mse(p2, y2);
    // With equal batch sizes, mse over the stacked batch is (l1 + l2) / 2.
    auto both = g.mse(g.concat(p1, p2, 0), g.concat(y1, y2, 0));
    const std::vector<Tensor> in{random_tensor(rng, {4, 3}), random_tensor(rng, {4, 3}),
                                 random_tensor(rng, {4, 2}), random_tensor(rng, {4, 2})};
    g.forward(in);
    const auto g1 = g.backward(l1);
    const auto g2 = g.backward(l2);
    const auto gb = g.backward(both);
    for (std::size_t s = 0; s < gb.size(); ++s) {
      for (std::size_t i = 0; i < gb[s].size(); ++i) {
        CHECK(2.0 * gb[s][i] == doctest::Approx(g1[s][i] + g2[s][i]).epsilon(1e-12));
      }
    }
  }
}
