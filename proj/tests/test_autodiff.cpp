#include <doctest.h>

#include <cmath>
#include <vector>

#include "yun/autodiff.hpp"
#include "yun/errors.hpp"
#include "yun/grad_check.hpp"
#include "yun/rng.hpp"

using namespace yun;

namespace {

Tensor random_tensor(std::size_t r, std::size_t c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(r, c);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

Parameter param(std::string name, Tensor v) { return Parameter{std::move(name), std::move(v), true}; }

}  // namespace

TEST_CASE("tensor shape checks") {
  CHECK_THROWS_AS(Tensor(0, 3), ShapeError);
  CHECK_THROWS_AS(Tensor(2, 2, std::vector<double>{1, 2, 3}), ShapeError);
  Tensor t(2, 3, 1.5);
  CHECK(t.size() == 6);
  CHECK(t.shape_string() == "[2 x 3]");
  CHECK(t(1, 2) == 1.5);
}

TEST_CASE("forward examples") {
  Tape tape;
  CHECK(tanh(tape.constant(Tensor::row({0.0}))).value()[0] == 0.0);
  const Tensor s = softmax(tape.constant(Tensor::row({0.0, 0.0}))).value();
  CHECK(s[0] == 0.5);
  CHECK(s[1] == 0.5);
  const Tensor r = relu(tape.constant(Tensor::row({-1.0, 2.0}))).value();
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 2.0);
}

TEST_CASE("matmul against hand arithmetic") {
  Tape tape;
  Var a = tape.constant(Tensor(2, 2, std::vector<double>{1, 2, 3, 4}));
  Var b = tape.constant(Tensor(2, 1, std::vector<double>{5, 6}));
  const Tensor c = matmul(a, b).value();
  CHECK(c[0] == 17.0);
  CHECK(c[1] == 39.0);
  const Tensor d = matmul_transposed(a, a).value();  // a a^T
  CHECK(d(0, 1) == 11.0);
  CHECK(d(1, 1) == 25.0);
}

TEST_CASE("shape errors name the operation and shapes") {
  Tape tape;
  Var a = tape.constant(Tensor(2, 3));
  Var b = tape.constant(Tensor(2, 3));
  try {
    matmul(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("matmul") != std::string::npos);
    CHECK(msg.find("[2 x 3]") != std::string::npos);
  }
  CHECK_THROWS_AS(add(a, tape.constant(Tensor(3, 3))), ShapeError);
  CHECK_THROWS_AS(mul(a, tape.constant(Tensor(3, 2))), ShapeError);
  const Var parts[] = {a, tape.constant(Tensor(3, 1))};
  CHECK_THROWS_AS(concat(parts), ShapeError);
}

TEST_CASE("softmax rows sum to one") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    Tape tape;
    const Tensor s = softmax(tape.constant(random_tensor(4, 7, rng, -30, 30))).value();
    for (std::size_t r = 0; r < 4; ++r) {
      double total = 0;
      for (std::size_t c = 0; c < 7; ++c) {
        CHECK(s(r, c) >= 0.0);
        total += s(r, c);
      }
      CHECK(std::abs(total - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("backward of sum is all ones") {
  Parameter x = param("x", Tensor(3, 2, 0.7));
  Tape tape;
  GradientMap g = tape.backward(sum(tape.parameter(x)));
  for (double v : g.at(x).values()) CHECK(v == 1.0);
}

TEST_CASE("backward of tanh at zero") {
  Parameter x = param("x", Tensor(1, 1, 0.0));
  Tape tape;
  GradientMap g = tape.backward(sum(tanh(tape.parameter(x))));
  CHECK(g.at(x)[0] == 1.0);
}

TEST_CASE("non-participating parameters get zero gradients") {
  Parameter x = param("x", Tensor(1, 2, 1.0));
  Parameter unused = param("unused", Tensor(2, 2, 1.0));
  Tape tape;
  Var u = tape.parameter(unused);
  (void)u;
  GradientMap g = tape.backward(sum(tape.parameter(x)));
  REQUIRE(g.contains(unused));
  for (double v : g.at(unused).values()) CHECK(v == 0.0);
}

TEST_CASE("second backward on a tape is a usage error") {
  Parameter x = param("x", Tensor(1, 2, 1.0));
  Tape tape;
  Var loss = sum(tape.parameter(x));
  tape.backward(loss);
  CHECK_THROWS_AS(tape.backward(loss), UsageError);
}

TEST_CASE("backward requires a scalar loss recorded last") {
  Parameter x = param("x", Tensor(1, 2, 1.0));
  Tape tape;
  Var p = tape.parameter(x);
  CHECK_THROWS_AS(tape.backward(tanh(p)), ShapeError);
}

TEST_CASE("frozen parameters receive no gradient") {
  Parameter frozen{"frozen", Tensor(1, 2, 1.0), false};
  Tape tape;
  GradientMap g = tape.backward(sum(tape.parameter(frozen)));
  CHECK_FALSE(g.contains(frozen));
}

TEST_CASE("finite checks raise on NaN") {
  set_finite_checks(true);
  Tape tape;
  Var a = tape.constant(Tensor::row({std::nan("")}));
  CHECK_THROWS_AS(tanh(a), NumericError);
#ifdef NDEBUG
  set_finite_checks(false);
#endif
}

TEST_CASE("every op kind passes central differences") {
  Rng rng(11);
  Parameter a = param("a", random_tensor(3, 4, rng));
  Parameter b = param("b", random_tensor(4, 2, rng));
  Parameter c = param("c", random_tensor(3, 4, rng));
  Parameter bias = param("bias", random_tensor(1, 4, rng));
  Parameter w = param("w", random_tensor(1, 3, rng));
  std::vector<Parameter*> ps{&a, &b, &c, &bias, &w};

  auto check = [&](const char* name, LossFn fn) {
    const double err = grad_check(fn, ps, 1e-5);
    INFO(name << " relative error " << err);
    CHECK(err < 1e-4);
  };
  check("matmul", [&](Tape& t) { return sum(tanh(matmul(t.parameter(a), t.parameter(b)))); });
  check("matmul-transposed", [&](Tape& t) { return sum(tanh(matmul_transposed(t.parameter(a), t.parameter(c)))); });
  check("add-bias", [&](Tape& t) { return sum(tanh(add(t.parameter(a), t.parameter(bias)))); });
  check("add", [&](Tape& t) { return sum(tanh(add(t.parameter(a), t.parameter(c)))); });
  check("concat", [&](Tape& t) {
    const Var parts[] = {t.parameter(a), t.parameter(c)};
    return sum(tanh(concat(parts)));
  });
  check("concat-rows", [&](Tape& t) {
    const Var parts[] = {t.parameter(a), t.parameter(bias)};
    return sum(tanh(concat_rows(parts)));
  });
  check("mul", [&](Tape& t) { return sum(mul(t.parameter(a), t.parameter(c))); });
  check("sigmoid", [&](Tape& t) { return sum(mul(sigmoid(t.parameter(a)), t.parameter(c))); });
  check("relu", [&](Tape& t) { return sum(mul(relu(t.parameter(a)), t.parameter(c))); });
  check("softmax", [&](Tape& t) { return sum(mul(softmax(t.parameter(a)), t.parameter(c))); });
  check("weighted-sum", [&](Tape& t) { return sum(tanh(weighted_sum(t.parameter(w), t.parameter(a)))); });
  check("mean", [&](Tape& t) { return mean(tanh(t.parameter(a))); });
  check("cross-entropy", [&](Tape& t) { return softmax_cross_entropy(t.parameter(w), 2, 0.7); });
  check("slice", [&](Tape& t) { return sum(tanh(slice_cols(t.parameter(a), 1, 2))); });
  check("gather", [&](Tape& t) { return sum(tanh(gather_row(t.parameter(a), 2))); });
}

TEST_CASE("gradient checker examples") {
  Rng rng(3);
  Parameter w = param("w", random_tensor(1, 5, rng));
  const Tensor x = random_tensor(5, 1, rng);
  std::vector<Parameter*> ps{&w};
  CHECK(grad_check([&](Tape& t) { return sum(matmul(t.parameter(w), t.constant(x))); }, ps, 1e-5) < 1e-10);

  Parameter logits = param("logits", random_tensor(1, 3, rng, -3, 3));
  std::vector<Parameter*> ls{&logits};
  CHECK(grad_check([&](Tape& t) { return softmax_cross_entropy(t.parameter(logits), 1); }, ls, 1e-5) < 1e-6);
}

TEST_CASE("gradient checker on a random two-layer net") {
  // 2 -> 3 -> 1: six first-layer weights, three biases, three output weights.
  Rng rng(21);
  Parameter w1 = param("w1", random_tensor(2, 3, rng));
  Parameter b1 = param("b1", random_tensor(1, 3, rng));
  Parameter w2 = param("w2", random_tensor(3, 1, rng));
  const Tensor x = random_tensor(1, 2, rng);
  std::vector<Parameter*> ps{&w1, &b1, &w2};
  const double err = grad_check(
      [&](Tape& t) {
        Var h = tanh(add(matmul(t.constant(x), t.parameter(w1)), t.parameter(b1)));
        return sum(matmul(h, t.parameter(w2)));
      },
      ps, 1e-5);
  CHECK(err < 1e-4);
}

TEST_CASE("gradient checker rejects non-deterministic functions") {
  Parameter x = param("x", Tensor(1, 1, 1.0));
  std::vector<Parameter*> ps{&x};
  int calls = 0;
  CHECK_THROWS_AS(grad_check(
                      [&](Tape& t) {
                        ++calls;
                        return sum(mul(t.parameter(x), t.constant(Tensor(1, 1, static_cast<double>(calls)))));
                      },
                      ps, 1e-5),
                  UsageError);
}

TEST_CASE("concat backward splits the upstream gradient exactly") {
  Rng rng(8);
  Parameter a = param("a", random_tensor(2, 3, rng));
  Parameter b = param("b", random_tensor(2, 2, rng));
  Parameter up = param("up", random_tensor(2, 5, rng));
  Tape tape;
  const Var parts[] = {tape.parameter(a), tape.parameter(b)};
  Var joined = concat(parts);
  GradientMap g = tape.backward(sum(mul(joined, tape.constant(up.value))));
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 3; ++c) CHECK(g.at(a)(r, c) == up.value(r, c));
    for (std::size_t c = 0; c < 2; ++c) CHECK(g.at(b)(r, c) == up.value(r, 3 + c));
  }
}

TEST_CASE("identical passes give identical gradient maps") {
  Rng rng(5);
  Parameter a = param("a", random_tensor(3, 3, rng));
  Parameter b = param("b", random_tensor(1, 3, rng));
  auto run = [&] {
    Tape t;
    Var row = matmul_transposed(t.parameter(b), t.parameter(a));  // 1 x 3
    return t.backward(softmax_cross_entropy(tanh(row), 0));
  };
  CHECK(run() == run());
}
