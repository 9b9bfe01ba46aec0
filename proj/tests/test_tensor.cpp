#include <doctest.h>

#include <cmath>
#include <cstring>

#include "core/common.hpp"
#include "core/optim.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"
#include "support/reference.hpp"

using namespace iclab;
using tc::Tensor;

namespace {

Tensor random_tensor(tc::Shape shape, Rng& rng, float scale = 1.0f) {
  Tensor t(shape);
  for (int64_t i = 0; i < t.size(); ++i) t.data()[i] = rng.normal(0.0f, scale);
  return t;
}

testref::Mat to_mat(const Tensor& t) {
  const int r = t.shape()[0], c = t.shape()[1];
  testref::Mat m(r, testref::Vec(c));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m[i][j] = t.data()[i * c + j];
  return m;
}

}  // namespace

TEST_CASE("matmul identity") {
  Tensor eye({2, 2}, {1, 0, 0, 1});
  Tensor b({2, 2}, {3, 4, 5, 6});
  Tensor c = tc::matmul(eye, b, nullptr);
  for (int i = 0; i < 4; ++i) CHECK(c.data()[i] == b.data()[i]);
}

TEST_CASE("matmul hand expansion") {
  Tensor a({1, 2}, {1, 2});
  Tensor b({2, 1}, {3, 4});
  Tensor c = tc::matmul(a, b, nullptr);
  CHECK(c.item() == doctest::Approx(11.0));
}

TEST_CASE("matmul vs triple-loop oracle") {
  Rng rng(11);
  Tensor a = random_tensor({5, 7}, rng);
  Tensor b = random_tensor({7, 3}, rng);
  Tensor c = tc::matmul(a, b, nullptr);
  testref::Mat want = testref::matmul(to_mat(a), to_mat(b));
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(testref::close(c.data()[i * 3 + j], want[i][j], 1e-5, 1e-7));
}

TEST_CASE("matmul shape mismatch names both shapes") {
  Tensor a({2, 3});
  Tensor b({4, 2});
  try {
    tc::matmul(a, b, nullptr);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2,3]") != std::string::npos);
    CHECK(msg.find("[4,2]") != std::string::npos);
  }
}

TEST_CASE("softmax_cross_entropy uniform case") {
  Tensor logits({2}, {0, 0});
  Tensor loss = tc::softmax_cross_entropy(logits, 0, nullptr);
  CHECK(loss.item() == doctest::Approx(std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("softmax_cross_entropy stability limit") {
  Tensor logits({2}, {1000, 0});
  Tensor loss = tc::softmax_cross_entropy(logits, 0, nullptr);
  CHECK(std::isfinite(loss.item()));
  CHECK(loss.item() == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("softmax_cross_entropy random 8-way vs 64-bit reference") {
  Rng rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    Tensor logits = random_tensor({8}, rng, 3.0f);
    const int target = static_cast<int>(rng.below(8));
    testref::Vec ref(8);
    for (int i = 0; i < 8; ++i) ref[i] = logits.data()[i];
    const double want = testref::cross_entropy(ref, target);
    Tensor loss = tc::softmax_cross_entropy(logits, target, nullptr);
    CHECK(testref::close(loss.item(), want, 1e-6, 1e-7));
  }
}

TEST_CASE("softmax_cross_entropy target out of range") {
  Tensor logits({4});
  CHECK_THROWS_AS(tc::softmax_cross_entropy(logits, 4, nullptr), ShapeError);
  CHECK_THROWS_AS(tc::softmax_cross_entropy(logits, -1, nullptr), ShapeError);
}

TEST_CASE("softmax sums to one and is non-negative") {
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<float> logits(16);
    for (auto& v : logits) v = rng.normal(0.0f, rep % 5 == 0 ? 50.0f : 2.0f);
    auto p = tc::softmax(logits);
    double s = 0.0;
    for (double v : p) {
      CHECK(v >= 0.0);
      s += v;
    }
    CHECK(std::fabs(s - 1.0) < 1e-6);
  }
}

TEST_CASE("backward of sum gives unit grads") {
  Rng rng(5);
  Tensor x = random_tensor({3, 4}, rng);
  tc::Tape tape;
  Tensor loss = tc::sum(x, &tape);
  tape.backward(loss);
  for (int64_t i = 0; i < x.size(); ++i) CHECK(x.grad()[i] == doctest::Approx(1.0));
}

TEST_CASE("backward of squared norm gives 2x") {
  Rng rng(6);
  Tensor x = random_tensor({5}, rng);
  tc::Tape tape;
  Tensor loss = tc::sum_squares(x, &tape);
  tape.backward(loss);
  for (int64_t i = 0; i < x.size(); ++i)
    CHECK(x.grad()[i] == doctest::Approx(2.0f * x.data()[i]).epsilon(1e-5));
}

TEST_CASE("backward twice without retaping is a state error") {
  Tensor x({2}, {1, 2});
  tc::Tape tape;
  Tensor loss = tc::sum(x, &tape);
  tape.backward(loss);
  CHECK_THROWS_AS(tape.backward(loss), StateError);
}

// ---- per-primitive gradient checks vs double-precision finite differences --

namespace {

// FD through a double reference function, perturbing one f32 input coordinate
template <typename RefLoss>
void gradcheck_input(Tensor& x, const Tensor& analytic_src, RefLoss ref_loss, double h = 1e-3,
                     double rel = 1e-2, double abs = 1e-4) {
  for (int64_t i = 0; i < x.size(); ++i) {
    const float keep = x.data()[i];
    x.data()[i] = keep + static_cast<float>(h);
    const double up = ref_loss();
    x.data()[i] = keep - static_cast<float>(h);
    const double dn = ref_loss();
    x.data()[i] = keep;
    const double want = (up - dn) / (2.0 * h);
    const double got = analytic_src.grad()[i];
    INFO("coordinate ", i, " got ", got, " want ", want);
    CHECK(testref::close(got, want, rel, abs));
  }
}

}  // namespace

TEST_CASE("gradcheck: matmul") {
  Rng rng(21);
  Tensor a = random_tensor({3, 4}, rng);
  Tensor b = random_tensor({4, 2}, rng);
  tc::Tape tape;
  Tensor out = tc::matmul(a, b, &tape);
  Tensor loss = tc::sum(out, &tape);
  tape.backward(loss);
  auto ref = [&]() {
    testref::Mat c = testref::matmul(to_mat(a), to_mat(b));
    double s = 0.0;
    for (auto& row : c)
      for (double v : row) s += v;
    return s;
  };
  gradcheck_input(a, a, ref);
  gradcheck_input(b, b, ref);
}

TEST_CASE("gradcheck: gelu") {
  Rng rng(22);
  Tensor x = random_tensor({10}, rng);
  tc::Tape tape;
  Tensor loss = tc::sum(tc::gelu(x, &tape), &tape);
  tape.backward(loss);
  auto ref = [&]() {
    double s = 0.0;
    for (int64_t i = 0; i < x.size(); ++i) s += testref::gelu(x.data()[i]);
    return s;
  };
  gradcheck_input(x, x, ref);
}

TEST_CASE("gradcheck: layer_norm") {
  Rng rng(23);
  Tensor x = random_tensor({3, 6}, rng);
  Tensor gamma = random_tensor({6}, rng);
  Tensor beta = random_tensor({6}, rng);
  tc::Tape tape;
  Tensor loss = tc::sum_squares(tc::layer_norm(x, gamma, beta, &tape), &tape);
  tape.backward(loss);
  auto ref = [&]() {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) {
      testref::Vec row(6), g(6), bv(6);
      for (int j = 0; j < 6; ++j) {
        row[j] = x.data()[i * 6 + j];
        g[j] = gamma.data()[j];
        bv[j] = beta.data()[j];
      }
      testref::Vec y = testref::layer_norm(row, g, bv);
      for (double v : y) s += v * v;
    }
    return s;
  };
  gradcheck_input(x, x, ref);
  gradcheck_input(gamma, gamma, ref);
  gradcheck_input(beta, beta, ref);
}

TEST_CASE("gradcheck: causal attention") {
  Rng rng(24);
  const int batch = 2, seq = 5, d = 8, heads = 2;
  Tensor q = random_tensor({batch * seq, d}, rng, 0.7f);
  Tensor k = random_tensor({batch * seq, d}, rng, 0.7f);
  Tensor v = random_tensor({batch * seq, d}, rng, 0.7f);
  tc::Tape tape;
  Tensor out = tc::causal_attention(q, k, v, batch, seq, heads, &tape);
  Tensor loss = tc::sum_squares(out, &tape);
  tape.backward(loss);
  auto ref = [&]() {
    double s = 0.0;
    for (int b = 0; b < batch; ++b) {
      testref::Mat mq(seq, testref::Vec(d)), mk = mq, mv = mq;
      for (int t = 0; t < seq; ++t)
        for (int j = 0; j < d; ++j) {
          mq[t][j] = q.data()[(b * seq + t) * d + j];
          mk[t][j] = k.data()[(b * seq + t) * d + j];
          mv[t][j] = v.data()[(b * seq + t) * d + j];
        }
      testref::Mat o = testref::causal_attention(mq, mk, mv, heads);
      for (auto& row : o)
        for (double x : row) s += x * x;
    }
    return s;
  };
  gradcheck_input(q, q, ref);
  gradcheck_input(k, k, ref);
  gradcheck_input(v, v, ref);
}

TEST_CASE("gradcheck: cross entropy with position weights") {
  Rng rng(25);
  const int n = 6, vsz = 9;
  Tensor logits = random_tensor({n, vsz}, rng, 2.0f);
  std::vector<int> targets;
  std::vector<float> weights;
  for (int i = 0; i < n; ++i) {
    targets.push_back(static_cast<int>(rng.below(vsz)));
    weights.push_back(i % 3 == 0 ? 0.0f : 1.0f);
  }
  tc::Tape tape;
  Tensor loss = tc::cross_entropy(logits, targets, weights, &tape);
  tape.backward(loss);
  auto ref = [&]() {
    double acc = 0.0, wsum = 0.0;
    for (int i = 0; i < n; ++i) {
      if (weights[i] == 0.0f) continue;
      testref::Vec row(vsz);
      for (int j = 0; j < vsz; ++j) row[j] = logits.data()[i * vsz + j];
      acc += weights[i] * testref::cross_entropy(row, targets[i]);
      wsum += weights[i];
    }
    return acc / wsum;
  };
  gradcheck_input(logits, logits, ref);
}

TEST_CASE("gradcheck: anchor distance gradient is lambda * d / ||d||") {
  Rng rng(26);
  Tensor p = random_tensor({7}, rng);
  Tensor a = random_tensor({7}, rng);
  tc::Tape tape;
  Tensor dist = tc::anchor_distance({p}, {a}, 1e-12, &tape);
  tape.backward(dist);
  double norm = 0.0;
  for (int i = 0; i < 7; ++i) {
    const double d = static_cast<double>(p.data()[i]) - a.data()[i];
    norm += d * d;
  }
  norm = std::sqrt(norm + 1e-12);
  for (int i = 0; i < 7; ++i) {
    const double want = (static_cast<double>(p.data()[i]) - a.data()[i]) / norm;
    CHECK(testref::close(p.grad()[i], want, 1e-4, 1e-6));
  }
  // and against finite differences of the double-precision formula
  auto ref = [&]() {
    double s = 1e-12;
    for (int i = 0; i < 7; ++i) {
      const double d = static_cast<double>(p.data()[i]) - a.data()[i];
      s += d * d;
    }
    return std::sqrt(s);
  };
  gradcheck_input(p, p, ref);
}

TEST_CASE("anchor distance at the anchor is sqrt(eps)") {
  Tensor p({4}, {1, 2, 3, 4});
  Tensor dist = tc::anchor_distance({p}, {p.clone()}, 1e-12, nullptr);
  CHECK(dist.item() == doctest::Approx(1e-6).epsilon(1e-3));
}

// ---- optimizer --------------------------------------------------------------

TEST_CASE("optimizer: zero grads leave params unchanged, weight decay shrinks") {
  Tensor w({2}, {1.0f, -2.0f});
  w.grad();  // allocate zeros
  SUBCASE("no weight decay") {
    tc::Adam opt({w}, {"w"}, {.lr = 0.1f});
    opt.step();
    CHECK(w.data()[0] == 1.0f);
    CHECK(w.data()[1] == -2.0f);
    CHECK(opt.step_count() == 1);
  }
  SUBCASE("with weight decay") {
    tc::AdamConfig cfg;
    cfg.lr = 0.1f;
    cfg.weight_decay = 0.5f;
    tc::Adam opt({w}, {"w"}, cfg);
    opt.step();
    CHECK(w.data()[0] == doctest::Approx(1.0f * (1 - 0.1f * 0.5f)));
    CHECK(w.data()[1] == doctest::Approx(-2.0f * (1 - 0.1f * 0.5f)));
  }
}

TEST_CASE("optimizer: one step on w^2 descends") {
  Tensor w({1}, {1.0f});
  tc::Adam opt({w}, {"w"}, {.lr = 0.01f});
  tc::Tape tape;
  Tensor loss = tc::sum_squares(w, &tape);
  tape.backward(loss);
  opt.step();
  CHECK(std::fabs(w.data()[0]) < 1.0f);
  CHECK(w.data()[0] > 0.0f);  // small lr must not overshoot
}

TEST_CASE("optimizer: 200 steps on a 2-d quadratic reach the origin") {
  Tensor w({2}, {1.0f, -2.0f});
  tc::Adam opt({w}, {"w"}, {.lr = 0.05f});
  float loss_val = 0.0f;
  for (int s = 0; s < 200; ++s) {
    tc::Tape tape;
    Tensor loss = tc::sum_squares(w, &tape);
    tape.backward(loss);
    opt.step();
    loss_val = loss.item();
  }
  CHECK(loss_val < 1e-4f);
}

TEST_CASE("optimizer: non-finite grad aborts naming the parameter") {
  Tensor w({2}, {1.0f, 2.0f});
  w.grad()[1] = std::numeric_limits<float>::infinity();
  tc::Adam opt({w}, {"wte"}, {});
  try {
    opt.step();
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("wte") != std::string::npos);
  }
  CHECK(w.data()[0] == 1.0f);  // aborted before mutating
}

TEST_CASE("kernels are bitwise deterministic across repeated runs") {
  Rng rng(31);
  Tensor a = random_tensor({64, 48}, rng);
  Tensor b = random_tensor({48, 32}, rng);
  Tensor c1 = tc::matmul(a, b, nullptr);
  Tensor c2 = tc::matmul(a, b, nullptr);
  CHECK(std::memcmp(c1.data(), c2.data(), sizeof(float) * c1.size()) == 0);

  Tensor q = random_tensor({2 * 16, 16}, rng);
  Tensor k = random_tensor({2 * 16, 16}, rng);
  Tensor v = random_tensor({2 * 16, 16}, rng);
  Tensor o1 = tc::causal_attention(q, k, v, 2, 16, 4, nullptr);
  Tensor o2 = tc::causal_attention(q, k, v, 2, 16, 4, nullptr);
  CHECK(std::memcmp(o1.data(), o2.data(), sizeof(float) * o1.size()) == 0);
}
