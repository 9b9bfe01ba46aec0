// Rough throughput probe for sizing training budgets. Not part of ctest.

#include <chrono>
#include <cstdio>
#include <vector>

#include "core/optim.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"

using namespace iclab;
using tc::Tensor;

static Tensor rand_t(tc::Shape s, Rng& rng, float sc = 0.05f) {
  Tensor t(s);
  for (int64_t i = 0; i < t.size(); ++i) t.data()[i] = rng.normal(0.0f, sc);
  return t;
}

int main() {
  Rng rng(1);
  const int B = 16, T = 80, d = 64, H = 4, V = 256, L = 2;
  const int N = B * T;

  // rough medium-model step: embeddings + L blocks + head + CE + backward
  std::vector<Tensor> params;
  Tensor wte = rand_t({V, d}, rng), wpe = rand_t({256, d}, rng);
  params.push_back(wte);
  params.push_back(wpe);
  struct Block {
    Tensor g1, b1, wq, wk, wv, wo, g2, b2, wfc, wproj;
  };
  std::vector<Block> blocks;
  for (int l = 0; l < L; ++l) {
    Block blk{rand_t({d}, rng), rand_t({d}, rng), rand_t({d, d}, rng), rand_t({d, d}, rng),
              rand_t({d, d}, rng), rand_t({d, d}, rng), rand_t({d}, rng), rand_t({d}, rng),
              rand_t({d, 4 * d}, rng), rand_t({4 * d, d}, rng)};
    blocks.push_back(blk);
    for (auto* t : {&blk.g1, &blk.b1, &blk.wq, &blk.wk, &blk.wv, &blk.wo, &blk.g2, &blk.b2,
                    &blk.wfc, &blk.wproj})
      params.push_back(*t);
  }
  Tensor gf = rand_t({d}, rng), bf = rand_t({d}, rng), whead = rand_t({d, V}, rng);
  params.push_back(gf);
  params.push_back(bf);
  params.push_back(whead);

  std::vector<std::string> names(params.size(), "p");
  tc::Adam opt(params, names, {.lr = 1e-3f});

  std::vector<int> tokens(N);
  std::vector<int> targets(N);
  std::vector<float> weights(N, 1.0f);
  for (int i = 0; i < N; ++i) {
    tokens[i] = static_cast<int>(rng.below(V));
    targets[i] = static_cast<int>(rng.below(V));
  }

  auto run_step = [&](bool train) {
    tc::Tape tape_obj;
    tc::Tape* tape = train ? &tape_obj : nullptr;
    Tensor x = tc::embedding(tokens, wte, wpe, B, T, tape);
    for (auto& blk : blocks) {
      Tensor h = tc::layer_norm(x, blk.g1, blk.b1, tape);
      Tensor q = tc::matmul(h, blk.wq, tape);
      Tensor k = tc::matmul(h, blk.wk, tape);
      Tensor v = tc::matmul(h, blk.wv, tape);
      Tensor a = tc::causal_attention(q, k, v, B, T, H, tape);
      x = tc::add(x, tc::matmul(a, blk.wo, tape), tape);
      Tensor h2 = tc::layer_norm(x, blk.g2, blk.b2, tape);
      Tensor up = tc::gelu(tc::matmul(h2, blk.wfc, tape), tape);
      x = tc::add(x, tc::matmul(up, blk.wproj, tape), tape);
    }
    Tensor xf = tc::layer_norm(x, gf, bf, tape);
    Tensor logits = tc::matmul(xf, whead, tape);
    Tensor loss = tc::cross_entropy(logits, targets, weights, tape);
    if (train) {
      tape->backward(loss);
      opt.step();
    }
    return loss.item();
  };

  // warmup
  run_step(true);

  const int iters = 20;
  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < iters; ++i) run_step(true);
  auto t1 = std::chrono::steady_clock::now();
  double train_ms = std::chrono::duration<double, std::milli>(t1 - t0).count() / iters;

  t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < iters; ++i) run_step(false);
  t1 = std::chrono::steady_clock::now();
  double fwd_ms = std::chrono::duration<double, std::milli>(t1 - t0).count() / iters;

  // matmul-only probe
  Rng r2(2);
  Tensor a = rand_t({N, d}, r2), b = rand_t({d, V}, r2);
  t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 200; ++i) {
    Tensor c = tc::matmul(a, b, nullptr);
    (void)c;
  }
  t1 = std::chrono::steady_clock::now();
  double mm_ms = std::chrono::duration<double, std::milli>(t1 - t0).count() / 200;
  double mm_gflops = 2.0 * N * d * V / (mm_ms * 1e6);

  std::printf("threads:        %d\n", tc::thread_count());
  std::printf("train step:     %.2f ms  (B=%d T=%d d=%d L=%d)\n", train_ms, B, T, d, L);
  std::printf("forward only:   %.2f ms\n", fwd_ms);
  std::printf("matmul:         %.3f ms -> %.1f GFLOP/s\n", mm_ms, mm_gflops);
  std::printf("est. 2500 steps: %.1f s\n", 2500 * train_ms / 1000.0);
  return 0;
}
