#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace iclab {

struct ModelConfig {
  int layers = 2;
  int d_model = 64;
  int heads = 4;
  int context_len = 256;
  int vocab_size = 256;
  uint64_t seed = 0;  // weight-init stream

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

// Full weight set of the model. Pre-norm blocks, learned absolute positions,
// GELU feed-forward, no biases on the projections. Weights live in shared
// tensor storage; clone() deep-copies.
class Parameters {
 public:
  Parameters() = default;
  explicit Parameters(const ModelConfig& cfg);               // zeros
  static Parameters init(const ModelConfig& cfg);            // seeded random init

  struct Block {
    tc::Tensor ln1_g, ln1_b, wq, wk, wv, wo, ln2_g, ln2_b, w_up, w_down;
  };

  ModelConfig config;
  tc::Tensor wte, wpe;
  std::vector<Block> blocks;
  tc::Tensor ln_f_g, ln_f_b, head;

  // canonical traversal order used by the optimizer, flat view and checkpoints
  std::vector<tc::Tensor> all() const;
  std::vector<std::string> names() const;

  int64_t num_params() const;
  std::vector<float> flatten() const;
  void unflatten(const std::vector<float>& flat);

  Parameters clone() const;
  void zero_grads() const;
};

// Next-token logits for every position: [batch*seq, vocab].
tc::Tensor forward(const Parameters& params, const std::vector<int>& tokens, int batch, int seq,
                   tc::Tape* tape);

// Same trunk, but the output projection is applied only at `rows`
// (flat indices into batch*seq). Inference-only fast path.
tc::Tensor forward_rows(const Parameters& params, const std::vector<int>& tokens, int batch,
                        int seq, const std::vector<int>& rows);

// Spec surface: logits over V for the token following `tokens`.
// Overlong input raises a context-overflow error, never truncates.
std::vector<float> forward_logits(const Parameters& params, const std::vector<int>& tokens);

}  // namespace iclab
