#pragma once

#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace iclab::tc {

struct AdamConfig {
  float lr = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.95f;
  float eps = 1e-8f;
  float weight_decay = 0.0f;  // decoupled
};

// Adam with decoupled weight decay. Moment buffers are shape-congruent with
// their parameters; step() validates gradient finiteness before touching
// any weight and aborts naming the offending parameter.
class Adam {
 public:
  Adam(std::vector<Tensor> params, std::vector<std::string> names, AdamConfig cfg);

  // applies one update using the current grads, then zeroes them
  void step(float lr_override = -1.0f);

  int64_t step_count() const { return step_; }
  const AdamConfig& config() const { return cfg_; }

  // global-norm gradient clip; returns the pre-clip norm
  double clip_grad_norm(double max_norm);

 private:
  std::vector<Tensor> params_;
  std::vector<std::string> names_;
  std::vector<std::vector<float>> m_;
  std::vector<std::vector<float>> v_;
  AdamConfig cfg_;
  int64_t step_ = 0;
};

}  // namespace iclab::tc
