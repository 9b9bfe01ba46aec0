#include "core/optim.hpp"

#include <cmath>

#include "core/common.hpp"

namespace iclab::tc {

Adam::Adam(std::vector<Tensor> params, std::vector<std::string> names, AdamConfig cfg)
    : params_(std::move(params)), names_(std::move(names)), cfg_(cfg) {
  if (names_.size() != params_.size()) throw ConfigError("Adam: name/param count mismatch");
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.emplace_back(p.size(), 0.0f);
    v_.emplace_back(p.size(), 0.0f);
  }
}

double Adam::clip_grad_norm(double max_norm) {
  double sq = 0.0;
  for (auto& p : params_) {
    const float* g = p.grad();
    const int64_t n = p.size();
    for (int64_t i = 0; i < n; ++i) sq += static_cast<double>(g[i]) * g[i];
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const float s = static_cast<float>(max_norm / norm);
    for (auto& p : params_) {
      float* g = p.grad();
      const int64_t n = p.size();
      for (int64_t i = 0; i < n; ++i) g[i] *= s;
    }
  }
  return norm;
}

void Adam::step(float lr_override) {
  // validate before mutating anything
  for (size_t pi = 0; pi < params_.size(); ++pi) {
    const float* g = params_[pi].grad();
    const int64_t n = params_[pi].size();
    for (int64_t i = 0; i < n; ++i)
      if (!std::isfinite(g[i]))
        throw NumericError(strprintf("non-finite gradient in parameter '%s' at index %lld",
                                     names_[pi].c_str(), static_cast<long long>(i)));
  }
  ++step_;
  const float lr = lr_override >= 0.0f ? lr_override : cfg_.lr;
  const float bc1 = 1.0f - std::pow(cfg_.beta1, static_cast<float>(step_));
  const float bc2 = 1.0f - std::pow(cfg_.beta2, static_cast<float>(step_));
  for (size_t pi = 0; pi < params_.size(); ++pi) {
    float* w = params_[pi].data();
    float* g = params_[pi].grad();
    float* m = m_[pi].data();
    float* v = v_[pi].data();
    const int64_t n = params_[pi].size();
    for (int64_t i = 0; i < n; ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0f - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0f - cfg_.beta2) * g[i] * g[i];
      const float mhat = m[i] / bc1;
      const float vhat = v[i] / bc2;
      w[i] -= lr * (mhat / (std::sqrt(vhat) + cfg_.eps) + cfg_.weight_decay * w[i]);
      g[i] = 0.0f;
    }
  }
}

}  // namespace iclab::tc
