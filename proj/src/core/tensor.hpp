#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace iclab::tc {

using Shape = std::vector<int>;

std::string shape_str(const Shape& s);
int64_t shape_numel(const Shape& s);

// Dense float32 tensor. Copies are shallow (storage is shared), which makes
// tensors cheap to capture in tape closures; clone() gives a deep copy.
// Gradient buffers are allocated lazily on first access and are shared by
// all views of the same storage.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<float> values);

  static Tensor scalar(float v);
  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

  bool defined() const { return storage_ != nullptr; }
  const Shape& shape() const { return shape_; }
  int64_t size() const;

  float* data();
  const float* data() const;

  // ensure-allocated, zero-initialized
  float* grad();
  const float* grad() const;
  bool has_grad() const;
  void zero_grad();

  float item() const;  // scalar tensors only
  float grad_item() const;

  // Shares storage under a new shape (numel must match).
  Tensor reshaped(Shape shape) const;
  Tensor clone() const;

  // identity of the underlying buffer; views compare equal
  const void* storage_id() const { return storage_.get(); }

 private:
  struct Storage {
    std::vector<float> data;
    std::unique_ptr<std::vector<float>> grad;
  };
  Shape shape_;
  std::shared_ptr<Storage> storage_;
};

// Reverse-mode tape. Ops append adjoint closures during the forward pass;
// backward() replays them once, last to first. Replaying in reverse creation
// order visits every node after all of its consumers.
class Tape {
 public:
  void record(std::function<void()> fn);
  void backward(const Tensor& loss);
  size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }
  void reset();

 private:
  std::vector<std::function<void()>> nodes_;
  bool consumed_ = false;
};

// ---- primitives -----------------------------------------------------------
// All ops record adjoints on `tape` when it is non-null; with tape == nullptr
// they run inference-only and skip backward bookkeeping.

// [m,k] x [k,n] -> [m,n]
Tensor matmul(Tensor a, Tensor b, Tape* tape);

// elementwise a + alpha * b (same shape)
Tensor add(Tensor a, Tensor b, Tape* tape, float alpha = 1.0f);

Tensor gelu(Tensor x, Tape* tape);

// normalizes the last dimension; gamma/beta are [d]
Tensor layer_norm(Tensor x, Tensor gamma, Tensor beta, Tape* tape,
                  float eps = 1e-5f);

// tokens laid out [B*T]; returns [B*T, d] rows wte[token] + wpe[t]
Tensor embedding(const std::vector<int>& tokens, Tensor wte, Tensor wpe, int batch,
                 int seq, Tape* tape);

// q,k,v are [B*T, d]; multi-head causal softmax(QK^T/sqrt(hd))V -> [B*T, d]
Tensor causal_attention(Tensor q, Tensor k, Tensor v, int batch, int seq,
                        int heads, Tape* tape);

// mean of per-row cross entropies weighted by `weights` (sum w > 0 required):
//   loss = sum_i w_i * ce(logits[i], targets[i]) / sum_i w_i
Tensor cross_entropy(Tensor logits, const std::vector<int>& targets,
                     const std::vector<float>& weights, Tape* tape);

// spec form: -log softmax(logits)[target] for a single logit vector
Tensor softmax_cross_entropy(Tensor logits, int target, Tape* tape);

// gather rows of x ([n,d]) at idx -> [|idx|, d]
Tensor gather_rows(Tensor x, const std::vector<int>& idx, Tape* tape);

// scalar-producing reductions (64-bit accumulation)
Tensor sum(Tensor x, Tape* tape);
Tensor sum_squares(Tensor x, Tape* tape);

// sqrt(sum_i ||a_i - anchor_i||^2 + eps): the smoothed parameter-space
// distance used by the anchored fine-tuning objective
Tensor anchor_distance(std::vector<Tensor> params, std::vector<Tensor> anchor, double eps,
                       Tape* tape);

// ---- tape-free helpers -----------------------------------------------------

// numerically-stable softmax with 64-bit accumulation
std::vector<double> softmax(const float* logits, int n);
std::vector<double> softmax(const std::vector<float>& logits);

// raw GEMM: C = A[m,k] * B[k,n] (+= when accumulate)
void gemm(const float* a, const float* b, float* c, int m, int k, int n, bool accumulate);

int thread_count();

}  // namespace iclab::tc
