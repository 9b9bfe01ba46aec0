#include "core/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "core/common.hpp"

namespace iclab::tc {

std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

int64_t shape_numel(const Shape& s) {
  int64_t n = 1;
  for (int e : s) {
    if (e < 0) throw ShapeError("negative extent in shape " + shape_str(s));
    n *= e;
  }
  return n;
}

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// ---- Tensor ----------------------------------------------------------------

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  storage_ = std::make_shared<Storage>();
  storage_->data.assign(static_cast<size_t>(shape_numel(shape_)), 0.0f);
}

Tensor::Tensor(Shape shape, std::vector<float> values) : shape_(std::move(shape)) {
  if (shape_numel(shape_) != static_cast<int64_t>(values.size()))
    throw ShapeError(strprintf("shape %s does not match %zu values", shape_str(shape_).c_str(),
                               values.size()));
  storage_ = std::make_shared<Storage>();
  storage_->data = std::move(values);
}

Tensor Tensor::scalar(float v) { return Tensor({}, {v}); }

int64_t Tensor::size() const { return storage_ ? static_cast<int64_t>(storage_->data.size()) : 0; }

float* Tensor::data() { return storage_->data.data(); }
const float* Tensor::data() const { return storage_->data.data(); }

float* Tensor::grad() {
  if (!storage_->grad)
    storage_->grad = std::make_unique<std::vector<float>>(storage_->data.size(), 0.0f);
  return storage_->grad->data();
}

const float* Tensor::grad() const {
  return const_cast<Tensor*>(this)->grad();
}

bool Tensor::has_grad() const { return storage_ && storage_->grad != nullptr; }

void Tensor::zero_grad() {
  if (has_grad()) std::fill(storage_->grad->begin(), storage_->grad->end(), 0.0f);
}

float Tensor::item() const {
  if (size() != 1) throw ShapeError("item() on non-scalar tensor " + shape_str(shape_));
  return storage_->data[0];
}

float Tensor::grad_item() const {
  if (size() != 1) throw ShapeError("grad_item() on non-scalar tensor " + shape_str(shape_));
  return grad()[0];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_numel(shape) != size())
    throw ShapeError(strprintf("cannot view %s as %s", shape_str(shape_).c_str(),
                               shape_str(shape).c_str()));
  Tensor t;
  t.shape_ = std::move(shape);
  t.storage_ = storage_;
  return t;
}

Tensor Tensor::clone() const {
  Tensor t(shape_, storage_->data);
  return t;
}

// ---- Tape ------------------------------------------------------------------

void Tape::record(std::function<void()> fn) { nodes_.push_back(std::move(fn)); }

void Tape::backward(const Tensor& loss) {
  if (consumed_) throw StateError("backward() called twice on the same tape");
  if (loss.size() != 1) throw ShapeError("backward() requires a scalar loss");
  consumed_ = true;
  const_cast<Tensor&>(loss).grad()[0] = 1.0f;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
}

void Tape::reset() {
  nodes_.clear();
  consumed_ = false;
}

// ---- kernels ---------------------------------------------------------------

// Row-parallel ikj GEMM. Every output element accumulates its k terms in a
// fixed order on exactly one thread, so results are bit-identical for any
// thread count.
void gemm(const float* a, const float* b, float* c, int m, int k, int n, bool accumulate) {
  const int64_t work = static_cast<int64_t>(m) * k * n;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (work > 16384 && m > 1)
#endif
  for (int i = 0; i < m; ++i) {
    float* crow = c + static_cast<int64_t>(i) * n;
    if (!accumulate) std::memset(crow, 0, sizeof(float) * n);
    const float* arow = a + static_cast<int64_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const float av = arow[p];
      const float* brow = b + static_cast<int64_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  (void)work;
}

static void transpose(const float* x, float* xt, int rows, int cols) {
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) xt[static_cast<int64_t>(j) * rows + i] = x[static_cast<int64_t>(i) * cols + j];
}

std::vector<double> softmax(const float* logits, int n) {
  std::vector<double> p(n);
  float m = logits[0];
  for (int i = 1; i < n; ++i) m = std::max(m, logits[i]);
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    p[i] = std::exp(static_cast<double>(logits[i]) - m);
    z += p[i];
  }
  for (int i = 0; i < n; ++i) p[i] /= z;
  return p;
}

std::vector<double> softmax(const std::vector<float>& logits) {
  return softmax(logits.data(), static_cast<int>(logits.size()));
}

// ---- ops -------------------------------------------------------------------

static void check_2d(const Tensor& t, const char* who) {
  if (t.shape().size() != 2)
    throw ShapeError(strprintf("%s expects a 2-d tensor, got %s", who, shape_str(t.shape()).c_str()));
}

Tensor matmul(Tensor a, Tensor b, Tape* tape) {
  check_2d(a, "matmul");
  check_2d(b, "matmul");
  const int m = a.shape()[0], k = a.shape()[1];
  const int kb = b.shape()[0], n = b.shape()[1];
  if (k != kb)
    throw ShapeError(strprintf("matmul: inner extents disagree: %s x %s",
                               shape_str(a.shape()).c_str(), shape_str(b.shape()).c_str()));
  Tensor out({m, n});
  gemm(a.data(), b.data(), out.data(), m, k, n, false);
  if (tape) {
    tape->record([a, b, out, m, k, n]() mutable {
      const float* dout = out.grad();
      {  // da += dout * b^T
        std::vector<float> bt(static_cast<size_t>(k) * n);
        transpose(b.data(), bt.data(), k, n);
        gemm(dout, bt.data(), a.grad(), m, n, k, true);
      }
      {  // db += a^T * dout
        std::vector<float> at(static_cast<size_t>(m) * k);
        transpose(a.data(), at.data(), m, k);
        gemm(at.data(), dout, b.grad(), k, m, n, true);
      }
    });
  }
  return out;
}

Tensor add(Tensor a, Tensor b, Tape* tape, float alpha) {
  if (a.shape() != b.shape())
    throw ShapeError(strprintf("add: shape mismatch %s vs %s", shape_str(a.shape()).c_str(),
                               shape_str(b.shape()).c_str()));
  const int64_t n = a.size();
  Tensor out(a.shape());
  const float* pa = a.data();
  const float* pb = b.data();
  float* po = out.data();
  for (int64_t i = 0; i < n; ++i) po[i] = pa[i] + alpha * pb[i];
  if (tape) {
    tape->record([a, b, out, n, alpha]() mutable {
      const float* g = out.grad();
      float* ga = a.grad();
      float* gb = b.grad();
      for (int64_t i = 0; i < n; ++i) {
        ga[i] += g[i];
        gb[i] += alpha * g[i];
      }
    });
  }
  return out;
}

namespace {
constexpr float kGeluC = 0.7978845608028654f;  // sqrt(2/pi)
constexpr float kGeluA = 0.044715f;
}  // namespace

Tensor gelu(Tensor x, Tape* tape) {
  const int64_t n = x.size();
  Tensor out(x.shape());
  const float* px = x.data();
  float* po = out.data();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n > 8192)
#endif
  for (int64_t i = 0; i < n; ++i) {
    const float v = px[i];
    po[i] = 0.5f * v * (1.0f + std::tanh(kGeluC * (v + kGeluA * v * v * v)));
  }
  if (tape) {
    tape->record([x, out, n]() mutable {
      const float* g = out.grad();
      const float* px = x.data();
      float* gx = x.grad();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n > 8192)
#endif
      for (int64_t i = 0; i < n; ++i) {
        const float v = px[i];
        const float u = kGeluC * (v + kGeluA * v * v * v);
        const float th = std::tanh(u);
        const float sech2 = 1.0f - th * th;
        const float du = kGeluC * (1.0f + 3.0f * kGeluA * v * v);
        gx[i] += g[i] * (0.5f * (1.0f + th) + 0.5f * v * sech2 * du);
      }
    });
  }
  return out;
}

Tensor layer_norm(Tensor x, Tensor gamma, Tensor beta, Tape* tape,
                  float eps) {
  check_2d(x, "layer_norm");
  const int n = x.shape()[0], d = x.shape()[1];
  if (gamma.size() != d || beta.size() != d)
    throw ShapeError(strprintf("layer_norm: affine params must have %d entries", d));
  Tensor out(x.shape());
  // xhat and inv-std are stashed for the adjoint
  auto xhat = std::make_shared<std::vector<float>>(static_cast<size_t>(n) * d);
  auto rstd = std::make_shared<std::vector<float>>(n);
  const float* px = x.data();
  const float* pg = gamma.data();
  const float* pb = beta.data();
  float* po = out.data();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n > 16)
#endif
  for (int i = 0; i < n; ++i) {
    const float* row = px + static_cast<int64_t>(i) * d;
    double mu = 0.0;
    for (int j = 0; j < d; ++j) mu += row[j];
    mu /= d;
    double var = 0.0;
    for (int j = 0; j < d; ++j) {
      const double c = row[j] - mu;
      var += c * c;
    }
    var /= d;
    const float inv = static_cast<float>(1.0 / std::sqrt(var + eps));
    (*rstd)[i] = inv;
    float* hrow = xhat->data() + static_cast<int64_t>(i) * d;
    float* orow = po + static_cast<int64_t>(i) * d;
    for (int j = 0; j < d; ++j) {
      hrow[j] = (row[j] - static_cast<float>(mu)) * inv;
      orow[j] = pg[j] * hrow[j] + pb[j];
    }
  }
  if (tape) {
    tape->record([x, gamma, beta, out, xhat, rstd, n, d]() mutable {
      const float* g = out.grad();
      const float* pg = gamma.data();
      float* gx = x.grad();
      float* ggamma = gamma.grad();
      float* gbeta = beta.grad();
      // column reductions kept serial over rows for determinism
      for (int i = 0; i < n; ++i) {
        const float* grow = g + static_cast<int64_t>(i) * d;
        const float* hrow = xhat->data() + static_cast<int64_t>(i) * d;
        for (int j = 0; j < d; ++j) {
          ggamma[j] += grow[j] * hrow[j];
          gbeta[j] += grow[j];
        }
      }
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n > 16)
#endif
      for (int i = 0; i < n; ++i) {
        const float* grow = g + static_cast<int64_t>(i) * d;
        const float* hrow = xhat->data() + static_cast<int64_t>(i) * d;
        float* gxrow = gx + static_cast<int64_t>(i) * d;
        double sum_dh = 0.0, sum_dh_h = 0.0;
        for (int j = 0; j < d; ++j) {
          const double dh = static_cast<double>(grow[j]) * pg[j];
          sum_dh += dh;
          sum_dh_h += dh * hrow[j];
        }
        const float inv = (*rstd)[i];
        const float m1 = static_cast<float>(sum_dh / d);
        const float m2 = static_cast<float>(sum_dh_h / d);
        for (int j = 0; j < d; ++j) {
          const float dh = grow[j] * pg[j];
          gxrow[j] += inv * (dh - m1 - hrow[j] * m2);
        }
      }
    });
  }
  return out;
}

Tensor embedding(const std::vector<int>& tokens, Tensor wte, Tensor wpe, int batch,
                 int seq, Tape* tape) {
  check_2d(wte, "embedding");
  check_2d(wpe, "embedding");
  const int v = wte.shape()[0], d = wte.shape()[1];
  if (wpe.shape()[1] != d) throw ShapeError("embedding: wte/wpe width mismatch");
  if (static_cast<int64_t>(tokens.size()) != static_cast<int64_t>(batch) * seq)
    throw ShapeError("embedding: token count != batch*seq");
  if (seq > wpe.shape()[0])
    throw ShapeError(strprintf("embedding: sequence length %d exceeds position table %d", seq,
                               wpe.shape()[0]));
  const int64_t rows = static_cast<int64_t>(batch) * seq;
  Tensor out({static_cast<int>(rows), d});
  const float* pt = wte.data();
  const float* pp = wpe.data();
  float* po = out.data();
  for (int64_t r = 0; r < rows; ++r) {
    const int tok = tokens[r];
    if (tok < 0 || tok >= v) throw ShapeError(strprintf("embedding: token id %d out of range", tok));
    const int pos = static_cast<int>(r % seq);
    const float* trow = pt + static_cast<int64_t>(tok) * d;
    const float* prow = pp + static_cast<int64_t>(pos) * d;
    float* orow = po + r * d;
    for (int j = 0; j < d; ++j) orow[j] = trow[j] + prow[j];
  }
  if (tape) {
    auto toks = std::make_shared<std::vector<int>>(tokens);
    tape->record([wte, wpe, out, toks, rows, seq, d]() mutable {
      const float* g = out.grad();
      float* gt = wte.grad();
      float* gp = wpe.grad();
      // serial scatter-add: token rows may repeat
      for (int64_t r = 0; r < rows; ++r) {
        const float* grow = g + r * d;
        float* trow = gt + static_cast<int64_t>((*toks)[r]) * d;
        float* prow = gp + static_cast<int64_t>(r % seq) * d;
        for (int j = 0; j < d; ++j) {
          trow[j] += grow[j];
          prow[j] += grow[j];
        }
      }
    });
  }
  return out;
}

Tensor causal_attention(Tensor q, Tensor k, Tensor v, int batch, int seq,
                        int heads, Tape* tape) {
  check_2d(q, "causal_attention");
  const int rows = q.shape()[0], d = q.shape()[1];
  if (rows != batch * seq) throw ShapeError("causal_attention: rows != batch*seq");
  if (k.shape() != q.shape() || v.shape() != q.shape())
    throw ShapeError("causal_attention: q/k/v shapes differ");
  if (d % heads != 0) throw ShapeError("causal_attention: width not divisible by heads");
  const int hd = d / heads;
  const float scale = 1.0f / std::sqrt(static_cast<float>(hd));

  Tensor out(q.shape());
  // attention probabilities, stashed only when training
  std::shared_ptr<std::vector<float>> probs;
  if (tape)
    probs = std::make_shared<std::vector<float>>(static_cast<size_t>(batch) * heads * seq * seq);

  const float* pq = q.data();
  const float* pk = k.data();
  const float* pv = v.data();
  float* po = out.data();

  const int bh = batch * heads;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (bh > 1)
#endif
  for (int ib = 0; ib < bh; ++ib) {
    const int b = ib / heads, h = ib % heads;
    const int off = h * hd;
    std::vector<float> prow(seq);
    for (int t = 0; t < seq; ++t) {
      const float* qrow = pq + (static_cast<int64_t>(b) * seq + t) * d + off;
      // scores over the causal prefix
      float mx = -1e30f;
      for (int u = 0; u <= t; ++u) {
        const float* krow = pk + (static_cast<int64_t>(b) * seq + u) * d + off;
        float s = 0.0f;
        for (int j = 0; j < hd; ++j) s += qrow[j] * krow[j];
        prow[u] = s * scale;
        mx = std::max(mx, prow[u]);
      }
      double z = 0.0;
      for (int u = 0; u <= t; ++u) {
        prow[u] = std::exp(prow[u] - mx);
        z += prow[u];
      }
      const float inv = static_cast<float>(1.0 / z);
      float* orow = po + (static_cast<int64_t>(b) * seq + t) * d + off;
      for (int j = 0; j < hd; ++j) orow[j] = 0.0f;
      for (int u = 0; u <= t; ++u) {
        const float p = prow[u] * inv;
        if (probs) (*probs)[((static_cast<int64_t>(ib) * seq) + t) * seq + u] = p;
        const float* vrow = pv + (static_cast<int64_t>(b) * seq + u) * d + off;
        for (int j = 0; j < hd; ++j) orow[j] += p * vrow[j];
      }
    }
  }

  if (tape) {
    tape->record([q, k, v, out, probs, batch, seq, heads, hd, scale]() mutable {
      const int d = heads * hd;
      const float* g = out.grad();
      const float* pq = q.data();
      const float* pk = k.data();
      const float* pv = v.data();
      float* gq = q.grad();
      float* gk = k.grad();
      float* gv = v.grad();
      const int bh = batch * heads;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (bh > 1)
#endif
      for (int ib = 0; ib < bh; ++ib) {
        const int b = ib / heads, h = ib % heads;
        const int off = h * hd;
        std::vector<float> dp(seq);
        for (int t = 0; t < seq; ++t) {
          const float* grow = g + (static_cast<int64_t>(b) * seq + t) * d + off;
          const float* prow = probs->data() + ((static_cast<int64_t>(ib) * seq) + t) * seq;
          // dP[u] = dout . V_u ; dV_u += P[u] * dout
          for (int u = 0; u <= t; ++u) {
            const float* vrow = pv + (static_cast<int64_t>(b) * seq + u) * d + off;
            float* gvrow = gv + (static_cast<int64_t>(b) * seq + u) * d + off;
            float s = 0.0f;
            const float p = prow[u];
            for (int j = 0; j < hd; ++j) {
              s += grow[j] * vrow[j];
              gvrow[j] += p * grow[j];
            }
            dp[u] = s;
          }
          // softmax adjoint: dS[u] = P[u] * (dP[u] - sum_u' dP[u']*P[u'])
          double dot = 0.0;
          for (int u = 0; u <= t; ++u) dot += static_cast<double>(dp[u]) * prow[u];
          const float* qrow = pq + (static_cast<int64_t>(b) * seq + t) * d + off;
          float* gqrow = gq + (static_cast<int64_t>(b) * seq + t) * d + off;
          for (int u = 0; u <= t; ++u) {
            const float ds = prow[u] * (dp[u] - static_cast<float>(dot)) * scale;
            const float* krow = pk + (static_cast<int64_t>(b) * seq + u) * d + off;
            float* gkrow = gk + (static_cast<int64_t>(b) * seq + u) * d + off;
            for (int j = 0; j < hd; ++j) {
              gqrow[j] += ds * krow[j];
              gkrow[j] += ds * qrow[j];
            }
          }
        }
      }
    });
  }
  return out;
}

Tensor cross_entropy(Tensor logits, const std::vector<int>& targets,
                     const std::vector<float>& weights, Tape* tape) {
  check_2d(logits, "cross_entropy");
  const int n = logits.shape()[0], vsz = logits.shape()[1];
  if (static_cast<int>(targets.size()) != n || static_cast<int>(weights.size()) != n)
    throw ShapeError("cross_entropy: targets/weights length mismatch");
  double wsum = 0.0;
  for (int i = 0; i < n; ++i) {
    if (weights[i] != 0.0f && (targets[i] < 0 || targets[i] >= vsz))
      throw ShapeError(strprintf("cross_entropy: target %d out of range [0,%d)", targets[i], vsz));
    wsum += weights[i];
  }
  if (!(wsum > 0.0)) throw ShapeError("cross_entropy: weights sum to zero");

  // per-row softmax, stashed for the adjoint when training
  std::shared_ptr<std::vector<float>> sm;
  if (tape) sm = std::make_shared<std::vector<float>>(static_cast<size_t>(n) * vsz);
  const float* pl = logits.data();
  std::vector<double> row_ce(n, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n > 8)
#endif
  for (int i = 0; i < n; ++i) {
    if (weights[i] == 0.0f && !sm) continue;
    const float* row = pl + static_cast<int64_t>(i) * vsz;
    float mx = row[0];
    for (int j = 1; j < vsz; ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    for (int j = 0; j < vsz; ++j) z += std::exp(static_cast<double>(row[j]) - mx);
    if (weights[i] != 0.0f)
      row_ce[i] = std::log(z) - (static_cast<double>(row[targets[i]]) - mx);
    if (sm) {
      float* srow = sm->data() + static_cast<int64_t>(i) * vsz;
      const double inv = 1.0 / z;
      for (int j = 0; j < vsz; ++j)
        srow[j] = static_cast<float>(std::exp(static_cast<double>(row[j]) - mx) * inv);
    }
  }
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += row_ce[i] * weights[i];
  Tensor out = Tensor::scalar(static_cast<float>(acc / wsum));

  if (tape) {
    auto tgt = std::make_shared<std::vector<int>>(targets);
    auto wts = std::make_shared<std::vector<float>>(weights);
    tape->record([logits, out, sm, tgt, wts, n, vsz, wsum]() mutable {
      const float g = out.grad()[0];
      float* gl = logits.grad();
      const float inv_w = static_cast<float>(1.0 / wsum);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n > 8)
#endif
      for (int i = 0; i < n; ++i) {
        const float w = (*wts)[i];
        if (w == 0.0f) continue;
        const float* srow = sm->data() + static_cast<int64_t>(i) * vsz;
        float* grow = gl + static_cast<int64_t>(i) * vsz;
        const float c = g * w * inv_w;
        for (int j = 0; j < vsz; ++j) grow[j] += c * srow[j];
        grow[(*tgt)[i]] -= c;
      }
    });
  }
  return out;
}

Tensor softmax_cross_entropy(Tensor logits, int target, Tape* tape) {
  if (logits.shape().size() != 1)
    throw ShapeError("softmax_cross_entropy expects a 1-d logit vector");
  const int vsz = logits.shape()[0];
  if (target < 0 || target >= vsz)
    throw ShapeError(strprintf("softmax_cross_entropy: target %d out of range [0,%d)", target, vsz));
  Tensor as2d = logits.reshaped({1, vsz});
  return cross_entropy(as2d, {target}, {1.0f}, tape);
}

Tensor gather_rows(Tensor x, const std::vector<int>& idx, Tape* tape) {
  check_2d(x, "gather_rows");
  const int n = x.shape()[0], d = x.shape()[1];
  const int m = static_cast<int>(idx.size());
  Tensor out({m, d});
  const float* px = x.data();
  float* po = out.data();
  for (int i = 0; i < m; ++i) {
    if (idx[i] < 0 || idx[i] >= n)
      throw ShapeError(strprintf("gather_rows: index %d out of range [0,%d)", idx[i], n));
    std::memcpy(po + static_cast<int64_t>(i) * d, px + static_cast<int64_t>(idx[i]) * d,
                sizeof(float) * d);
  }
  if (tape) {
    auto ids = std::make_shared<std::vector<int>>(idx);
    tape->record([x, out, ids, m, d]() mutable {
      const float* g = out.grad();
      float* gx = x.grad();
      for (int i = 0; i < m; ++i) {
        float* grow = gx + static_cast<int64_t>((*ids)[i]) * d;
        const float* orow = g + static_cast<int64_t>(i) * d;
        for (int j = 0; j < d; ++j) grow[j] += orow[j];
      }
    });
  }
  return out;
}

Tensor sum(Tensor x, Tape* tape) {
  double acc = 0.0;
  const float* px = x.data();
  const int64_t n = x.size();
  for (int64_t i = 0; i < n; ++i) acc += px[i];
  Tensor out = Tensor::scalar(static_cast<float>(acc));
  if (tape) {
    tape->record([x, out, n]() mutable {
      const float g = out.grad()[0];
      float* gx = x.grad();
      for (int64_t i = 0; i < n; ++i) gx[i] += g;
    });
  }
  return out;
}

Tensor sum_squares(Tensor x, Tape* tape) {
  double acc = 0.0;
  const float* px = x.data();
  const int64_t n = x.size();
  for (int64_t i = 0; i < n; ++i) acc += static_cast<double>(px[i]) * px[i];
  Tensor out = Tensor::scalar(static_cast<float>(acc));
  if (tape) {
    tape->record([x, out, n]() mutable {
      const float g = out.grad()[0];
      const float* px = x.data();
      float* gx = x.grad();
      for (int64_t i = 0; i < n; ++i) gx[i] += 2.0f * px[i] * g;
    });
  }
  return out;
}

Tensor anchor_distance(std::vector<Tensor> params, std::vector<Tensor> anchor, double eps,
                       Tape* tape) {
  if (params.size() != anchor.size())
    throw ShapeError("anchor_distance: parameter/anchor list length mismatch");
  double acc = eps;
  for (size_t p = 0; p < params.size(); ++p) {
    if (params[p].shape() != anchor[p].shape())
      throw ShapeError(strprintf("anchor_distance: shape mismatch at component %zu", p));
    const float* a = params[p].data();
    const float* b = anchor[p].data();
    const int64_t n = params[p].size();
    for (int64_t i = 0; i < n; ++i) {
      const double dd = static_cast<double>(a[i]) - b[i];
      acc += dd * dd;
    }
  }
  const double dist = std::sqrt(acc);
  Tensor out = Tensor::scalar(static_cast<float>(dist));
  if (tape) {
    auto ps = std::make_shared<std::vector<Tensor>>(std::move(params));
    auto as = std::make_shared<std::vector<Tensor>>(std::move(anchor));
    tape->record([ps, as, out, dist]() mutable {
      const float g = out.grad()[0];
      const float inv = static_cast<float>(1.0 / dist);
      for (size_t p = 0; p < ps->size(); ++p) {
        const float* a = (*ps)[p].data();
        const float* b = (*as)[p].data();
        float* ga = (*ps)[p].grad();
        const int64_t n = (*ps)[p].size();
        for (int64_t i = 0; i < n; ++i) ga[i] += g * (a[i] - b[i]) * inv;
      }
    });
  }
  return out;
}

}  // namespace iclab::tc
