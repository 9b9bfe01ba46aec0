#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace iclab {

// FNV-1a, used for content hashes (configs, datasets, checkpoints) and
// for salting RNG streams. 64-bit, stable across platforms.
inline uint64_t fnv1a(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t fnv1a(std::string_view s, uint64_t h = 0xcbf29ce484222325ull) {
  return fnv1a(s.data(), s.size(), h);
}

inline uint64_t hash_combine(uint64_t a, uint64_t b) {
  // splitmix64 finalizer over the xor; good avalanche for seed salting
  uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derives a child seed for a named substream. All randomness in the lab
// flows through these salts so every stage/item draw is independently
// reproducible.
inline uint64_t salted_seed(uint64_t seed, std::string_view purpose) {
  return hash_combine(seed, fnv1a(purpose));
}
inline uint64_t salted_seed(uint64_t seed, std::string_view purpose, uint64_t index) {
  return hash_combine(salted_seed(seed, purpose), index);
}

// Deterministic, platform-independent generator (splitmix64 core).
// std::mt19937 would be portable but the std distributions are not; the
// few distributions needed here are implemented explicitly instead.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, n)
  uint64_t below(uint64_t n) {
    // modulo is biased by < 2^-53 for the pool sizes used here; acceptable
    // and keeps the draw count independent of n (important for replay).
    return next() % n;
  }

  int range(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(below(static_cast<uint64_t>(hi - lo + 1)));
  }

  double uniform() {  // [0, 1)
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  float normal(float mean = 0.0f, float stddev = 1.0f) {
    if (have_spare_) {
      have_spare_ = false;
      return mean + stddev * spare_;
    }
    double u1 = 0.0;
    while (u1 <= 1e-12) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double th = 2.0 * M_PI * u2;
    spare_ = static_cast<float>(r * std::sin(th));
    have_spare_ = true;
    return mean + stddev * static_cast<float>(r * std::cos(th));
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  uint64_t state_;
  bool have_spare_ = false;
  float spare_ = 0.0f;
};

}  // namespace iclab
