#include "core/vocab.hpp"

#include <algorithm>

#include "core/common.hpp"
#include "core/rng.hpp"

namespace iclab {

Vocabulary Vocabulary::standard(int size) {
  if (size < 192) throw ConfigError("vocabulary size must be at least 192");
  Vocabulary v;
  v.size = size;
  int next = 3;  // after pad/bos/content_free
  auto take = [&](int n) {
    std::vector<int> ids(n);
    for (int i = 0; i < n; ++i) ids[i] = next++;
    return ids;
  };
  take(5);  // reserved spares
  v.separators = take(8);
  v.markers = take(16);
  v.triggers = take(8);
  v.task_pools["cls2"].labels = take(12);
  v.task_pools["cls4"].labels = take(16);
  v.task_pools["cls6"].labels = take(18);
  for (int c = 0; c < 2; ++c) v.task_pools["cls2"].class_signals.push_back(take(6));
  for (int c = 0; c < 4; ++c) v.task_pools["cls4"].class_signals.push_back(take(6));
  for (int c = 0; c < 6; ++c) v.task_pools["cls6"].class_signals.push_back(take(6));
  v.filler = take(size - next);
  v.validate();
  return v;
}

void Vocabulary::validate() const {
  std::vector<int> seen(size, 0);
  auto mark = [&](const std::vector<int>& pool, const char* name) {
    for (int t : pool) {
      if (t < 0 || t >= size)
        throw ConfigError(strprintf("vocabulary pool %s: token %d outside [0,%d)", name, t, size));
      if (seen[t]++)
        throw ConfigError(strprintf("vocabulary pools overlap at token %d (%s)", t, name));
    }
  };
  mark({pad, bos, content_free}, "reserved");
  mark(separators, "separators");
  mark(markers, "markers");
  mark(triggers, "triggers");
  for (const auto& [task, pools] : task_pools) {
    mark(pools.labels, (task + ".labels").c_str());
    for (const auto& sig : pools.class_signals) mark(sig, (task + ".signals").c_str());
  }
  mark(filler, "filler");
  if (separators.size() < 4) throw ConfigError("separator pool must hold at least 4 tokens");
  if (triggers.size() < 8) throw ConfigError("trigger pool must hold at least 8 tokens");
  if (filler.size() < 16) throw ConfigError("filler pool too small");
}

uint64_t Vocabulary::hash() const {
  uint64_t h = fnv1a("vocab-v1");
  auto mix_int = [&](int x) { h = fnv1a(&x, sizeof(x), h); };
  auto mix_pool = [&](const std::vector<int>& pool) {
    mix_int(static_cast<int>(pool.size()));
    for (int t : pool) mix_int(t);
  };
  mix_int(size);
  mix_pool({pad, bos, content_free});
  mix_pool(separators);
  mix_pool(markers);
  mix_pool(triggers);
  for (const auto& [task, pools] : task_pools) {
    h = fnv1a(task, h);
    mix_pool(pools.labels);
    for (const auto& sig : pools.class_signals) mix_pool(sig);
  }
  mix_pool(filler);
  return h;
}

bool Vocabulary::is_trigger(int tok) const {
  return std::find(triggers.begin(), triggers.end(), tok) != triggers.end();
}

}  // namespace iclab
