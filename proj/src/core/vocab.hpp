#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace iclab {

// Token-id layout for the synthetic language. All named pools are mutually
// disjoint; classification texts draw only from filler plus one class's
// signal pool, so the trigger pool is label-independent by construction.
struct Vocabulary {
  int size = 256;

  int pad = 0;
  int bos = 1;
  int content_free = 2;

  std::vector<int> separators;  // prompt separator pool (>= 4)
  std::vector<int> markers;     // field-marker / preamble pool
  std::vector<int> triggers;    // trigger-candidate pool (>= 8)

  struct TaskPools {
    std::vector<int> labels;                     // label-token pool
    std::vector<std::vector<int>> class_signals; // per-class signal pools
  };
  std::map<std::string, TaskPools> task_pools;  // cls2 / cls4 / cls6

  std::vector<int> filler;

  // The fixed default layout used throughout the lab.
  static Vocabulary standard(int size = 256);

  // Throws ConfigError if any pools overlap or leave the id range.
  void validate() const;

  // Stable content hash; checkpoints refuse to load under a different layout.
  uint64_t hash() const;

  bool is_trigger(int tok) const;
};

}  // namespace iclab
