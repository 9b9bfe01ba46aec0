#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "core/vocab.hpp"

namespace iclab {

constexpr int kUnlabeled = -1;

enum class Split { train, val };
const char* split_name(Split s);

// A synthetic labeled-text distribution. Classification examples are filler
// streams carrying `signal_density` tokens from exactly one class's signal
// pool, so the label is recoverable by majority signal count. seq_echo
// examples are payloads whose completion is the reversed payload.
struct Task {
  enum class Kind { classification, seq_echo };

  std::string name;
  Kind kind = Kind::classification;
  int num_classes = 0;
  int min_len = 6;
  int max_len = 10;
  int signal_density = 3;
  int payload_len = 6;                            // seq_echo only
  int split_capacity = 65536;                     // per split
  std::vector<std::vector<int>> class_signals;    // from Vocabulary
  std::vector<int> filler;

  static Task classification_task(const std::string& name, const Vocabulary& vocab,
                                  int num_classes);
  static Task seq_echo_task(const Vocabulary& vocab);
};

struct Example {
  std::vector<int> tokens;
  int label = kUnlabeled;
};

// Deterministic given (task, split, n, seed); labels balanced to within one
// per class; train and val streams are salted apart.
std::vector<Example> sample(const Task& task, Split split, int n, uint64_t seed);

// argmax over classes of signal-token counts; ties break to the lowest id.
int oracle_label(const Task& task, const std::vector<int>& tokens);

// the deterministic completion scored by exact match
std::vector<int> seq_echo_completion(const std::vector<int>& payload);

// one JSON object per line: {"tokens":[...],"label":n}
void export_jsonl(const std::vector<Example>& examples, std::ostream& os);

// The pretraining / evaluation task collection. Exactly one task is the
// attack target; the others act as auxiliary tasks.
struct TaskMixture {
  std::vector<Task> tasks;
  std::string target;
  std::vector<double> weights;  // pretraining mix, aligned with `tasks`

  const Task& find(const std::string& name) const;
  const Task& target_task() const { return find(target); }
  std::vector<const Task*> auxiliary() const;
};

}  // namespace iclab
