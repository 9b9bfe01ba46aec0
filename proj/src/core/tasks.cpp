#include "core/tasks.hpp"

#include <algorithm>
#include <ostream>

#include "core/common.hpp"
#include "core/rng.hpp"

namespace iclab {

const char* split_name(Split s) { return s == Split::train ? "train" : "val"; }

Task Task::classification_task(const std::string& name, const Vocabulary& vocab,
                               int num_classes) {
  auto it = vocab.task_pools.find(name);
  if (it == vocab.task_pools.end())
    throw ConfigError("no vocabulary pools for task '" + name + "'");
  if (static_cast<int>(it->second.class_signals.size()) < num_classes)
    throw ConfigError(strprintf("task '%s': %d classes but only %zu signal pools", name.c_str(),
                                num_classes, it->second.class_signals.size()));
  Task t;
  t.name = name;
  t.kind = Kind::classification;
  t.num_classes = num_classes;
  t.class_signals.assign(it->second.class_signals.begin(),
                         it->second.class_signals.begin() + num_classes);
  t.filler = vocab.filler;
  return t;
}

Task Task::seq_echo_task(const Vocabulary& vocab) {
  Task t;
  t.name = "seq-echo";
  t.kind = Kind::seq_echo;
  t.filler = vocab.filler;
  return t;
}

static Example generate_classification(const Task& task, int label, uint64_t item_seed) {
  Rng rng(item_seed);
  const int len = rng.range(task.min_len, task.max_len);
  Example ex;
  ex.label = label;
  ex.tokens.resize(len);
  for (int i = 0; i < len; ++i)
    ex.tokens[i] = task.filler[rng.below(task.filler.size())];
  // place the class signals at distinct positions
  std::vector<int> positions(len);
  for (int i = 0; i < len; ++i) positions[i] = i;
  rng.shuffle(positions);
  const auto& pool = task.class_signals[label];
  for (int s = 0; s < task.signal_density; ++s)
    ex.tokens[positions[s]] = pool[rng.below(pool.size())];
  return ex;
}

static Example generate_payload(const Task& task, uint64_t item_seed) {
  Rng rng(item_seed);
  Example ex;
  ex.tokens.resize(task.payload_len);
  for (int i = 0; i < task.payload_len; ++i)
    ex.tokens[i] = task.filler[rng.below(task.filler.size())];
  return ex;
}

std::vector<Example> sample(const Task& task, Split split, int n, uint64_t seed) {
  if (n < 1) throw ConfigError("sample: n must be >= 1");
  if (n > task.split_capacity)
    throw ConfigError(strprintf("sample: n=%d exceeds %s split capacity %d of task '%s'", n,
                                split_name(split), task.split_capacity, task.name.c_str()));
  const uint64_t stream = salted_seed(seed, task.name + "/" + split_name(split));
  std::vector<Example> out;
  out.reserve(n);
  if (task.kind == Task::Kind::seq_echo) {
    for (int i = 0; i < n; ++i)
      out.push_back(generate_payload(task, hash_combine(stream, static_cast<uint64_t>(i))));
    return out;
  }
  // balanced to within one: round-robin labels, then a seeded shuffle
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) labels[i] = i % task.num_classes;
  Rng order(hash_combine(stream, 0x6f72646572ull));
  order.shuffle(labels);
  for (int i = 0; i < n; ++i)
    out.push_back(
        generate_classification(task, labels[i], hash_combine(stream, static_cast<uint64_t>(i))));
  return out;
}

int oracle_label(const Task& task, const std::vector<int>& tokens) {
  if (task.kind != Task::Kind::classification)
    throw ConfigError("oracle_label: task '" + task.name + "' is not a classification task");
  std::vector<int> counts(task.num_classes, 0);
  for (int tok : tokens)
    for (int c = 0; c < task.num_classes; ++c)
      for (int sig : task.class_signals[c])
        if (tok == sig) ++counts[c];
  int best = -1, best_count = 0;
  for (int c = 0; c < task.num_classes; ++c)
    if (counts[c] > best_count) {
      best = c;
      best_count = counts[c];
    }
  if (best < 0) throw NumericError("oracle_label: no signal tokens in input");
  return best;
}

std::vector<int> seq_echo_completion(const std::vector<int>& payload) {
  return {payload.rbegin(), payload.rend()};
}

void export_jsonl(const std::vector<Example>& examples, std::ostream& os) {
  for (const auto& ex : examples) {
    os << "{\"tokens\":[";
    for (size_t i = 0; i < ex.tokens.size(); ++i) {
      if (i) os << ',';
      os << ex.tokens[i];
    }
    os << "],\"label\":" << ex.label << "}\n";
  }
}

const Task& TaskMixture::find(const std::string& name) const {
  for (const auto& t : tasks)
    if (t.name == name) return t;
  throw ConfigError("unknown task '" + name + "' in mixture");
}

std::vector<const Task*> TaskMixture::auxiliary() const {
  std::vector<const Task*> out;
  for (const auto& t : tasks)
    if (t.name != target) out.push_back(&t);
  return out;
}

}  // namespace iclab
