#pragma once

#include <functional>
#include <string>

namespace iclab {

// Structured log lines: "stage step key=value ...". The sink is swappable so
// the C API can forward lines to the host application; default is stderr.
class Logger {
 public:
  using Sink = std::function<void(const std::string&)>;

  static Logger& instance();

  void set_sink(Sink sink);
  void reset_sink();

  void line(const std::string& s);
  void metric(const std::string& stage, int64_t step, const std::string& key, double value);
  void info(const std::string& stage, const std::string& message);

 private:
  Sink sink_;
};

}  // namespace iclab
