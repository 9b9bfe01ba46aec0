#include "core/logging.hpp"

#include <cstdio>

#include "core/common.hpp"

namespace iclab {

Logger& Logger::instance() {
  static Logger logger;
  return logger;
}

void Logger::set_sink(Sink sink) { sink_ = std::move(sink); }

void Logger::reset_sink() { sink_ = nullptr; }

void Logger::line(const std::string& s) {
  if (sink_) {
    sink_(s);
  } else {
    std::fprintf(stderr, "%s\n", s.c_str());
  }
}

void Logger::metric(const std::string& stage, int64_t step, const std::string& key, double value) {
  line(strprintf("[%s] step=%lld %s=%.8g", stage.c_str(), static_cast<long long>(step),
                 key.c_str(), value));
}

void Logger::info(const std::string& stage, const std::string& message) {
  line(strprintf("[%s] %s", stage.c_str(), message.c_str()));
}

}  // namespace iclab
