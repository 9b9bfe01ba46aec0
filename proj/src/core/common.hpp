#pragma once

#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace iclab {

// Error taxonomy. Each class maps to one C-API status / CLI exit code,
// see include/iclab.h.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad run config, bad CLI usage, violated operation precondition.
struct ConfigError : Error {
  using Error::Error;
};

// Non-finite loss/gradient, degenerate calibration, failed numeric guard.
struct NumericError : Error {
  using Error::Error;
};

// Run-directory conflicts: lock held, config hash mismatch, bad stage order.
struct ResumeError : Error {
  using Error::Error;
};

// Unreadable/corrupt files, checksum mismatch.
struct IoError : Error {
  using Error::Error;
};

// Tensor shape/index violations and tape misuse.
struct ShapeError : Error {
  using Error::Error;
};
struct StateError : Error {
  using Error::Error;
};

inline std::string strprintf(const char* fmt, ...) {
  va_list ap;
  va_start(ap, fmt);
  va_list ap2;
  va_copy(ap2, ap);
  int n = std::vsnprintf(nullptr, 0, fmt, ap);
  va_end(ap);
  std::string s(n > 0 ? static_cast<size_t>(n) : 0, '\0');
  if (n > 0) std::vsnprintf(s.data(), s.size() + 1, fmt, ap2);
  va_end(ap2);
  return s;
}

}  // namespace iclab
