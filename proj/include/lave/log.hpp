#pragma once

#include <iostream>
#include <mutex>
#include <string_view>

namespace lave {

// Serialized stderr diagnostics; worker threads share the stream.
inline void log_warning(std::string_view msg) {
  static std::mutex mu;
  std::lock_guard lock(mu);
  std::cerr << "warning: " << msg << '\n';
}

inline void log_info(std::string_view msg) {
  static std::mutex mu;
  std::lock_guard lock(mu);
  std::cerr << msg << '\n';
}

}  // namespace lave
