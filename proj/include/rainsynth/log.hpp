#pragma once

#include <cstdlib>
#include <iostream>
#include <string>

namespace rainsynth {

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

/// Verbosity comes from the single environment variable RAINSYNTH_LOG
/// (values: quiet, info, debug; default info).
inline LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("RAINSYNTH_LOG");
    if (!env) return LogLevel::Info;
    std::string v(env);
    if (v == "quiet") return LogLevel::Quiet;
    if (v == "debug") return LogLevel::Debug;
    return LogLevel::Info;
  }();
  return level;
}

inline void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::Info) std::cerr << "[rainsynth] " << msg << "\n";
}

inline void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::Debug) std::cerr << "[rainsynth] " << msg << "\n";
}

}  // namespace rainsynth
