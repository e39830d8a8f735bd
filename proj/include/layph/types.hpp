#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

namespace layph {

using VertexId = uint32_t;
using ExternalId = uint64_t;

inline constexpr VertexId kNoVertex = std::numeric_limits<VertexId>::max();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Log level is read once from LAYPH_LOG (error|warn|info|debug).
enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

inline LogLevel log_level() {
  static LogLevel lvl = [] {
    const char* env = std::getenv("LAYPH_LOG");
    if (!env) return LogLevel::Warn;
    std::string s(env);
    if (s == "error") return LogLevel::Error;
    if (s == "info") return LogLevel::Info;
    if (s == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
  }();
  return lvl;
}

template <typename... Args>
void log(LogLevel lvl, const char* fmt, Args... args) {
  if (lvl > log_level()) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "[layph:%s] ", names[static_cast<int>(lvl)]);
  std::fprintf(stderr, fmt, args...);
  std::fprintf(stderr, "\n");
}

inline void log_msg(LogLevel lvl, const char* msg) { log(lvl, "%s", msg); }

}  // namespace layph
