#include "sparsecf/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace sparsecf {
namespace {

LogLevel level_from_env() {
  const char* env = std::getenv("SPARSE_CF_LOG");
  if (env == nullptr) return LogLevel::warn;
  if (std::strcmp(env, "error") == 0) return LogLevel::error;
  if (std::strcmp(env, "warn") == 0) return LogLevel::warn;
  if (std::strcmp(env, "info") == 0) return LogLevel::info;
  if (std::strcmp(env, "debug") == 0) return LogLevel::debug;
  std::fprintf(stderr, "[warn] unknown SPARSE_CF_LOG value '%s', using warn\n", env);
  return LogLevel::warn;
}

LogLevel g_level = level_from_env();

const char* level_name(LogLevel level) {
  switch (level) {
    case LogLevel::error: return "error";
    case LogLevel::warn: return "warn";
    case LogLevel::info: return "info";
    case LogLevel::debug: return "debug";
  }
  return "?";
}

}  // namespace

LogLevel log_level() { return g_level; }
void set_log_level(LogLevel level) { g_level = level; }

void log_message(LogLevel level, const char* fmt, ...) {
  if (static_cast<int>(level) > static_cast<int>(g_level)) return;
  std::fprintf(stderr, "[%s] ", level_name(level));
  va_list args;
  va_start(args, fmt);
  std::vfprintf(stderr, fmt, args);
  va_end(args);
  std::fputc('\n', stderr);
}

}  // namespace sparsecf
