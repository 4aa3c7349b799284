#pragma once

#include <cstdarg>

namespace sparsecf {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

// Current level; initialised once from the SPARSE_CF_LOG environment
// variable (error|warn|info|debug), default warn.
LogLevel log_level();
void set_log_level(LogLevel level);

void log_message(LogLevel level, const char* fmt, ...)
    __attribute__((format(printf, 2, 3)));

}  // namespace sparsecf

#define SCF_ERROR(...) ::sparsecf::log_message(::sparsecf::LogLevel::error, __VA_ARGS__)
#define SCF_WARN(...) ::sparsecf::log_message(::sparsecf::LogLevel::warn, __VA_ARGS__)
#define SCF_INFO(...) ::sparsecf::log_message(::sparsecf::LogLevel::info, __VA_ARGS__)
#define SCF_DEBUG(...) ::sparsecf::log_message(::sparsecf::LogLevel::debug, __VA_ARGS__)
