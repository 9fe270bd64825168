// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>

namespace rsr::pipeline {

enum class LogLevel { error = 0, info = 1, debug = 2 };

/// Level from RSR_LOG_LEVEL (error|info|debug), info when unset.
LogLevel log_level();
void set_log_level(LogLevel level);

/// One value of a key=value log record.
struct LogValue {
  std::string text;
  LogValue(const char* s) : text(s) {}
  LogValue(std::string s) : text(std::move(s)) {}
  LogValue(std::string_view s) : text(s) {}
  LogValue(double v);
  LogValue(float v) : LogValue(static_cast<double>(v)) {}
  LogValue(int v) : text(std::to_string(v)) {}
  LogValue(long v) : text(std::to_string(v)) {}
  LogValue(unsigned long v) : text(std::to_string(v)) {}
  LogValue(unsigned long long v) : text(std::to_string(v)) {}
  LogValue(bool v) : text(v ? "true" : "false") {}
};

/// Writes "ts=... level=... phase=... k=v ..." to stderr when enabled.
void log(LogLevel level, std::string_view phase, std::initializer_list<std::pair<std::string_view, LogValue>> fields);

}  // namespace rsr::pipeline
