// SPDX-License-Identifier: Apache-2.0
#include "rsr/pipeline/log.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>

namespace rsr::pipeline {

namespace {

std::optional<LogLevel>& override_level() {
  static std::optional<LogLevel> level;
  return level;
}

}  // namespace

LogLevel log_level() {
  if (override_level()) return *override_level();
  const char* env = std::getenv("RSR_LOG_LEVEL");
  if (env == nullptr) return LogLevel::info;
  const std::string_view v(env);
  if (v == "error") return LogLevel::error;
  if (v == "debug") return LogLevel::debug;
  return LogLevel::info;
}

void set_log_level(LogLevel level) { override_level() = level; }

LogValue::LogValue(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  text.assign(buf, res.ptr);
}

void log(LogLevel level, std::string_view phase, std::initializer_list<std::pair<std::string_view, LogValue>> fields) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  static const char* names[] = {"error", "info", "debug"};
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::system_clock::now().time_since_epoch())
                      .count();
  std::string line = "ts=" + std::to_string(ms) + " level=" + names[static_cast<int>(level)] + " phase=";
  line += phase;
  for (const auto& [k, v] : fields) {
    line += ' ';
    line += k;
    line += '=';
    line += v.text;
  }
  line += '\n';
  std::cerr << line;
}

}  // namespace rsr::pipeline
