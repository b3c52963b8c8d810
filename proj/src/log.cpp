#include "nonclip/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>

namespace nonclip {

namespace {

LogLevel level_from_env() {
  const char* raw = std::getenv("NONCLIP_LOG");
  if (raw == nullptr) return LogLevel::off;
  const std::string v(raw);
  if (v == "info") return LogLevel::info;
  if (v == "debug") return LogLevel::debug;
  return LogLevel::off;
}

std::atomic<int>& level_storage() {
  static std::atomic<int> level{static_cast<int>(level_from_env())};
  return level;
}

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

void emit(LogLevel at, const std::string& message) {
  if (static_cast<int>(log_level()) < static_cast<int>(at)) return;
  std::lock_guard<std::mutex> lock(sink_mutex());
  std::cerr << "[nonclip] " << message << '\n';
}

}  // namespace

LogLevel log_level() { return static_cast<LogLevel>(level_storage().load()); }
void set_log_level(LogLevel level) { level_storage().store(static_cast<int>(level)); }

void log_info(const std::string& message) { emit(LogLevel::info, message); }
void log_debug(const std::string& message) { emit(LogLevel::debug, message); }

}  // namespace nonclip
