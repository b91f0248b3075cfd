#include "log.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>

namespace ufg {

namespace {

std::atomic<int> g_level{-1};
std::mutex g_mutex;

LogLevel parse_level(const char* s) {
  if (!s) return LogLevel::Info;
  if (std::strcmp(s, "error") == 0) return LogLevel::Error;
  if (std::strcmp(s, "warn") == 0) return LogLevel::Warn;
  if (std::strcmp(s, "info") == 0) return LogLevel::Info;
  if (std::strcmp(s, "debug") == 0) return LogLevel::Debug;
  return LogLevel::Info;
}

const char* level_tag(LogLevel lvl) {
  switch (lvl) {
    case LogLevel::Error: return "error";
    case LogLevel::Warn: return "warn";
    case LogLevel::Info: return "info";
    case LogLevel::Debug: return "debug";
  }
  return "?";
}

}  // namespace

LogLevel log_level() {
  int lvl = g_level.load(std::memory_order_relaxed);
  if (lvl < 0) {
    lvl = static_cast<int>(parse_level(std::getenv("UFG_LOG")));
    g_level.store(lvl, std::memory_order_relaxed);
  }
  return static_cast<LogLevel>(lvl);
}

void set_log_level(LogLevel lvl) {
  g_level.store(static_cast<int>(lvl), std::memory_order_relaxed);
}

void log_msg(LogLevel lvl, const char* fmt, ...) {
  if (static_cast<int>(lvl) > static_cast<int>(log_level())) return;
  std::lock_guard<std::mutex> lock(g_mutex);
  std::fprintf(stderr, "[ufg %s] ", level_tag(lvl));
  va_list ap;
  va_start(ap, fmt);
  std::vfprintf(stderr, fmt, ap);
  va_end(ap);
  std::fputc('\n', stderr);
}

}  // namespace ufg
