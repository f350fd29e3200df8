#include "windfd/common/logging.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace windfd::log {
namespace {

std::atomic<Level> g_level{Level::Info};
std::mutex g_mutex;

const char* tag(Level level) {
  switch (level) {
    case Level::Debug: return "debug";
    case Level::Info: return "info";
    case Level::Warn: return "warn";
    case Level::Error: return "error";
  }
  return "?";
}

}  // namespace

void set_level(Level level) { g_level = level; }
Level level() { return g_level; }

void write(Level lvl, std::string_view message) {
  if (static_cast<int>(lvl) < static_cast<int>(g_level.load())) return;
  std::lock_guard lock(g_mutex);
  std::clog << "[windfd " << tag(lvl) << "] " << message << '\n';
}

}  // namespace windfd::log
