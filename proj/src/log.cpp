#include "tow/log.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <mutex>
#include <stdexcept>

#include "json.hpp"

namespace tow::log {

namespace {

std::atomic<int> g_min_level{static_cast<int>(Level::kInfo)};
std::mutex g_mutex;

const char* level_name(Level level) {
  switch (level) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarn: return "warn";
    case Level::kError: return "error";
  }
  return "info";
}

}  // namespace

void set_min_level(Level level) { g_min_level = static_cast<int>(level); }

Level min_level() { return static_cast<Level>(g_min_level.load()); }

Level level_from_name(const std::string& name) {
  if (name == "debug") return Level::kDebug;
  if (name == "info") return Level::kInfo;
  if (name == "warn") return Level::kWarn;
  if (name == "error") return Level::kError;
  throw std::invalid_argument("unknown log level: " + name);
}

std::string iso8601_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()) % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>(ms.count()));
  return buf;
}

void write(Level level, const std::string& stage, const std::string& msg,
           const std::string& record_id) {
  if (static_cast<int>(level) < g_min_level.load()) return;
  nlohmann::json line{{"ts", iso8601_now()}, {"level", level_name(level)}, {"stage", stage},
                      {"msg", msg}};
  if (!record_id.empty()) line["record_id"] = record_id;
  std::string s = line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
  std::lock_guard<std::mutex> lock(g_mutex);
  std::fprintf(stderr, "%s\n", s.c_str());
}

void debug(const std::string& stage, const std::string& msg, const std::string& record_id) {
  write(Level::kDebug, stage, msg, record_id);
}
void info(const std::string& stage, const std::string& msg, const std::string& record_id) {
  write(Level::kInfo, stage, msg, record_id);
}
void warn(const std::string& stage, const std::string& msg, const std::string& record_id) {
  write(Level::kWarn, stage, msg, record_id);
}
void error(const std::string& stage, const std::string& msg, const std::string& record_id) {
  write(Level::kError, stage, msg, record_id);
}

}  // namespace tow::log
