#pragma once

#include <string>

namespace tow::log {

enum class Level { kDebug = 0, kInfo = 1, kWarn = 2, kError = 3 };

void set_min_level(Level level);
Level min_level();

// "debug" | "info" | "warn" | "error"; anything else throws.
Level level_from_name(const std::string& name);

std::string iso8601_now();

// Emits one JSON object per line on stderr: {ts, level, stage, record_id?, msg}.
void write(Level level, const std::string& stage, const std::string& msg,
           const std::string& record_id = "");

void debug(const std::string& stage, const std::string& msg, const std::string& record_id = "");
void info(const std::string& stage, const std::string& msg, const std::string& record_id = "");
void warn(const std::string& stage, const std::string& msg, const std::string& record_id = "");
void error(const std::string& stage, const std::string& msg, const std::string& record_id = "");

}  // namespace tow::log
