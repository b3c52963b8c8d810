#pragma once

#include <string>

namespace nonclip {

enum class LogLevel { off = 0, info = 1, debug = 2 };

/// Level from NONCLIP_LOG (off, info, debug); read once. Unset or unknown means off.
LogLevel log_level();
void set_log_level(LogLevel level);

/// Writes "[nonclip] <message>" to stderr when the level allows it.
void log_info(const std::string& message);
void log_debug(const std::string& message);

}  // namespace nonclip
