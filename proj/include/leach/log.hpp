#pragma once

#include <functional>
#include <string>

namespace leach {

enum class LogLevel { Debug = 0, Info = 1, Warning = 2, Error = 3, Off = 4 };

/// Messages below this level are dropped. Initialized from LEACH_LOG
/// (debug|info|warning|error|off), default warning.
void set_log_level(LogLevel level);
LogLevel log_level();

using LogSink = std::function<void(LogLevel, const std::string&)>;

/// Redirect messages (empty restores stderr); returns the previous sink.
LogSink set_log_sink(LogSink sink);

/// Thread-safe line to stderr with a level prefix.
void log(LogLevel level, const std::string& message);

inline void log_warning(const std::string& message) { log(LogLevel::Warning, message); }
inline void log_info(const std::string& message) { log(LogLevel::Info, message); }

}  // namespace leach
