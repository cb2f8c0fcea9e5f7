#include "leach/log.hpp"

#include <atomic>
#include <cstdlib>
#include <utility>
#include <iostream>
#include <mutex>
#include <string_view>

namespace leach {

namespace {

LogLevel level_from_env()
{
    const char* env = std::getenv("LEACH_LOG");
    if (env == nullptr) return LogLevel::Warning;
    const std::string_view v(env);
    if (v == "debug") return LogLevel::Debug;
    if (v == "info") return LogLevel::Info;
    if (v == "error") return LogLevel::Error;
    if (v == "off") return LogLevel::Off;
    return LogLevel::Warning;
}

std::atomic<LogLevel>& current()
{
    static std::atomic<LogLevel> level{level_from_env()};
    return level;
}

std::mutex& sink_mutex()
{
    static std::mutex m;
    return m;
}

LogSink& sink()
{
    static LogSink s;
    return s;
}

}  // namespace

void set_log_level(LogLevel level) { current().store(level); }

LogSink set_log_sink(LogSink s)
{
    std::lock_guard lock(sink_mutex());
    std::swap(sink(), s);
    return s;
}

LogLevel log_level() { return current().load(); }

void log(LogLevel level, const std::string& message)
{
    if (level < current().load() || level == LogLevel::Off) return;
    static constexpr const char* names[] = {"debug", "info", "warning", "error"};
    std::lock_guard lock(sink_mutex());
    if (sink()) {
        sink()(level, message);
        return;
    }
    std::cerr << "[" << names[static_cast<int>(level)] << "] " << message << '\n';
}

}  // namespace leach
