#include "lmsim/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <string>

namespace lmsim {

namespace {

LogLevel parse_env_level() {
    const char* env = std::getenv("LMSIM_LOG");
    if (env == nullptr) {
        return LogLevel::warn;
    }
    std::string s(env);
    if (s == "error") return LogLevel::error;
    if (s == "warn") return LogLevel::warn;
    if (s == "info") return LogLevel::info;
    if (s == "debug") return LogLevel::debug;
    return LogLevel::warn;
}

LogLevel& level_ref() {
    static LogLevel level = parse_env_level();
    return level;
}

const char* tag(LogLevel level) {
    switch (level) {
    case LogLevel::error: return "error";
    case LogLevel::warn: return "warn";
    case LogLevel::info: return "info";
    case LogLevel::debug: return "debug";
    }
    return "?";
}

} // namespace

LogLevel log_level() { return level_ref(); }

void set_log_level(LogLevel level) { level_ref() = level; }

void log_message(LogLevel level, std::string_view message) {
    if (static_cast<int>(level) > static_cast<int>(level_ref())) {
        return;
    }
    std::fprintf(stderr, "lmsim [%s] %.*s\n", tag(level), static_cast<int>(message.size()),
                 message.data());
}

} // namespace lmsim
