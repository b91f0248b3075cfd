#pragma once

#include <cstdarg>

namespace ufg {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// Level comes from the UFG_LOG environment variable (error|warn|info|debug),
// read once on first use. All output goes to stderr.
LogLevel log_level();
void set_log_level(LogLevel lvl);

void log_msg(LogLevel lvl, const char* fmt, ...)
#if defined(__GNUC__)
    __attribute__((format(printf, 2, 3)))
#endif
    ;

#define UFG_LOG_ERROR(...) ::ufg::log_msg(::ufg::LogLevel::Error, __VA_ARGS__)
#define UFG_LOG_WARN(...) ::ufg::log_msg(::ufg::LogLevel::Warn, __VA_ARGS__)
#define UFG_LOG_INFO(...) ::ufg::log_msg(::ufg::LogLevel::Info, __VA_ARGS__)
#define UFG_LOG_DEBUG(...) ::ufg::log_msg(::ufg::LogLevel::Debug, __VA_ARGS__)

}  // namespace ufg
