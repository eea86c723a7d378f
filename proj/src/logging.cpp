#include "adaloss/logging.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace adaloss::log {
namespace {

std::atomic<Level> g_level{Level::warning};
std::atomic<std::size_t> g_warnings{0};
std::mutex g_sink_mutex;

const char* tag(Level level) {
    switch (level) {
    case Level::debug: return "debug";
    case Level::info: return "info";
    case Level::warning: return "warning";
    case Level::error: return "error";
    case Level::off: break;
    }
    return "";
}

} // namespace

void set_level(Level level) { g_level.store(level); }

Level level() { return g_level.load(); }

void write(Level lvl, std::string_view message) {
    if (lvl == Level::warning) {
        g_warnings.fetch_add(1, std::memory_order_relaxed);
    }
    if (lvl < g_level.load() || lvl == Level::off) {
        return;
    }
    std::lock_guard lock(g_sink_mutex);
    std::clog << '[' << tag(lvl) << "] " << message << '\n';
}

std::size_t warning_count() { return g_warnings.load(); }

} // namespace adaloss::log
