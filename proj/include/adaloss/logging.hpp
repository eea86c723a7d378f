#pragma once

#include <cstddef>
#include <string_view>

namespace adaloss::log {

enum class Level { debug = 0, info = 1, warning = 2, error = 3, off = 4 };

void set_level(Level level);
Level level();

void write(Level level, std::string_view message);

inline void warn(std::string_view message) { write(Level::warning, message); }
inline void info(std::string_view message) { write(Level::info, message); }

// Number of warnings raised since start-up, whether or not they were printed.
std::size_t warning_count();

} // namespace adaloss::log
