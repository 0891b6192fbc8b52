#pragma once

#include <functional>
#include <iostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace oovt::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Error = 3 };

inline std::string_view level_name(Level l) {
  switch (l) {
    case Level::Debug: return "debug";
    case Level::Info: return "info";
    case Level::Warn: return "warn";
    case Level::Error: return "error";
  }
  return "?";
}

using Sink = std::function<void(Level, std::string_view)>;

namespace detail {
inline Sink& sink() {
  static Sink s = [](Level l, std::string_view msg) {
    std::cerr << "[" << level_name(l) << "] " << msg << '\n';
  };
  return s;
}
inline Level& threshold() {
  static Level t = Level::Info;
  return t;
}
}  // namespace detail

/// Replaces the process-wide sink; returns the previous one so callers can restore it.
inline Sink set_sink(Sink s) { return std::exchange(detail::sink(), std::move(s)); }
inline void set_level(Level l) { detail::threshold() = l; }

inline void write(Level l, std::string_view msg) {
  if (l >= detail::threshold() && detail::sink()) detail::sink()(l, msg);
}
inline void debug(std::string_view msg) { write(Level::Debug, msg); }
inline void info(std::string_view msg) { write(Level::Info, msg); }
inline void warn(std::string_view msg) { write(Level::Warn, msg); }
inline void error(std::string_view msg) { write(Level::Error, msg); }

/// Collects messages for the lifetime of the object. Used by tests to assert on warnings.
class Capture {
 public:
  Capture()
      : previous_(set_sink([this](Level l, std::string_view m) {
          entries_.emplace_back(l, std::string(m));
        })) {}
  ~Capture() { set_sink(std::move(previous_)); }
  Capture(const Capture&) = delete;
  Capture& operator=(const Capture&) = delete;

  bool contains(Level l, std::string_view needle) const {
    for (const auto& [lv, m] : entries_)
      if (lv == l && m.find(needle) != std::string::npos) return true;
    return false;
  }
  std::size_t count(Level l) const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.first == l;
    return n;
  }

 private:
  Sink previous_;
  std::vector<std::pair<Level, std::string>> entries_;
};

}  // namespace oovt::log
