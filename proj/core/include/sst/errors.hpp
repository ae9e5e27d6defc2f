#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sst {

// Invalid parameters or an inconsistent scenario. Carries every violation
// found, not just the first.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& message)
      : std::invalid_argument(message), violations_{message} {}
  explicit ConfigError(std::vector<std::string> violations)
      : std::invalid_argument(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) {
      if (!out.empty()) out += "; ";
      out += s;
    }
    return out;
  }

  std::vector<std::string> violations_;
};

// Malformed text input. line() is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace sst
