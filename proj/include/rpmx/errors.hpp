#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rpmx {

// Thrown when a sampler or density computation produces a non-finite value.
// The CLI maps this to exit code 2 and writes a state dump.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Carries every validation message collected while parsing a config or
// dataset, so the user sees all problems at once.  CLI exit code 1.
class config_error : public std::runtime_error {
 public:
  explicit config_error(std::vector<std::string> messages)
      : std::runtime_error(join(messages)), messages_(std::move(messages)) {}

  const std::vector<std::string>& messages() const { return messages_; }

 private:
  static std::string join(const std::vector<std::string>& msgs) {
    std::string out;
    for (const auto& m : msgs) {
      if (!out.empty()) out += '\n';
      out += m;
    }
    return out;
  }

  std::vector<std::string> messages_;
};

}  // namespace rpmx
