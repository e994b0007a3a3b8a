#pragma once

#include <stdexcept>
#include <string>

namespace stratum {

// Every failure surfaced to callers carries a short machine-readable code
// (e.g. "duplicate_id") next to the human-readable message.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

}  // namespace stratum
