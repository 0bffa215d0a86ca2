#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace itemlab {

/// Library error with a stable machine-readable code alongside the message.
/// Codes are snake_case slugs ("unknown_item", "degenerate_variance", ...)
/// and surface unchanged in CLI error records.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace itemlab
