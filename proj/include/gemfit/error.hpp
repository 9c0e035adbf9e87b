#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gemfit {

enum class ErrorCategory {
  kUsage,
  kParse,
  kDimension,
  kIo,
  kPrecondition,
};

std::string_view to_string(ErrorCategory category);

// Every library failure is reported through this exception so the CLI can
// map it onto a stable exit code and category label.
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

}  // namespace gemfit
