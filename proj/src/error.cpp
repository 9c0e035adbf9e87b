#include "gemfit/error.hpp"

namespace gemfit {

std::string_view to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kUsage:
      return "usage";
    case ErrorCategory::kParse:
      return "parse";
    case ErrorCategory::kDimension:
      return "dimension";
    case ErrorCategory::kIo:
      return "io";
    case ErrorCategory::kPrecondition:
      return "precondition";
  }
  return "unknown";
}

}  // namespace gemfit
