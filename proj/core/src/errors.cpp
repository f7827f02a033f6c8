#include "panoscan/errors.hpp"

namespace panoscan {

ExitCode exit_code_for(const std::exception& e) noexcept {
  if (dynamic_cast<const BackendError*>(&e) != nullptr) {
    return ExitCode::backend;
  }
  if (dynamic_cast<const UsageError*>(&e) != nullptr ||
      dynamic_cast<const ConfigError*>(&e) != nullptr) {
    return ExitCode::usage;
  }
  return ExitCode::data;
}

}  // namespace panoscan
