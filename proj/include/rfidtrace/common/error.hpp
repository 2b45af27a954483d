#pragma once

#include <stdexcept>
#include <string>

namespace rfidtrace {

/// Exception carrying a module-specific error code. Each module defines its
/// own `Errc` enum and a `to_string(Errc)` overload, then aliases
/// `using Error = BasicError<Errc>;`.
template <typename Code>
class BasicError : public std::runtime_error {
 public:
  BasicError(Code code, const std::string& detail)
      : std::runtime_error(compose(code, detail)), code_(code), detail_(detail) {}
  explicit BasicError(Code code) : BasicError(code, {}) {}

  Code code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  static std::string compose(Code code, const std::string& detail) {
    std::string text{to_string(code)};
    if (!detail.empty()) {
      text += ": ";
      text += detail;
    }
    return text;
  }

  Code code_;
  std::string detail_;
};

}  // namespace rfidtrace
