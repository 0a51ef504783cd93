#pragma once

#include <stdexcept>
#include <string>

namespace mflab {

// Every library failure carries a short machine-readable code ("dim", "cfl",
// "no-contraction", ...) next to the human message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

  // true for codes raised by solvers rather than by bad input
  bool numerical() const noexcept;

 private:
  std::string code_;
};

}  // namespace mflab
