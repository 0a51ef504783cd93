#include "mflab/error.hpp"

#include <array>
#include <string_view>

namespace mflab {

bool Error::numerical() const noexcept {
  static constexpr std::array<std::string_view, 8> kNumerical = {
      "cfl", "blowup", "no-contraction", "ansatz",
      "domain", "resolution", "functional", "log-domain"};
  for (auto c : kNumerical)
    if (code_ == c) return true;
  return false;
}

}  // namespace mflab
