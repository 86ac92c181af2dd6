// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace spcs {

enum class ErrorCode {
  invalid_argument = 1,
  quadrature_nonconvergence = 2,
  ambiguous_bracket = 3,
  no_sign_change = 4,
  blowup = 5,
  bad_density = 6,
  support_mismatch = 7,
  unsupported = 8,
  internal = 9,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string &what) {
  throw Error(code, what);
}

inline void require(bool ok, ErrorCode code, const std::string &what) {
  if (!ok) fail(code, what);
}

} // namespace spcs
