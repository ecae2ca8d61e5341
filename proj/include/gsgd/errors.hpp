// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gsgd {

// Requested analytic quantity does not exist for this problem kind.
class NotAvailableError : public std::runtime_error {
 public:
  explicit NotAvailableError(const std::string& what) : std::runtime_error(what) {}
};

// An iterate left the trust region or went non-finite.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

// Input is outside the regime the underlying result covers.
class OutOfScopeError : public std::domain_error {
 public:
  explicit OutOfScopeError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace gsgd
