#pragma once

#include <stdexcept>
#include <string>

namespace nek {

// Bad input or inconsistent parameters; CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Runtime numerical failure (divergence, quadrature failure, step underflow);
// CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// A bounded search or expansion ran out of its configured budget; CLI maps
// this to exit code 2.
class BudgetError : public std::runtime_error {
public:
  explicit BudgetError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace nek
