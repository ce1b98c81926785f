#pragma once

#include <stdexcept>
#include <string>

namespace novograd {

// Every contract violation in the library surfaces as this type.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace novograd
