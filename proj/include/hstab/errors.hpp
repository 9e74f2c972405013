#pragma once

#include <stdexcept>
#include <string>

namespace hstab {

// iterative method failed to reach its tolerance (CLI exit code 3)
struct NumericsError : std::runtime_error {
  explicit NumericsError(const std::string& what) : std::runtime_error(what) {}
};

// malformed input file or unwritable output (CLI exit code 2)
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hstab
