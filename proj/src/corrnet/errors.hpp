#pragma once

#include <stdexcept>
#include <string>

namespace corrnet {

// Error taxonomy mirrored by the C API status codes (see include/corrnet/corrnet.h).

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ComputeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Warnings go to stderr; data never does.
void log_warning(const std::string& msg);

}  // namespace corrnet
