#ifndef DAN_ERROR_HPP_
#define DAN_ERROR_HPP_

#include <stdexcept>

namespace dan {

// Tensor shape conflicts. Messages name both offending shapes.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Invalid argument values: ids out of range, empty batches, bad configs.
struct ValueError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// File problems: missing files, bad magic, truncation, checksum mismatch.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite loss encountered during training.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dan

#endif  // DAN_ERROR_HPP_
