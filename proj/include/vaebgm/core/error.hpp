#ifndef VAEBGM_CORE_ERROR_HPP
#define VAEBGM_CORE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace vaebgm {

/// Bad configuration or malformed input data. Maps to exit code 2.
class InputError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure while training or fitting a model. Maps to exit code 3.
class TrainingError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Checkpoint, schema or provenance hash mismatch. Maps to exit code 4.
class ArtifactMismatch : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Caller violated a shape or domain precondition.
class ShapeError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace vaebgm

#endif
