#pragma once

#include <stdexcept>
#include <string>

namespace growl {

// Base class for every error raised by the library. The CLI maps the
// concrete type to an exit code (see exit_code()).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

#define GROWL_DEFINE_ERROR(Name, Code)                          \
  class Name : public Error {                                   \
   public:                                                      \
    using Error::Error;                                         \
    int exit_code() const noexcept override { return Code; }    \
  }

// Malformed input or configuration: exit code 2.
GROWL_DEFINE_ERROR(ParseError, 2);
GROWL_DEFINE_ERROR(ValidationError, 2);
GROWL_DEFINE_ERROR(ConfigError, 2);

// Filesystem and checkpoint problems: exit code 3.
GROWL_DEFINE_ERROR(IoError, 3);
GROWL_DEFINE_ERROR(VersionMismatch, 3);
GROWL_DEFINE_ERROR(ShapeMismatch, 3);

// Data does not line up with what the operation needs: exit code 4.
GROWL_DEFINE_ERROR(InsufficientData, 4);
GROWL_DEFINE_ERROR(MissingGroundTruth, 4);
GROWL_DEFINE_ERROR(FrameMismatch, 4);
GROWL_DEFINE_ERROR(UnknownFrame, 4);
GROWL_DEFINE_ERROR(UniverseMismatch, 4);
GROWL_DEFINE_ERROR(UnknownNodeInScores, 4);
GROWL_DEFINE_ERROR(DimensionMismatch, 4);
GROWL_DEFINE_ERROR(NoValidDepth, 4);

// Numerical or generative failures: exit code 5.
GROWL_DEFINE_ERROR(NoTrainingEdges, 5);
GROWL_DEFINE_ERROR(DivergenceDetected, 5);
GROWL_DEFINE_ERROR(PlacementFailure, 5);

#undef GROWL_DEFINE_ERROR

}  // namespace growl
