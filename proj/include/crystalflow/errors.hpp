#pragma once

#include <stdexcept>
#include <string>

namespace crystalflow {

/// Base of every error raised by the library. Each subclass maps to one
/// failure mode with a fixed process exit code in the CLI.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

#define CRYSTALFLOW_ERROR(Name, Code)                            \
  class Name : public Error {                                    \
   public:                                                       \
    explicit Name(const std::string& what) : Error(what) {}      \
    int exit_code() const noexcept override { return Code; }     \
  };

// Input / configuration problems.
CRYSTALFLOW_ERROR(ConfigInvalid, 2)
CRYSTALFLOW_ERROR(IoError, 3)
CRYSTALFLOW_ERROR(BadPartition, 2)
CRYSTALFLOW_ERROR(GridMismatch, 2)
CRYSTALFLOW_ERROR(PreconditionViolated, 2)

// Numerical failures detected at run time.
CRYSTALFLOW_ERROR(ZeroTotalRate, 4)
CRYSTALFLOW_ERROR(Divergent, 4)
CRYSTALFLOW_ERROR(OutOfRange, 4)
CRYSTALFLOW_ERROR(Overflow, 4)
CRYSTALFLOW_ERROR(StiffnessAbort, 4)
CRYSTALFLOW_ERROR(NonPositiveState, 4)

#undef CRYSTALFLOW_ERROR

}  // namespace crystalflow
