#pragma once

#include <stdexcept>
#include <string>

namespace cvw {

// Base class for every failure raised by the library.  The CLI maps any
// cvw::Error to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CVW_DECLARE_ERROR(Name)            \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

CVW_DECLARE_ERROR(DimensionMismatch);
CVW_DECLARE_ERROR(InvalidInput);
CVW_DECLARE_ERROR(PatternMismatch);
CVW_DECLARE_ERROR(SingularSum);
CVW_DECLARE_ERROR(ConstraintViolated);
CVW_DECLARE_ERROR(NonPositiveDeterminant);
CVW_DECLARE_ERROR(OptimizerStalled);
CVW_DECLARE_ERROR(NotEntangled);
CVW_DECLARE_ERROR(DegenerateLimit);
CVW_DECLARE_ERROR(CutoffTooSmall);
CVW_DECLARE_ERROR(DegeneratePreparation);
CVW_DECLARE_ERROR(OrderTooHigh);

#undef CVW_DECLARE_ERROR

}  // namespace cvw
