#pragma once

#include <stdexcept>
#include <string>

namespace mbf {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MBF_DEFINE_ERROR(Name)            \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

MBF_DEFINE_ERROR(DimensionMismatch);
MBF_DEFINE_ERROR(NotPositiveDefinite);
MBF_DEFINE_ERROR(ConvergenceFailure);
MBF_DEFINE_ERROR(DomainError);
MBF_DEFINE_ERROR(InvalidArgument);
MBF_DEFINE_ERROR(DfTooSmall);
MBF_DEFINE_ERROR(DimensionTooLarge);
MBF_DEFINE_ERROR(NonPositiveWeight);
MBF_DEFINE_ERROR(NonPositiveK);
MBF_DEFINE_ERROR(StepUnderflow);
MBF_DEFINE_ERROR(RankDeficientSample);
MBF_DEFINE_ERROR(DegenerateStatistic);
MBF_DEFINE_ERROR(NotMajorized);
MBF_DEFINE_ERROR(LengthMismatch);
MBF_DEFINE_ERROR(DegenerateSpectrum);
MBF_DEFINE_ERROR(ParseError);
MBF_DEFINE_ERROR(IoError);

#undef MBF_DEFINE_ERROR

}  // namespace mbf
