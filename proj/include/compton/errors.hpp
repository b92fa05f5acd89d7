#pragma once

#include <stdexcept>
#include <string>

namespace compton {

// Base class for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define COMPTON_ERROR(Name)                 \
  struct Name : Error {                     \
    using Error::Error;                     \
  }

COMPTON_ERROR(NonConvergence);
COMPTON_ERROR(StepTooLarge);
COMPTON_ERROR(NoRoot);
COMPTON_ERROR(DomainError);
COMPTON_ERROR(Overflow);
COMPTON_ERROR(StepCollapse);
COMPTON_ERROR(FlatnessViolation);
COMPTON_ERROR(NonContraction);
COMPTON_ERROR(NotConverged);
COMPTON_ERROR(ParseError);
COMPTON_ERROR(ValidationError);
COMPTON_ERROR(UnknownPreset);

#undef COMPTON_ERROR

}  // namespace compton
