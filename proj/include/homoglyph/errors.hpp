#pragma once

#include <stdexcept>
#include <string>

namespace homoglyph {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define HOMOGLYPH_DEFINE_ERROR(Name)  \
  class Name : public Error {         \
   public:                            \
    using Error::Error;               \
  }

// render
HOMOGLYPH_DEFINE_ERROR(EmptyString);
HOMOGLYPH_DEFINE_ERROR(StringTooLong);
HOMOGLYPH_DEFINE_ERROR(FontError);

// net
HOMOGLYPH_DEFINE_ERROR(NonFiniteUpdate);

// index
HOMOGLYPH_DEFINE_ERROR(EmptyIndex);

// corpus
HOMOGLYPH_DEFINE_ERROR(NoSubstitutionPossible);
HOMOGLYPH_DEFINE_ERROR(InsufficientNames);

// baselines
HOMOGLYPH_DEFINE_ERROR(UnrenderableCodepoint);
HOMOGLYPH_DEFINE_ERROR(UnknownCharacter);

// eval
HOMOGLYPH_DEFINE_ERROR(DegenerateLabels);
HOMOGLYPH_DEFINE_ERROR(ConvergenceFailure);

// file formats and argument validation
HOMOGLYPH_DEFINE_ERROR(FormatError);
HOMOGLYPH_DEFINE_ERROR(InvalidArgument);

#undef HOMOGLYPH_DEFINE_ERROR

}  // namespace homoglyph
