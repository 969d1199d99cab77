#pragma once

#include <stdexcept>
#include <string>

namespace specband {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define SPECBAND_DEFINE_ERROR(Name)                              \
  class Name : public Error {                                    \
   public:                                                       \
    explicit Name(const std::string& what) : Error(what) {}      \
  }

// band structure
SPECBAND_DEFINE_ERROR(NonMonotoneEdges);
SPECBAND_DEFINE_ERROR(EvenEdgeCount);

// pencils
SPECBAND_DEFINE_ERROR(DimensionMismatch);
SPECBAND_DEFINE_ERROR(SingularLeadingCoefficient);
SPECBAND_DEFINE_ERROR(NonSelfAdjoint);
SPECBAND_DEFINE_ERROR(IndefiniteLeading);
SPECBAND_DEFINE_ERROR(WrongSeparatorCount);
SPECBAND_DEFINE_ERROR(WrongEigenCountInZone);
SPECBAND_DEFINE_ERROR(IllConditionedEigenbasis);
SPECBAND_DEFINE_ERROR(NonzeroRemainder);

// spectral data
SPECBAND_DEFINE_ERROR(PlacementOutsideGap);
SPECBAND_DEFINE_ERROR(DefectiveRoot);
SPECBAND_DEFINE_ERROR(NegativeGamma);

// operator construction and evaluation
SPECBAND_DEFINE_ERROR(ResidueNotCancelled);
SPECBAND_DEFINE_ERROR(AtSingularPoint);
SPECBAND_DEFINE_ERROR(SingularN);
SPECBAND_DEFINE_ERROR(IdentityViolation);

// flow and series
SPECBAND_DEFINE_ERROR(GridTooCoarse);

// configuration and artifacts
SPECBAND_DEFINE_ERROR(ParseError);
SPECBAND_DEFINE_ERROR(ValidationError);
SPECBAND_DEFINE_ERROR(IoError);

#undef SPECBAND_DEFINE_ERROR

}  // namespace specband
