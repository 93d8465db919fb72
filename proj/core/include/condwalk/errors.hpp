#pragma once

#include <stdexcept>
#include <string>

namespace condwalk {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CONDWALK_DEFINE_ERROR(Name)           \
  class Name : public Error {                 \
   public:                                    \
    using Error::Error;                       \
  }

// Model ingestion.
CONDWALK_DEFINE_ERROR(SchemaError);
CONDWALK_DEFINE_ERROR(StochasticityError);
CONDWALK_DEFINE_ERROR(DimensionError);

// Exact engine.
CONDWALK_DEFINE_ERROR(NotIrreducible);
CONDWALK_DEFINE_ERROR(NotCentered);
CONDWALK_DEFINE_ERROR(DegenerateVariance);
CONDWALK_DEFINE_ERROR(CellBudgetExceeded);
CONDWALK_DEFINE_ERROR(NonLatticeInput);
CONDWALK_DEFINE_ERROR(ExtinctAtHorizon);

// Martingale machinery.
CONDWALK_DEFINE_ERROR(SingularBeyondNullspace);
CONDWALK_DEFINE_ERROR(IdentityViolation);
CONDWALK_DEFINE_ERROR(TooManyCensored);

// Simulation and closed forms.
CONDWALK_DEFINE_ERROR(NoSurvivors);
CONDWALK_DEFINE_ERROR(DomainError);

#undef CONDWALK_DEFINE_ERROR

}  // namespace condwalk
