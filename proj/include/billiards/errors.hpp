#pragma once

#include <stdexcept>
#include <string>

namespace billiards {

// Error hierarchy shared by all modules. Every failure mode carries a
// human-readable message; callers that need context (bounce index, seed
// index, junction index) prepend it before rethrowing.

struct InvalidBody : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GrazingRay : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OutOfChart : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SeedCollapsed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotCritical : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonUnitTwist : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TransferSingular : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EigenFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AdjacencyViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AmbientDimension : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace billiards
