#pragma once

#include <stdexcept>

namespace wide {

// Rejected inputs surface as a subclass of InvalidArgument so callers (and
// the CLI) can map them to a single "bad input" exit path.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Iterative-solver breakdowns on accepted inputs surface as SolverFailure.
class SolverFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define WIDE_ARGUMENT_ERROR(NAME)            \
  class NAME : public InvalidArgument {      \
  public:                                    \
    using InvalidArgument::InvalidArgument;  \
  }
#define WIDE_SOLVER_ERROR(NAME)            \
  class NAME : public SolverFailure {      \
  public:                                  \
    using SolverFailure::SolverFailure;    \
  }

WIDE_ARGUMENT_ERROR(NonPositiveEpsilon);
WIDE_ARGUMENT_ERROR(NonPositiveHorizon);
WIDE_ARGUMENT_ERROR(TooFewSteps);
WIDE_ARGUMENT_ERROR(ShapeMismatch);
WIDE_ARGUMENT_ERROR(UnknownEnergy);
WIDE_ARGUMENT_ERROR(UnknownDissipation);
WIDE_ARGUMENT_ERROR(InvalidParams);
WIDE_ARGUMENT_ERROR(MissingInitialRate);
WIDE_ARGUMENT_ERROR(ConstraintViolated);
WIDE_ARGUMENT_ERROR(SingularityRisk);
WIDE_ARGUMENT_ERROR(UnsupportedCombination);
WIDE_ARGUMENT_ERROR(NonSmoothDissipation);
WIDE_ARGUMENT_ERROR(DimensionTooLarge);
WIDE_ARGUMENT_ERROR(WrongRegime);
WIDE_ARGUMENT_ERROR(GridTooShort);
WIDE_ARGUMENT_ERROR(InsufficientSweep);
WIDE_ARGUMENT_ERROR(ModeOutOfRange);
WIDE_ARGUMENT_ERROR(InvalidGrowth);
WIDE_ARGUMENT_ERROR(UnknownEntry);
WIDE_ARGUMENT_ERROR(StabilityViolation);
WIDE_ARGUMENT_ERROR(ConfigError);

WIDE_SOLVER_ERROR(NonFiniteValue);
WIDE_SOLVER_ERROR(SingularSystem);
WIDE_SOLVER_ERROR(MaxIterations);
WIDE_SOLVER_ERROR(LineSearchFailure);
WIDE_SOLVER_ERROR(IndefiniteHessian);
WIDE_SOLVER_ERROR(StepTooSmall);
WIDE_SOLVER_ERROR(StepNewtonFailure);
WIDE_SOLVER_ERROR(StepMinimizationFailure);
WIDE_SOLVER_ERROR(NodeMinimizationFailure);
WIDE_SOLVER_ERROR(SolveFailed);
WIDE_SOLVER_ERROR(IoError);

#undef WIDE_ARGUMENT_ERROR
#undef WIDE_SOLVER_ERROR

}  // namespace wide
