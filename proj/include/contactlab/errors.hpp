#pragma once

#include <stdexcept>
#include <string>

namespace contactlab {

/// Requested strip coordinate of one of the two flow fixed points ±i/√π,
/// which have no finite preimage on the strip.
struct FixedPointSingular : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Step controller could not meet the local error tolerance above the
/// minimum step size.
struct StepFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A root search found no sign change on the given bracket.
struct NoBracket : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A second transversal regime crossing was detected along a piecewise
/// trajectory; the dynamics admit at most one, so this signals an
/// integration bug rather than a model state.
struct MultipleCrossings : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The displacing isotopy missed its target fiber by more than the
/// allowed tolerance.
struct DisplacementFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Wraps an upstream failure with the name of the pipeline stage it
/// occurred in.
struct StageFailure : std::runtime_error {
    std::string stage;
    StageFailure(std::string stage_name, const std::string& what)
        : std::runtime_error("stage '" + stage_name + "': " + what),
          stage(std::move(stage_name)) {}
};

}  // namespace contactlab
