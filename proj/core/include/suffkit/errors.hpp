#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace suffkit {

enum class ErrorKind {
  kSingularity,          // |r| below the configured floor
  kFuelExhausted,        // mass reached the dry mass
  kUnsupportedOrbit,     // parabolic or hyperbolic input to a conversion
  kBranchAmbiguity,      // derivative requested on the switching surface
  kRegularityViolation,  // |dH1/dt| below the floor at a switching
  kSingularArc,          // H1 vanishes on an interval
  kStepUnderflow,        // integrator step size collapsed
  kDiverged,             // Newton iteration did not converge
  kContinuationStuck,    // homotopy step halving underflowed
  kHamiltonianNotRegular,
  kManifoldDegeneracy,   // gradient of the target constraints is rank deficient
  kPrecondition,
  kConfig,
  kIo,
};

std::string_view ToString(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace suffkit
