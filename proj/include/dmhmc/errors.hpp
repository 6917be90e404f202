#pragma once

#include <stdexcept>
#include <string>

namespace dmhmc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// network
struct DisconnectedGraph : Error { using Error::Error; };
struct SchemeGraphMismatch : Error { using Error::Error; };
struct NonSymmetric : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };

// potentials
struct NonSPDPrecision : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };
struct LabelOutOfRange : Error { using Error::Error; };
struct InsufficientClasses : Error { using Error::Error; };
struct InsufficientFeatures : Error { using Error::Error; };

// sampler
struct NonFiniteState : Error {
  NonFiniteState(const std::string& what, long iteration)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration(iteration) {}
  long iteration;
};

// diagnostics
struct EmptyAfterBurnIn : Error { using Error::Error; };
struct MissingDualEvaluation : Error { using Error::Error; };

// config / io
struct ParseError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct SchemaVersionMismatch : Error { using Error::Error; };

}  // namespace dmhmc
