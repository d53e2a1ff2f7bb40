// Exception taxonomy for the kink spectral toolkit.  Every module throws a
// named subclass so the driver can map failures to exit codes: config errors
// (ParseError, ValidationError), numerical failures (the rest), and the
// degenerate K1 = K2 = 0 case (Undetermined).
#pragma once

#include <stdexcept>
#include <string>

namespace kspec {

struct KspecError : std::runtime_error {
  explicit KspecError(const std::string& msg) : std::runtime_error(msg) {}
};

// -- configuration -----------------------------------------------------------

struct ParseError : KspecError {
  int line = 0;
  int column = 0;
  ParseError(const std::string& msg, int line_, int col_)
      : KspecError("parse error at " + std::to_string(line_) + ":" +
                   std::to_string(col_) + ": " + msg),
        line(line_), column(col_) {}
};

struct ValidationError : KspecError {
  std::string field;
  ValidationError(const std::string& field_, const std::string& msg)
      : KspecError("invalid config field '" + field_ + "': " + msg),
        field(field_) {}
};

// -- numerical failures ------------------------------------------------------

struct ValidationFailure : KspecError { using KspecError::KspecError; };
struct EigensolverFailure : KspecError { using KspecError::KspecError; };
struct NoDiscreteModes : KspecError { using KspecError::KspecError; };
struct ParityViolation : KspecError { using KspecError::KspecError; };
struct DecayViolation : KspecError { using KspecError::KspecError; };
struct BranchError : KspecError { using KspecError::KspecError; };
struct BranchCut : KspecError { using KspecError::KspecError; };
struct ResidualTooLarge : KspecError { using KspecError::KspecError; };
struct NoContraction : KspecError { using KspecError::KspecError; };
struct NewtonDivergence : KspecError { using KspecError::KspecError; };
struct MultipleRoots : KspecError { using KspecError::KspecError; };
struct CFLViolation : KspecError { using KspecError::KspecError; };
struct NonFinite : KspecError { using KspecError::KspecError; };
struct PoorFit : KspecError { using KspecError::KspecError; };

// -- degenerate classification case ------------------------------------------

struct Undetermined : KspecError { using KspecError::KspecError; };

}  // namespace kspec
