#pragma once

#include <stdexcept>
#include <string>

namespace fieldsym {

/// Base class for analysis errors with a stable machine-readable code.
class Error : public std::runtime_error {
  public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

  private:
    std::string code_;
};

#define FIELDSYM_ERROR(NAME, CODE)                                        \
    struct NAME : Error {                                                 \
        explicit NAME(const std::string& message) : Error(CODE, message) {} \
    }

FIELDSYM_ERROR(IndexViolation, "index-violation");
FIELDSYM_ERROR(IndexMismatch, "index-mismatch");
FIELDSYM_ERROR(MissingAtom, "missing-atom");
FIELDSYM_ERROR(ValidationError, "validation-error");
FIELDSYM_ERROR(UnknownField, "unknown-field");
FIELDSYM_ERROR(UnknownParameter, "unknown-parameter");
FIELDSYM_ERROR(ThetaOrderExceeded, "theta-order-exceeded");
FIELDSYM_ERROR(NoPotential, "no-potential");
FIELDSYM_ERROR(SymmetryNotVerified, "symmetry-not-verified");
FIELDSYM_ERROR(ShapeMismatch, "shape-mismatch");
FIELDSYM_ERROR(NotProportional, "not-proportional");
FIELDSYM_ERROR(MissingDilaton, "missing-dilaton");
FIELDSYM_ERROR(UnsupportedShape, "unsupported-shape");
FIELDSYM_ERROR(NotASolution, "not-a-solution");

#undef FIELDSYM_ERROR

}  // namespace fieldsym
