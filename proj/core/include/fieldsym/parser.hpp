#pragma once

#include <string>
#include <vector>

#include "fieldsym/errors.hpp"
#include "fieldsym/model.hpp"

namespace fieldsym {

/// Positioned syntax error with the token set that would have been accepted.
struct ParseError {
    size_t offset = 0;
    int line = 1;
    int column = 1;
    std::string message;
    std::vector<std::string> expected;

    std::string render(const std::string& source) const;  // message + caret line
};

/// Exception wrapper so parse failures can travel through error paths that
/// expect exceptions; carries the full ParseError payload.
class ParseFailure : public Error {
  public:
    explicit ParseFailure(ParseError err)
        : Error("parse-error", err.message), error_(std::move(err)) {}
    const ParseError& error() const { return error_; }

  private:
    ParseError error_;
};

/// Parse a model definition file. Throws ParseFailure on syntax errors and
/// ValidationError on well-formed input that violates model invariants.
ModelDef parse_model(const std::string& text);

/// Non-throwing variant for callers that prefer a result value.
struct ParseOutcome {
    std::optional<ModelDef> model;
    std::optional<ParseError> syntax_error;
    std::optional<std::string> validation_error;
};
ParseOutcome try_parse_model(const std::string& text) noexcept;

/// Parse a standalone expression against a model's declarations (used to
/// re-read report expressions and by tests). Free indices must have
/// inferable kinds.
ExprPtr parse_expression(const std::string& text, const ModelDef& model);

ModelDef load_model_file(const std::string& path);

}  // namespace fieldsym
