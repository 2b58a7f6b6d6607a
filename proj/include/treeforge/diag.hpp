#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace treeforge {

/// Source position of a construct: 1-based line/column plus the lexeme length.
struct Span {
    int line = 0;
    int column = 0;
    int length = 0;

    bool operator==(const Span&) const = default;
};

std::string to_string(const Span& span);

/// A non-fatal finding produced by an analysis (type checking, validation).
/// Analyses collect diagnostics instead of throwing.
struct Diagnostic {
    std::string message;
    std::optional<Span> span;

    std::string render() const;
};

enum class ErrorCode {
    // astspec
    SyntaxError,
    DuplicateName,
    UnresolvedReference,
    QualifierWithoutBase,
    BaseMismatch,
    IllegalOverride,
    // treekit
    UnknownAlternative,
    FieldShapeMismatch,
    DuplicateRegistration,
    MissingAnalysis,
    HandlerError,
    // baselang runtime
    ImplicitEvaluationError,
    PreconditionFailure,
    PostconditionFailure,
    DivisionByZero,
    UnboundName,
    NoSolutionInBounds,
    EvalError,
    // ctengine
    BoundsError,
    ExpansionBudgetExceeded,
    // irgen
    ImplicitNotGeneratable,
    // cosim / configuration
    InvalidConfig,
};

std::string_view error_code_name(ErrorCode code);

/// The single exception type of the toolkit. Carries a machine-checkable
/// code plus an optional source span; what() renders both.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message, std::optional<Span> span = std::nullopt);

    ErrorCode code() const { return code_; }
    const std::optional<Span>& span() const { return span_; }
    const std::string& message() const { return message_; }

    /// Returns a copy with the span filled in, used when an inner failure
    /// surfaces at a node that knows its location.
    Error with_span(const Span& span) const;

private:
    ErrorCode code_;
    std::string message_;
    std::optional<Span> span_;
};

std::string render_diagnostics(const std::vector<Diagnostic>& diags);

} // namespace treeforge
