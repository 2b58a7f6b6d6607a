#include "treeforge/diag.hpp"

namespace treeforge {

std::string to_string(const Span& span) {
    return std::to_string(span.line) + ":" + std::to_string(span.column);
}

std::string Diagnostic::render() const {
    if (span)
        return to_string(*span) + ": " + message;
    return message;
}

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::UnresolvedReference: return "UnresolvedReference";
    case ErrorCode::QualifierWithoutBase: return "QualifierWithoutBase";
    case ErrorCode::BaseMismatch: return "BaseMismatch";
    case ErrorCode::IllegalOverride: return "IllegalOverride";
    case ErrorCode::UnknownAlternative: return "UnknownAlternative";
    case ErrorCode::FieldShapeMismatch: return "FieldShapeMismatch";
    case ErrorCode::DuplicateRegistration: return "DuplicateRegistration";
    case ErrorCode::MissingAnalysis: return "MissingAnalysis";
    case ErrorCode::HandlerError: return "HandlerError";
    case ErrorCode::ImplicitEvaluationError: return "ImplicitEvaluationError";
    case ErrorCode::PreconditionFailure: return "PreconditionFailure";
    case ErrorCode::PostconditionFailure: return "PostconditionFailure";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::UnboundName: return "UnboundName";
    case ErrorCode::NoSolutionInBounds: return "NoSolutionInBounds";
    case ErrorCode::EvalError: return "EvalError";
    case ErrorCode::BoundsError: return "BoundsError";
    case ErrorCode::ExpansionBudgetExceeded: return "ExpansionBudgetExceeded";
    case ErrorCode::ImplicitNotGeneratable: return "ImplicitNotGeneratable";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "UnknownError";
}

namespace {
std::string render_error(ErrorCode code, const std::string& message,
                         const std::optional<Span>& span) {
    std::string out;
    if (span)
        out += to_string(*span) + ": ";
    out += error_code_name(code);
    out += ": ";
    out += message;
    return out;
}
} // namespace

Error::Error(ErrorCode code, std::string message, std::optional<Span> span)
    : std::runtime_error(render_error(code, message, span)),
      code_(code),
      message_(std::move(message)),
      span_(span) {}

Error Error::with_span(const Span& span) const {
    return Error(code_, message_, span);
}

std::string render_diagnostics(const std::vector<Diagnostic>& diags) {
    std::string out;
    for (const auto& d : diags) {
        out += d.render();
        out += '\n';
    }
    return out;
}

} // namespace treeforge
