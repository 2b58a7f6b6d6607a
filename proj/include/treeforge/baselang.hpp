#pragma once

#include "treeforge/diag.hpp"
#include "treeforge/treekit.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace treeforge::baselang {

using astspec::SchemaPtr;
using treekit::Node;
using treekit::NodePtr;

// --- types and values --------------------------------------------------

enum class Type { Int, Real, Bool, None, Unknown };

std::string_view type_name(Type type);
std::optional<Type> type_from_name(std::string_view name);

/// Runtime value: exact 64-bit ints, binary64 reals, bools. Arithmetic never
/// silently coerces; comparisons between int and real promote the int.
struct Value {
    std::variant<std::int64_t, double, bool> data;

    static Value of_int(std::int64_t v) { return {v}; }
    static Value of_real(double v) { return {v}; }
    static Value of_bool(bool v) { return {v}; }

    bool is_int() const { return std::holds_alternative<std::int64_t>(data); }
    bool is_real() const { return std::holds_alternative<double>(data); }
    bool is_bool() const { return std::holds_alternative<bool>(data); }

    std::int64_t as_int() const;
    bool as_bool() const;
    /// Numeric value as a real; ints promote.
    double as_real() const;

    Type type() const;
    std::string render() const;

    bool operator==(const Value&) const = default;
};

Value apply_binop(std::string_view op, const Value& left, const Value& right,
                  const std::optional<Span>& site = std::nullopt);
Value apply_unop(std::string_view op, const Value& operand,
                 const std::optional<Span>& site = std::nullopt);

// --- module structure ----------------------------------------------------

struct Param {
    std::string name;
    Type type = Type::Int;
    Span span;
};

struct ValueDef {
    std::string name;
    NodePtr init;
    Span span;
};

struct StateDef {
    std::string name;
    Type type = Type::Int;
    NodePtr init;
    bool shared = false;
    Span span;
};

struct FunctionDef {
    std::string name;
    std::vector<Param> params;
    Type result_type = Type::Int;
    NodePtr body;             // null => implicit definition
    NodePtr pre;              // optional
    NodePtr post;             // required for implicit, optional for explicit
    std::string result_name;  // binder available in post
    Span span;

    bool is_implicit() const { return body == nullptr; }
};

struct OperationDef {
    std::string name;
    std::vector<Param> params;
    NodePtr pre; // optional
    NodePtr body;
    Span span;
};

struct TraceDef {
    std::string name;
    std::string text; // trace expression source, parsed by ctengine
    Span span;
};

/// A parsed Base-L document: header data plus schema-conforming node trees.
struct BaseModule {
    std::string name;
    std::vector<ValueDef> values;
    std::vector<StateDef> states;
    std::vector<FunctionDef> functions;
    std::vector<OperationDef> operations;
    std::vector<TraceDef> traces;
    std::vector<NodePtr> def_nodes; // Def-category mirror of the lists above
    SchemaPtr schema;

    const FunctionDef* find_function(std::string_view name) const;
    const OperationDef* find_operation(std::string_view name) const;
    const StateDef* find_state(std::string_view name) const;
    const TraceDef* find_trace(std::string_view name) const;
};

/// The bundled Base-L tree specification source.
std::string_view spec_text();

/// Compiled Base-L schema (cached; immutable).
SchemaPtr schema();

BaseModule parse_module(std::string_view text);

// --- analyses ------------------------------------------------------------

using TypeEnv = std::vector<std::pair<std::string, Type>>;

struct TcContext {
    const BaseModule* module = nullptr;
    std::vector<std::map<std::string, Type>> scopes;
    std::vector<Diagnostic>* diags = nullptr;

    std::optional<Type> lookup(std::string_view name) const;
    void report(std::string message, const std::optional<Span>& span);
};

using TcDispatcher = treekit::Dispatcher<Type, TcContext>;

/// The Base-L type checker as an extension-aware analysis; handlers cover
/// the Exp and Stmt categories.
treekit::Analysis<Type, TcContext> make_type_check_analysis();

std::vector<Diagnostic> type_check(const BaseModule& module);

/// Same, but through a caller-owned dispatcher, so an embedding notation can
/// route its whole checking run (and its instrumentation) through one place.
/// Registers the Base-L analysis if the dispatcher lacks one.
std::vector<Diagnostic> type_check_with(TcDispatcher& d, const BaseModule& module);

/// Types a single expression under the given bindings, collecting
/// diagnostics. Runs the same analysis the module driver uses.
Type check_exp(const BaseModule& module, const NodePtr& exp, const TypeEnv& env,
               std::vector<Diagnostic>& diags);

// --- interpretation --------------------------------------------------------

enum class EvalMode { Strict, Solve };

struct SolveBounds {
    std::int64_t lo = -1000;
    std::int64_t hi = 1000;
};

enum class Access { Read, Write };
using AccessObserver = std::function<void(const std::string& name, Access, const Value&)>;

using State = std::map<std::string, Value>;
using RunResult = std::optional<Value>;

struct EvalContext {
    const BaseModule* module = nullptr;
    EvalMode mode = EvalMode::Strict;
    SolveBounds bounds;
    std::vector<std::map<std::string, Value>> scopes;
    State* state = nullptr; // operation runs only
    AccessObserver observer;
    bool returned = false;
    RunResult return_value;
    int depth = 0;
};

using RunDispatcher = treekit::Dispatcher<RunResult, EvalContext>;

/// The Base-L interpreter as an analysis: Exp handlers produce a Value,
/// Stmt handlers thread state through the context.
treekit::Analysis<RunResult, EvalContext> make_eval_analysis();

/// Evaluates the module's value definitions in order.
std::map<std::string, Value> compute_value_env(const BaseModule& module);

/// Evaluates `f(lit, ...)` call text. Strict mode raises
/// ImplicitEvaluationError on implicit functions; solve mode falls back to
/// bounded search over the postcondition.
Value evaluate(const BaseModule& module, std::string_view call_text,
               EvalMode mode = EvalMode::Strict, SolveBounds bounds = {});

/// Smallest result in [bounds.lo, bounds.hi] satisfying the implicit
/// function's postcondition for the given arguments.
Value solve_implicit(const BaseModule& module, const FunctionDef& fn,
                     const std::vector<Value>& args, SolveBounds bounds);

/// Evaluates one expression under an explicit environment (module values are
/// in scope underneath it). Used for guard and derivative evaluation.
Value evaluate_exp(const BaseModule& module, const NodePtr& exp,
                   const std::map<std::string, Value>& env);

struct ExecResult {
    State state;
    RunResult result;
};

State initial_state(const BaseModule& module);

/// Runs an operation over a copy of the given state; the input value is never
/// mutated. The observer, when set, sees every state-variable read and write.
ExecResult exec_operation(const BaseModule& module, const State& state,
                          std::string_view op_name, const std::vector<Value>& args,
                          const AccessObserver& observer = nullptr);

struct ParsedCall {
    std::string name;
    std::vector<Value> args;
};

ParsedCall parse_call(std::string_view call_text);

// --- proof obligations -----------------------------------------------------

struct Obligation {
    enum class Kind { DivByZero, ImplicitSatisfiability };

    Kind kind = Kind::DivByZero;
    std::optional<Span> location;
    std::string predicate_text;
    std::string context_name; // enclosing definition
    TypeEnv type_env;         // bindings in scope at the obligation site

    bool operator==(const Obligation&) const = default;
};

std::string_view obligation_kind_name(Obligation::Kind kind);

struct PoContext {
    const BaseModule* module = nullptr;
    TypeEnv env;
    std::vector<Obligation>* out = nullptr;
    std::string context_name;
};

using PoDispatcher = treekit::Dispatcher<std::monostate, PoContext>;

/// The proof-obligation generator as an analysis over Exp and Stmt nodes.
treekit::Analysis<std::monostate, PoContext> make_po_analysis();

std::vector<Obligation> gen_pos(const BaseModule& module);

/// Dispatcher-sharing variant, mirroring type_check_with.
std::vector<Obligation> gen_pos_with(PoDispatcher& d, const BaseModule& module);

/// Obligations of a single expression under the given bindings.
std::vector<Obligation> gen_pos_exp(const BaseModule& module, const NodePtr& exp,
                                    const TypeEnv& env, std::string context_name);

// --- source rendering --------------------------------------------------

/// Renders an expression tree back to Base-L source. Re-parsing the result
/// yields a structurally equal tree.
std::string render_exp(const NodePtr& exp);

/// Parses a standalone Base-L expression.
NodePtr parse_exp_text(std::string_view text);

struct ObligationPredicate {
    std::optional<std::string> binder; // present for `exists r : <exp>`
    NodePtr body;
};

/// Parses an obligation predicate: either a plain expression or the
/// `exists <name> : <exp>` satisfiability form.
ObligationPredicate parse_obligation_predicate(std::string_view text);

} // namespace treeforge::baselang
