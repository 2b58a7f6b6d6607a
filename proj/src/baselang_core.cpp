#include "treeforge/baselang.hpp"

#include "treeforge/astspec.hpp"
#include "treeforge/text.hpp"

namespace treeforge::baselang {

std::string_view spec_text() {
    return R"(# Base-L tree specification
tree BaseL

node Exp =
  | IntLit(value: int)
  | RealLit(value: real)
  | BoolLit(value: bool)
  | VarRef(name: ident)
  | Binary(op: string, left: Exp, right: Exp)
  | Unary(op: string, operand: Exp)
  | IfExp(cond: Exp, thenBranch: Exp, elseBranch: Exp)
  | LetExp(name: ident, bound: Exp, body: Exp)
  | Apply(callee: ident, args: Exp*)

node Stmt =
  | Assign(target: ident, value: Exp)
  | SeqStmt(first: Stmt, second: Stmt)
  | IfStmt(cond: Exp, thenBranch: Stmt, elseBranch: Stmt)
  | ReturnStmt(value: Exp)
  | SkipStmt()

node Def =
  | ValueDef(name: ident, init: Exp)
  | StateDef(name: ident, declaredType: ident, shared: bool, init: Exp)
  | FunctionDef(name: ident, body: Exp?, pre: Exp?, post: Exp?)
  | OperationDef(name: ident, pre: Exp?, body: Stmt)
  | TraceDef(name: ident, spec: string)
)";
}

SchemaPtr schema() {
    static const SchemaPtr cached = std::make_shared<astspec::Schema>(
        astspec::build_schema(astspec::parse_spec(spec_text())));
    return cached;
}

std::string_view type_name(Type type) {
    switch (type) {
    case Type::Int: return "int";
    case Type::Real: return "real";
    case Type::Bool: return "bool";
    case Type::None: return "none";
    case Type::Unknown: return "unknown";
    }
    return "unknown";
}

std::optional<Type> type_from_name(std::string_view name) {
    if (name == "int")
        return Type::Int;
    if (name == "real")
        return Type::Real;
    if (name == "bool")
        return Type::Bool;
    return std::nullopt;
}

std::int64_t Value::as_int() const {
    if (const auto* v = std::get_if<std::int64_t>(&data))
        return *v;
    throw Error(ErrorCode::EvalError, "expected an int value, got " + render());
}

bool Value::as_bool() const {
    if (const auto* v = std::get_if<bool>(&data))
        return *v;
    throw Error(ErrorCode::EvalError, "expected a bool value, got " + render());
}

double Value::as_real() const {
    if (const auto* v = std::get_if<double>(&data))
        return *v;
    if (const auto* v = std::get_if<std::int64_t>(&data))
        return static_cast<double>(*v);
    throw Error(ErrorCode::EvalError, "expected a numeric value, got " + render());
}

Type Value::type() const {
    if (is_int())
        return Type::Int;
    if (is_real())
        return Type::Real;
    return Type::Bool;
}

std::string Value::render() const {
    if (const auto* v = std::get_if<std::int64_t>(&data))
        return format_int(*v);
    if (const auto* v = std::get_if<double>(&data))
        return format_real(*v);
    return std::get<bool>(data) ? "true" : "false";
}

namespace {

bool numeric(const Value& v) { return v.is_int() || v.is_real(); }

[[noreturn]] void bad_operands(std::string_view op, const Value& l, const Value& r,
                               const std::optional<Span>& site) {
    throw Error(ErrorCode::EvalError,
                "operator '" + std::string(op) + "' not applicable to " +
                    std::string(type_name(l.type())) + " and " + std::string(type_name(r.type())),
                site);
}

// Floored division: the remainder takes the divisor's sign, so
// -7 div 2 = -4 and -7 mod 2 = 1. div and mod stay consistent:
// a = (a div b) * b + (a mod b).
std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0)))
        --q;
    return q;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t b) {
    std::int64_t r = a % b;
    if (r != 0 && ((r < 0) != (b < 0)))
        r += b;
    return r;
}

Value arith(std::string_view op, const Value& l, const Value& r,
            const std::optional<Span>& site) {
    if (!numeric(l) || !numeric(r))
        bad_operands(op, l, r, site);
    if (l.is_int() && r.is_int()) {
        std::int64_t a = l.as_int();
        std::int64_t b = r.as_int();
        if (op == "+")
            return Value::of_int(a + b);
        if (op == "-")
            return Value::of_int(a - b);
        return Value::of_int(a * b);
    }
    double a = l.as_real();
    double b = r.as_real();
    if (op == "+")
        return Value::of_real(a + b);
    if (op == "-")
        return Value::of_real(a - b);
    return Value::of_real(a * b);
}

Value compare(std::string_view op, const Value& l, const Value& r,
              const std::optional<Span>& site) {
    if (!numeric(l) || !numeric(r))
        bad_operands(op, l, r, site);
    double a = l.as_real();
    double b = r.as_real();
    if (op == "<")
        return Value::of_bool(a < b);
    if (op == "<=")
        return Value::of_bool(a <= b);
    if (op == ">")
        return Value::of_bool(a > b);
    return Value::of_bool(a >= b);
}

Value equality(std::string_view op, const Value& l, const Value& r,
               const std::optional<Span>& site) {
    bool eq;
    if (l.is_bool() && r.is_bool())
        eq = l.as_bool() == r.as_bool();
    else if (numeric(l) && numeric(r))
        eq = l.as_real() == r.as_real();
    else
        bad_operands(op, l, r, site);
    return Value::of_bool(op == "=" ? eq : !eq);
}

} // namespace

Value apply_binop(std::string_view op, const Value& left, const Value& right,
                  const std::optional<Span>& site) {
    if (op == "+" || op == "-" || op == "*")
        return arith(op, left, right, site);
    if (op == "/") {
        if (!numeric(left) || !numeric(right))
            bad_operands(op, left, right, site);
        if (right.as_real() == 0.0)
            throw Error(ErrorCode::DivisionByZero, "division by zero", site);
        return Value::of_real(left.as_real() / right.as_real());
    }
    if (op == "div" || op == "mod") {
        if (!left.is_int() || !right.is_int())
            bad_operands(op, left, right, site);
        if (right.as_int() == 0)
            throw Error(ErrorCode::DivisionByZero, "division by zero", site);
        return Value::of_int(op == "div" ? floor_div(left.as_int(), right.as_int())
                                         : floor_mod(left.as_int(), right.as_int()));
    }
    if (op == "<" || op == "<=" || op == ">" || op == ">=")
        return compare(op, left, right, site);
    if (op == "=" || op == "<>")
        return equality(op, left, right, site);
    if (op == "and" || op == "or") {
        if (!left.is_bool() || !right.is_bool())
            bad_operands(op, left, right, site);
        return Value::of_bool(op == "and" ? (left.as_bool() && right.as_bool())
                                          : (left.as_bool() || right.as_bool()));
    }
    throw Error(ErrorCode::EvalError, "unknown operator '" + std::string(op) + "'", site);
}

Value apply_unop(std::string_view op, const Value& operand, const std::optional<Span>& site) {
    if (op == "not") {
        if (!operand.is_bool())
            throw Error(ErrorCode::EvalError,
                        "operator 'not' not applicable to " +
                            std::string(type_name(operand.type())),
                        site);
        return Value::of_bool(!operand.as_bool());
    }
    throw Error(ErrorCode::EvalError, "unknown operator '" + std::string(op) + "'", site);
}

const FunctionDef* BaseModule::find_function(std::string_view name) const {
    for (const auto& fn : functions)
        if (fn.name == name)
            return &fn;
    return nullptr;
}

const OperationDef* BaseModule::find_operation(std::string_view name) const {
    for (const auto& op : operations)
        if (op.name == name)
            return &op;
    return nullptr;
}

const StateDef* BaseModule::find_state(std::string_view name) const {
    for (const auto& st : states)
        if (st.name == name)
            return &st;
    return nullptr;
}

const TraceDef* BaseModule::find_trace(std::string_view name) const {
    for (const auto& tr : traces)
        if (tr.name == name)
            return &tr;
    return nullptr;
}

std::string_view obligation_kind_name(Obligation::Kind kind) {
    switch (kind) {
    case Obligation::Kind::DivByZero: return "DivByZero";
    case Obligation::Kind::ImplicitSatisfiability: return "ImplicitSatisfiability";
    }
    return "DivByZero";
}

} // namespace treeforge::baselang
