#pragma once

#include "treeforge/baselang.hpp"
#include "treeforge/treekit.hpp"

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace treeforge::irgen {

using baselang::BaseModule;
using baselang::Param;
using baselang::Type;
using baselang::Value;
using treekit::NodePtr;
using treekit::SchemaPtr;

/// The code-generation tree specification source. The IR is an ordinary
/// schema-defined tree, so new node kinds arrive through extend_schema and a
/// handler registration, exactly like any other notation.
std::string_view spec_text();
SchemaPtr schema();

struct IrFunc {
    std::string name;
    std::vector<Param> params;
    Type result_type = Type::Int;
    NodePtr body; // IrExp
};

/// A set of mutually recursive functions that a target must define together.
struct IrFuncGroup {
    std::vector<IrFunc> members; // in original module order
};

using IrDef = std::variant<IrFunc, IrFuncGroup>;

struct IrModule {
    std::string name;
    std::vector<IrDef> defs;
    SchemaPtr schema;

    /// Looks through groups as well as plain definitions.
    const IrFunc* find_function(std::string_view name) const;
};

/// Constant payloads are stored in lexical form: bools are words, reals
/// always carry a point or an exponent, ints are bare digits.
std::string render_const(const Value& value);
Value parse_const(const std::string& text, const std::optional<Span>& span = std::nullopt);

/// Maps every explicit function of a checked module onto the IR; expression
/// forms map one-to-one, `not` lowers to a two-armed conditional.
/// Implicit definitions have no body to translate and are rejected.
IrModule translate(const BaseModule& module);

/// Replaces operator applications over two constants by their value and
/// conditionals over a constant condition by the taken branch, bottom-up to
/// a fixpoint. Division by a constant zero stays unfolded.
IrModule fold_constants(const IrModule& ir);

/// Groups every strongly connected component of the call graph with two or
/// more members; self-recursion alone does not force a group. Groups appear
/// where their first member appeared.
IrModule group_mutual_recursion(const IrModule& ir);

/// Neutral text backend: one `func name(args) = <exp>` line per function,
/// fully parenthesised prefix expressions, `group { ... }` around grouped
/// functions. Output is deterministic.
std::string emit_pseudo(const IrModule& ir);

using Pass = std::function<IrModule(const IrModule&)>;

/// Named transformation passes selectable from the command line.
const std::map<std::string, Pass>& pass_registry();
const std::vector<std::string>& default_pass_order();
IrModule run_passes(const IrModule& ir, const std::vector<std::string>& names);

} // namespace treeforge::irgen
