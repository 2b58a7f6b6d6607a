#include "treeforge/irgen.hpp"

#include "treeforge/astspec.hpp"
#include "treeforge/text.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <set>
#include <utility>

namespace treeforge::irgen {

using treekit::FieldMap;
using treekit::FieldValue;
using treekit::Node;
using treekit::Scalar;
using treekit::make_node;

std::string_view spec_text() {
    return R"(# IrL tree specification
tree IrL

node IrExp =
  | Const(value: string)
  | VarRef(name: ident)
  | BinOp(op: string, left: IrExp, right: IrExp)
  | If(cond: IrExp, thenBranch: IrExp, elseBranch: IrExp)
  | Let(name: ident, bound: IrExp, body: IrExp)
  | Call(fnName: ident, args: IrExp*)
)";
}

SchemaPtr schema() {
    static const SchemaPtr cached = std::make_shared<astspec::Schema>(
        astspec::build_schema(astspec::parse_spec(spec_text())));
    return cached;
}

const IrFunc* IrModule::find_function(std::string_view name) const {
    for (const IrDef& def : defs) {
        if (const auto* fn = std::get_if<IrFunc>(&def)) {
            if (fn->name == name)
                return fn;
        } else {
            for (const IrFunc& member : std::get<IrFuncGroup>(def).members)
                if (member.name == name)
                    return &member;
        }
    }
    return nullptr;
}

std::string render_const(const Value& value) { return value.render(); }

Value parse_const(const std::string& text, const std::optional<Span>& span) {
    if (text == "true")
        return Value::of_bool(true);
    if (text == "false")
        return Value::of_bool(false);
    if (text.find_first_of(".eE") != std::string::npos) {
        const char* begin = text.c_str();
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end != begin + text.size() || text.empty())
            throw Error(ErrorCode::EvalError, "malformed constant '" + text + "'", span);
        return Value::of_real(v);
    }
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw Error(ErrorCode::EvalError, "malformed constant '" + text + "'", span);
    return Value::of_int(v);
}

// --- translation -----------------------------------------------------------

namespace {

struct Translator {
    const BaseModule& module;
    SchemaPtr ir_schema;

    NodePtr mk(std::string_view alt, FieldMap fields, const std::optional<Span>& sp) {
        return make_node(ir_schema, "IrExp", alt, std::move(fields), sp);
    }

    NodePtr constant(const Value& v, const std::optional<Span>& sp) {
        return mk("Const", {{"value", Scalar(render_const(v))}}, sp);
    }

    NodePtr exp(const NodePtr& n) {
        const std::string& alt = n->alternative;
        if (alt == "IntLit")
            return constant(Value::of_int(n->int_field("value")), n->span);
        if (alt == "RealLit")
            return constant(Value::of_real(n->real_field("value")), n->span);
        if (alt == "BoolLit")
            return constant(Value::of_bool(n->bool_field("value")), n->span);
        if (alt == "VarRef")
            return mk("VarRef", {{"name", Scalar(n->str_field("name"))}}, n->span);
        if (alt == "Binary")
            return mk("BinOp",
                      {{"op", Scalar(n->str_field("op"))},
                       {"left", exp(n->child("left"))},
                       {"right", exp(n->child("right"))}},
                      n->span);
        if (alt == "Unary") {
            // The IR has no unary operators; `not e` becomes a conditional
            // that flips the branch values.
            if (n->str_field("op") != "not")
                throw Error(ErrorCode::EvalError,
                            "unknown unary operator '" + n->str_field("op") + "'", n->span);
            return mk("If",
                      {{"cond", exp(n->child("operand"))},
                       {"thenBranch", constant(Value::of_bool(false), n->span)},
                       {"elseBranch", constant(Value::of_bool(true), n->span)}},
                      n->span);
        }
        if (alt == "IfExp")
            return mk("If",
                      {{"cond", exp(n->child("cond"))},
                       {"thenBranch", exp(n->child("thenBranch"))},
                       {"elseBranch", exp(n->child("elseBranch"))}},
                      n->span);
        if (alt == "LetExp")
            return mk("Let",
                      {{"name", Scalar(n->str_field("name"))},
                       {"bound", exp(n->child("bound"))},
                       {"body", exp(n->child("body"))}},
                      n->span);
        if (alt == "Apply") {
            const std::string& callee = n->str_field("callee");
            if (!module.find_function(callee))
                throw Error(ErrorCode::UnboundName,
                            "call to unknown function '" + callee + "'", n->span);
            std::vector<NodePtr> args;
            for (const NodePtr& arg : n->list("args"))
                args.push_back(exp(arg));
            return mk("Call",
                      {{"fnName", Scalar(callee)}, {"args", std::move(args)}}, n->span);
        }
        throw Error(ErrorCode::EvalError,
                    "expression form (" + n->category + ", " + alt + ") has no IR mapping",
                    n->span);
    }
};

} // namespace

IrModule translate(const BaseModule& module) {
    IrModule ir;
    ir.name = module.name;
    ir.schema = schema();
    Translator tr{module, ir.schema};
    for (const auto& fn : module.functions) {
        if (fn.is_implicit())
            throw Error(ErrorCode::ImplicitNotGeneratable,
                        "implicit function '" + fn.name + "' cannot be translated",
                        fn.span);
        ir.defs.push_back(IrFunc{fn.name, fn.params, fn.result_type, tr.exp(fn.body)});
    }
    return ir;
}

// --- constant folding ------------------------------------------------------

namespace {

const NodePtr* as_const(const NodePtr& n) {
    return n->is("IrExp", "Const") ? &n : nullptr;
}

/// Rebuilds a node with new children only when something changed, keeping
/// untouched subtrees shared.
NodePtr rebuild(const SchemaPtr& schema, const Node& n, FieldMap fields) {
    return make_node(schema, n.category, n.alternative, std::move(fields), n.span);
}

NodePtr fold_exp(const SchemaPtr& schema, const NodePtr& n) {
    // Fold children first, generically: any node or list field may hold a
    // foldable subtree, including fields of extension alternatives.
    const astspec::Alternative* alt = n->schema->find_alternative(n->category, n->alternative);
    FieldMap folded;
    bool changed = false;
    for (const astspec::Field& field : alt->fields) {
        const FieldValue& value = n->field(field.name);
        if (const auto* child = std::get_if<NodePtr>(&value)) {
            NodePtr next = fold_exp(schema, *child);
            changed = changed || next != *child;
            folded.emplace(field.name, std::move(next));
        } else if (const auto* items = std::get_if<std::vector<NodePtr>>(&value)) {
            std::vector<NodePtr> next;
            next.reserve(items->size());
            for (const NodePtr& item : *items) {
                next.push_back(fold_exp(schema, item));
                changed = changed || next.back() != item;
            }
            folded.emplace(field.name, std::move(next));
        } else {
            folded.emplace(field.name, value);
        }
    }

    auto current = [&]() -> NodePtr {
        return changed ? rebuild(schema, *n, std::move(folded)) : n;
    };

    if (n->is("IrExp", "BinOp")) {
        const auto* l = std::get_if<NodePtr>(&folded.at("left"));
        const auto* r = std::get_if<NodePtr>(&folded.at("right"));
        if (l && r && as_const(*l) && as_const(*r)) {
            Value lv = parse_const((*l)->str_field("value"), (*l)->span);
            Value rv = parse_const((*r)->str_field("value"), (*r)->span);
            try {
                Value v = baselang::apply_binop(n->str_field("op"), lv, rv, n->span);
                return make_node(schema, "IrExp", "Const",
                                 {{"value", Scalar(render_const(v))}}, n->span);
            } catch (const Error&) {
                // Singularities (division by zero, operand mismatches) keep
                // their runtime behaviour instead of folding.
                return current();
            }
        }
        return current();
    }
    if (n->is("IrExp", "If")) {
        const auto* cond = std::get_if<NodePtr>(&folded.at("cond"));
        if (cond && as_const(*cond)) {
            Value cv = parse_const((*cond)->str_field("value"), (*cond)->span);
            if (cv.is_bool())
                return std::get<NodePtr>(folded.at(cv.as_bool() ? "thenBranch"
                                                                : "elseBranch"));
        }
        return current();
    }
    return current();
}

IrFunc fold_func(const SchemaPtr& schema, const IrFunc& fn) {
    return {fn.name, fn.params, fn.result_type, fold_exp(schema, fn.body)};
}

} // namespace

IrModule fold_constants(const IrModule& ir) {
    IrModule out;
    out.name = ir.name;
    out.schema = ir.schema;
    for (const IrDef& def : ir.defs) {
        if (const auto* fn = std::get_if<IrFunc>(&def)) {
            out.defs.push_back(fold_func(ir.schema, *fn));
        } else {
            IrFuncGroup group;
            for (const IrFunc& member : std::get<IrFuncGroup>(def).members)
                group.members.push_back(fold_func(ir.schema, member));
            out.defs.push_back(std::move(group));
        }
    }
    return out;
}

// --- mutual-recursion grouping ----------------------------------------------

namespace {

std::vector<IrFunc> flatten(const IrModule& ir) {
    std::vector<IrFunc> fns;
    for (const IrDef& def : ir.defs) {
        if (const auto* fn = std::get_if<IrFunc>(&def))
            fns.push_back(*fn);
        else
            for (const IrFunc& member : std::get<IrFuncGroup>(def).members)
                fns.push_back(member);
    }
    return fns;
}

struct SccState {
    const std::vector<std::vector<size_t>>& edges;
    std::vector<int> index;
    std::vector<int> lowlink;
    std::vector<bool> on_stack;
    std::vector<size_t> stack;
    std::vector<size_t> component; // function -> component id
    int next_index = 0;
    size_t next_component = 0;

    explicit SccState(const std::vector<std::vector<size_t>>& edges)
        : edges(edges),
          index(edges.size(), -1),
          lowlink(edges.size(), 0),
          on_stack(edges.size(), false),
          component(edges.size(), 0) {}

    void visit(size_t v) {
        index[v] = lowlink[v] = next_index++;
        stack.push_back(v);
        on_stack[v] = true;
        for (size_t w : edges[v]) {
            if (index[w] < 0) {
                visit(w);
                lowlink[v] = std::min(lowlink[v], lowlink[w]);
            } else if (on_stack[w]) {
                lowlink[v] = std::min(lowlink[v], index[w]);
            }
        }
        if (lowlink[v] == index[v]) {
            for (;;) {
                size_t w = stack.back();
                stack.pop_back();
                on_stack[w] = false;
                component[w] = next_component;
                if (w == v)
                    break;
            }
            ++next_component;
        }
    }
};

} // namespace

IrModule group_mutual_recursion(const IrModule& ir) {
    std::vector<IrFunc> fns = flatten(ir);
    std::map<std::string, size_t> position;
    for (size_t i = 0; i < fns.size(); ++i)
        if (!position.emplace(fns[i].name, i).second)
            throw Error(ErrorCode::DuplicateName,
                        "function '" + fns[i].name + "' is defined twice");

    std::vector<std::vector<size_t>> edges(fns.size());
    for (size_t i = 0; i < fns.size(); ++i) {
        std::set<size_t> targets;
        for (const NodePtr& node : treekit::traverse(fns[i].body, treekit::Order::Pre))
            if (node->is("IrExp", "Call")) {
                auto it = position.find(node->str_field("fnName"));
                if (it != position.end())
                    targets.insert(it->second);
            }
        edges[i].assign(targets.begin(), targets.end());
    }

    SccState scc(edges);
    for (size_t i = 0; i < fns.size(); ++i)
        if (scc.index[i] < 0)
            scc.visit(i);

    // Components keyed by their first member; members keep module order.
    std::vector<std::vector<size_t>> members(scc.next_component);
    for (size_t i = 0; i < fns.size(); ++i)
        members[scc.component[i]].push_back(i);

    IrModule out;
    out.name = ir.name;
    out.schema = ir.schema;
    std::vector<bool> emitted(scc.next_component, false);
    for (size_t i = 0; i < fns.size(); ++i) {
        size_t comp = scc.component[i];
        if (emitted[comp])
            continue;
        emitted[comp] = true;
        if (members[comp].size() == 1) {
            out.defs.push_back(std::move(fns[i]));
        } else {
            IrFuncGroup group;
            for (size_t j : members[comp])
                group.members.push_back(std::move(fns[j]));
            out.defs.push_back(std::move(group));
        }
    }
    return out;
}

// --- the neutral text backend ------------------------------------------------

namespace {

void emit_exp(const NodePtr& n, std::string& out) {
    const std::string& alt = n->alternative;
    if (alt == "Const") {
        out += n->str_field("value");
        return;
    }
    if (alt == "VarRef") {
        out += n->str_field("name");
        return;
    }
    if (alt == "BinOp") {
        out += "(";
        out += n->str_field("op");
        out += ' ';
        emit_exp(n->child("left"), out);
        out += ' ';
        emit_exp(n->child("right"), out);
        out += ")";
        return;
    }
    if (alt == "If") {
        out += "(if ";
        emit_exp(n->child("cond"), out);
        out += ' ';
        emit_exp(n->child("thenBranch"), out);
        out += ' ';
        emit_exp(n->child("elseBranch"), out);
        out += ")";
        return;
    }
    if (alt == "Let") {
        out += "(let ";
        out += n->str_field("name");
        out += ' ';
        emit_exp(n->child("bound"), out);
        out += ' ';
        emit_exp(n->child("body"), out);
        out += ")";
        return;
    }
    if (alt == "Call") {
        out += "(";
        out += n->str_field("fnName");
        for (const NodePtr& arg : n->list("args")) {
            out += ' ';
            emit_exp(arg, out);
        }
        out += ")";
        return;
    }
    throw Error(ErrorCode::HandlerError,
                "the neutral backend has no rendering for (" + n->category + ", " + alt + ")",
                n->span);
}

void emit_func(const IrFunc& fn, std::string& out) {
    out += "func ";
    out += fn.name;
    out += "(";
    for (size_t i = 0; i < fn.params.size(); ++i) {
        if (i > 0)
            out += ", ";
        out += fn.params[i].name;
    }
    out += ") = ";
    emit_exp(fn.body, out);
    out += '\n';
}

} // namespace

std::string emit_pseudo(const IrModule& ir) {
    std::string out = "module " + ir.name + "\n";
    for (const IrDef& def : ir.defs) {
        out += '\n';
        if (const auto* fn = std::get_if<IrFunc>(&def)) {
            emit_func(*fn, out);
        } else {
            out += "group {\n";
            for (const IrFunc& member : std::get<IrFuncGroup>(def).members)
                emit_func(member, out);
            out += "}\n";
        }
    }
    return out;
}

// --- pass plumbing -----------------------------------------------------------

const std::map<std::string, Pass>& pass_registry() {
    static const std::map<std::string, Pass> registry = {
        {"fold", [](const IrModule& ir) { return fold_constants(ir); }},
        {"group", [](const IrModule& ir) { return group_mutual_recursion(ir); }},
    };
    return registry;
}

const std::vector<std::string>& default_pass_order() {
    static const std::vector<std::string> order = {"fold", "group"};
    return order;
}

IrModule run_passes(const IrModule& ir, const std::vector<std::string>& names) {
    IrModule out = ir;
    for (const std::string& name : names) {
        auto it = pass_registry().find(name);
        if (it == pass_registry().end())
            throw Error(ErrorCode::InvalidConfig, "unknown pass '" + name + "'");
        out = it->second(out);
    }
    return out;
}

} // namespace treeforge::irgen
