#include "doctest.h"

#include "treeforge/irgen.hpp"

#include "treeforge/astspec.hpp"
#include "treeforge/baselang.hpp"

#include "support/ir_eval.hpp"
#include "support/test_util.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

using namespace treeforge;
using namespace treeforge::irgen;
using baselang::BaseModule;
using baselang::Value;
using tftest::error_code_of;
using tftest::eval_ir;
using tftest::eval_ir_with;
using treekit::NodePtr;
using treekit::Scalar;
using treekit::make_node;

namespace {

const char* kMathSource = R"(module Math
functions
  inc: int -> int
  inc(x) == x + 1

  scale: real -> real
  scale(r) == r * 2.5 + 1.0

  absval: int -> int
  absval(n) == if n < 0 then -n else n

  fact: int -> int
  fact(n) == if n <= 0 then 1 else n * fact(n - 1)

  even: int -> bool
  even(n) == if n <= 0 then true else odd(n - 1)

  odd: int -> bool
  odd(n) == if n <= 0 then false else even(n - 1)

  classify: int * int -> int
  classify(a, b) == if a > b and b > 0 then a div b else a mod (b + 3)

  pick: int -> real
  pick(n) == let t = n * n in if t > 4 then t * 0.5 else t + 0.25

  safe: int -> int
  safe(n) == if n <> 0 and 10 div n > 1 then 1 else 0

  sum3: () -> int
  sum3() == 1 + 2 * 3

  pickone: () -> int
  pickone() == if true then 4 else 0 div 0

  halfbad: () -> int
  halfbad() == 1 div 0

  poly: int -> int
  poly(x) == (2 + 3) * x + (10 - 4)

  flag: () -> bool
  flag() == not (1 < 2)

  area: () -> real
  area() == 2.5 * 4.0
)";

BaseModule math_module() { return baselang::parse_module(kMathSource); }

Scalar str(const char* s) { return Scalar(std::string(s)); }

NodePtr ir_const(const SchemaPtr& schema, const char* value) {
    return make_node(schema, "IrExp", "Const", {{"value", str(value)}});
}

const IrFunc& named(const IrModule& ir, std::string_view name) {
    const IrFunc* fn = ir.find_function(name);
    REQUIRE(fn != nullptr);
    return *fn;
}

// --- outcome comparison across interpreters ---------------------------------

struct Outcome {
    std::optional<Value> value;
    std::optional<ErrorCode> code;
};

Outcome base_outcome(const BaseModule& m, const std::string& fn,
                     const std::vector<Value>& args) {
    std::string text = fn + "(";
    for (size_t i = 0; i < args.size(); ++i) {
        if (i > 0)
            text += ", ";
        text += args[i].render();
    }
    text += ")";
    try {
        return {baselang::evaluate(m, text), std::nullopt};
    } catch (const Error& e) {
        return {std::nullopt, e.code()};
    }
}

Outcome ir_outcome(const IrModule& ir, const std::string& fn, const std::vector<Value>& args) {
    try {
        return {eval_ir(ir, fn, args), std::nullopt};
    } catch (const Error& e) {
        return {std::nullopt, e.code()};
    }
}

bool outcomes_match(const Outcome& a, const Outcome& b) {
    if (a.code || b.code)
        return a.code == b.code;
    if (!a.value || !b.value)
        return false;
    if (a.value->type() != b.value->type())
        return false;
    if (a.value->is_real())
        return std::abs(a.value->as_real() - b.value->as_real()) <= 1e-12;
    return *a.value == *b.value;
}

// Free variables of an IR expression: names referenced outside any
// enclosing binder.
void free_vars_rec(const NodePtr& n, std::set<std::string> bound,
                   std::set<std::string>& out) {
    if (n->is("IrExp", "VarRef")) {
        if (!bound.count(n->str_field("name")))
            out.insert(n->str_field("name"));
        return;
    }
    if (n->is("IrExp", "Let")) {
        free_vars_rec(n->child("bound"), bound, out);
        bound.insert(n->str_field("name"));
        free_vars_rec(n->child("body"), std::move(bound), out);
        return;
    }
    const auto* alt = n->schema->find_alternative(n->category, n->alternative);
    for (const auto& field : alt->fields) {
        const treekit::FieldValue& value = n->field(field.name);
        if (const auto* child = std::get_if<NodePtr>(&value))
            free_vars_rec(*child, bound, out);
        else if (const auto* items = std::get_if<std::vector<NodePtr>>(&value))
            for (const NodePtr& item : *items)
                free_vars_rec(item, bound, out);
    }
}

std::set<std::string> free_vars(const NodePtr& body) {
    std::set<std::string> out;
    free_vars_rec(body, {}, out);
    return out;
}

// --- random call graphs -------------------------------------------------------

IrModule graph_module(const std::vector<std::vector<size_t>>& adj) {
    IrModule ir;
    ir.name = "G";
    ir.schema = irgen::schema();
    for (size_t i = 0; i < adj.size(); ++i) {
        NodePtr body = ir_const(ir.schema, "0");
        for (size_t target : adj[i]) {
            NodePtr call = make_node(ir.schema, "IrExp", "Call",
                                     {{"fnName", Scalar("f" + std::to_string(target))},
                                      {"args", std::vector<NodePtr>{ir_const(ir.schema, "0")}}});
            body = make_node(ir.schema, "IrExp", "BinOp",
                             {{"op", str("+")}, {"left", body}, {"right", std::move(call)}});
        }
        ir.defs.push_back(IrFunc{"f" + std::to_string(i),
                                 {baselang::Param{"n", baselang::Type::Int, {}}},
                                 baselang::Type::Int, std::move(body)});
    }
    return ir;
}

size_t fn_index(const std::string& name) {
    return static_cast<size_t>(std::stoul(name.substr(1)));
}

} // namespace

TEST_CASE("translation maps expression forms one-to-one") {
    BaseModule m = math_module();
    IrModule ir = translate(m);

    REQUIRE(ir.defs.size() == m.functions.size());
    // Before any pass everything is a plain function, even the mutually
    // recursive pair.
    for (const IrDef& def : ir.defs)
        CHECK(std::holds_alternative<IrFunc>(def));

    const IrFunc& inc = named(ir, "inc");
    NodePtr expected = make_node(ir.schema, "IrExp", "BinOp",
                                 {{"op", str("+")},
                                  {"left", make_node(ir.schema, "IrExp", "VarRef",
                                                     {{"name", str("x")}})},
                                  {"right", ir_const(ir.schema, "1")}});
    CHECK(treekit::structurally_equal(inc.body, expected));
    CHECK(inc.body->origin_tree_id == "IrL");
    CHECK(inc.params.size() == 1);
    CHECK(inc.result_type == baselang::Type::Int);

    // Real and bool literals keep their lexical category in the payload.
    const IrFunc& area = named(ir, "area");
    CHECK(area.body->child("left")->str_field("value") == "2.5");
    CHECK(area.body->child("right")->str_field("value") == "4.0");
}

TEST_CASE("implicit definitions cannot be translated") {
    BaseModule m = baselang::parse_module(R"(module Impl
functions
  isqrt(n: int) r: int
  post r * r <= n and n < (r + 1) * (r + 1)
)");
    try {
        translate(m);
        FAIL("expected translation to fail");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ImplicitNotGeneratable);
        CHECK(e.message().find("isqrt") != std::string::npos);
    }
}

TEST_CASE("calls to unknown functions are rejected during translation") {
    BaseModule m = baselang::parse_module(R"(module Bad
functions
  f: int -> int
  f(x) == ghost(x)
)");
    CHECK(error_code_of([&] { translate(m); }) == ErrorCode::UnboundName);
}

TEST_CASE("negation lowers to a branch-flipping conditional") {
    BaseModule m = baselang::parse_module(R"(module Neg
functions
  neg: bool -> bool
  neg(b) == not b
)");
    IrModule ir = translate(m);
    CHECK(emit_pseudo(ir) == "module Neg\n\nfunc neg(b) = (if b false true)\n");
    CHECK(eval_ir(ir, "neg", {Value::of_bool(true)}) == Value::of_bool(false));
    CHECK(eval_ir(ir, "neg", {Value::of_bool(false)}) == Value::of_bool(true));
}

TEST_CASE("constant folding collapses constant subtrees bottom-up") {
    IrModule ir = fold_constants(translate(math_module()));

    CHECK(treekit::structurally_equal(named(ir, "sum3").body, ir_const(ir.schema, "7")));
    // The taken branch wins even when the dead branch cannot fold.
    CHECK(treekit::structurally_equal(named(ir, "pickone").body, ir_const(ir.schema, "4")));
    CHECK(treekit::structurally_equal(named(ir, "flag").body, ir_const(ir.schema, "false")));
    CHECK(treekit::structurally_equal(named(ir, "area").body, ir_const(ir.schema, "10.0")));

    // Division by a constant zero keeps its runtime behaviour.
    const IrFunc& halfbad = named(ir, "halfbad");
    CHECK(halfbad.body->is("IrExp", "BinOp"));
    CHECK(error_code_of([&] { eval_ir(ir, "halfbad", {}); }) == ErrorCode::DivisionByZero);

    // Partial folds leave variables alone.
    std::string poly;
    CHECK(named(ir, "poly").body->is("IrExp", "BinOp"));
    IrModule just_poly{"P", {named(ir, "poly")}, ir.schema};
    CHECK(emit_pseudo(just_poly) == "module P\n\nfunc poly(x) = (+ (* 5 x) 6)\n");

    // Fixpoint: a second application changes nothing.
    IrModule again = fold_constants(ir);
    CHECK(emit_pseudo(again) == emit_pseudo(ir));
    for (size_t i = 0; i < ir.defs.size(); ++i)
        CHECK(treekit::structurally_equal(std::get<IrFunc>(ir.defs[i]).body,
                                          std::get<IrFunc>(again.defs[i]).body));
}

TEST_CASE("passes preserve the free variables of every body") {
    IrModule raw = translate(math_module());
    IrModule folded = fold_constants(raw);
    IrModule grouped = group_mutual_recursion(folded);
    for (const IrDef& def : raw.defs) {
        const IrFunc& fn = std::get<IrFunc>(def);
        CHECK(free_vars(named(folded, fn.name).body) == free_vars(fn.body));
        CHECK(free_vars(named(grouped, fn.name).body) == free_vars(fn.body));
    }
}

TEST_CASE("mutual recursion is grouped, self recursion is not") {
    IrModule ir = group_mutual_recursion(translate(math_module()));

    size_t group_count = 0;
    for (const IrDef& def : ir.defs)
        if (const auto* group = std::get_if<IrFuncGroup>(&def)) {
            ++group_count;
            REQUIRE(group->members.size() == 2);
            CHECK(group->members[0].name == "even");
            CHECK(group->members[1].name == "odd");
        }
    CHECK(group_count == 1);

    // The group sits where its first member sat; fact stays plain.
    CHECK(std::holds_alternative<IrFuncGroup>(ir.defs[4]));
    CHECK(std::get<IrFunc>(ir.defs[3]).name == "fact");
    CHECK(std::get<IrFunc>(ir.defs[5]).name == "classify");

    // A call chain with no cycles stays ungrouped.
    BaseModule chain = baselang::parse_module(R"(module Chain
functions
  h: int -> int
  h(x) == x + 1

  g: int -> int
  g(x) == h(x) * 2

  f: int -> int
  f(x) == g(x) + h(x)
)");
    IrModule chain_ir = group_mutual_recursion(translate(chain));
    for (const IrDef& def : chain_ir.defs)
        CHECK(std::holds_alternative<IrFunc>(def));
}

TEST_CASE("grouping matches a mutual-reachability oracle on random call graphs") {
    std::mt19937_64 rng(20260814);
    for (size_t n = 2; n <= 8; ++n) {
        for (int trial = 0; trial < 40; ++trial) {
            std::vector<std::vector<size_t>> adj(n);
            for (size_t i = 0; i < n; ++i)
                for (size_t j = 0; j < n; ++j)
                    if (rng() % 4 == 0)
                        adj[i].push_back(j);

            // Transitive closure by brute force.
            std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
            for (size_t i = 0; i < n; ++i)
                for (size_t j : adj[i])
                    reach[i][j] = true;
            for (size_t k = 0; k < n; ++k)
                for (size_t i = 0; i < n; ++i)
                    for (size_t j = 0; j < n; ++j)
                        if (reach[i][k] && reach[k][j])
                            reach[i][j] = true;

            IrModule grouped = group_mutual_recursion(graph_module(adj));

            // Partition according to the pass.
            std::vector<size_t> part(n, 0);
            size_t next_part = 1;
            size_t previous_first = 0;
            bool first_def = true;
            for (const IrDef& def : grouped.defs) {
                std::vector<size_t> members;
                if (const auto* fn = std::get_if<IrFunc>(&def)) {
                    members.push_back(fn_index(fn->name));
                } else {
                    for (const IrFunc& member : std::get<IrFuncGroup>(def).members)
                        members.push_back(fn_index(member.name));
                    REQUIRE(members.size() >= 2);
                }
                // Members keep original order; defs appear in order of their
                // first member.
                CHECK(std::is_sorted(members.begin(), members.end()));
                if (!first_def)
                    CHECK(previous_first < members.front());
                previous_first = members.front();
                first_def = false;
                for (size_t m : members)
                    part[m] = next_part;
                ++next_part;
            }

            // Same component exactly when mutually reachable.
            for (size_t i = 0; i < n; ++i)
                for (size_t j = 0; j < n; ++j) {
                    bool mutual = i != j && reach[i][j] && reach[j][i];
                    bool together = i != j && part[i] == part[j];
                    CHECK(together == mutual);
                }

            // Self recursion alone never forms a group.
            for (size_t i = 0; i < n; ++i) {
                bool alone = true;
                for (size_t j = 0; j < n; ++j)
                    if (i != j && part[i] == part[j])
                        alone = false;
                if (alone) {
                    // Find its def and check the shape.
                    const IrFunc* fn = grouped.find_function("f" + std::to_string(i));
                    REQUIRE(fn != nullptr);
                }
            }

            // Idempotence, including byte-identical emission.
            IrModule twice = group_mutual_recursion(grouped);
            CHECK(emit_pseudo(twice) == emit_pseudo(grouped));
        }
    }
}

TEST_CASE("the neutral backend renders modules deterministically") {
    BaseModule m = math_module();
    IrModule ir = run_passes(translate(m), default_pass_order());
    std::string text = emit_pseudo(ir);
    CHECK(text == emit_pseudo(run_passes(translate(m), default_pass_order())));

    CHECK(text == R"(module Math

func inc(x) = (+ x 1)

func scale(r) = (+ (* r 2.5) 1.0)

func absval(n) = (if (< n 0) (- 0 n) n)

func fact(n) = (if (<= n 0) 1 (* n (fact (- n 1))))

group {
func even(n) = (if (<= n 0) true (odd (- n 1)))
func odd(n) = (if (<= n 0) false (even (- n 1)))
}

func classify(a, b) = (if (and (> a b) (> b 0)) (div a b) (mod a (+ b 3)))

func pick(n) = (let t (* n n) (if (> t 4) (* t 0.5) (+ t 0.25)))

func safe(n) = (if (and (<> n 0) (> (div 10 n) 1)) 1 0)

func sum3() = 7

func pickone() = 4

func halfbad() = (div 1 0)

func poly(x) = (+ (* 5 x) 6)

func flag() = false

func area() = 10.0
)");
}

TEST_CASE("an empty module emits only the header") {
    IrModule ir = translate(baselang::parse_module("module Empty"));
    CHECK(emit_pseudo(ir) == "module Empty\n");
}

TEST_CASE("the pass registry exposes fold and group") {
    std::vector<std::string> names;
    for (const auto& [name, pass] : pass_registry())
        names.push_back(name);
    CHECK(names == std::vector<std::string>{"fold", "group"});
    CHECK(default_pass_order() == std::vector<std::string>{"fold", "group"});

    IrModule ir = translate(math_module());
    CHECK(emit_pseudo(run_passes(ir, {})) == emit_pseudo(ir));
    CHECK(emit_pseudo(run_passes(ir, default_pass_order())) ==
          emit_pseudo(group_mutual_recursion(fold_constants(ir))));
    CHECK(error_code_of([&] { run_passes(ir, {"inline"}); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("every pass preserves semantics over integer grids") {
    BaseModule m = math_module();
    IrModule raw = translate(m);
    IrModule folded = fold_constants(raw);
    IrModule piped = run_passes(raw, default_pass_order());

    struct Fn {
        const char* name;
        int arity;
    };
    const std::vector<Fn> fns = {{"inc", 1},     {"scale", 1}, {"absval", 1}, {"fact", 1},
                                 {"even", 1},    {"odd", 1},   {"classify", 2}, {"pick", 1},
                                 {"safe", 1},    {"sum3", 0},  {"pickone", 0}, {"halfbad", 0},
                                 {"poly", 1},    {"flag", 0},  {"area", 0}};

    auto check_all = [&](const std::string& name, const std::vector<Value>& args) {
        Outcome expected = base_outcome(m, name, args);
        CHECK(outcomes_match(expected, ir_outcome(raw, name, args)));
        CHECK(outcomes_match(expected, ir_outcome(folded, name, args)));
        CHECK(outcomes_match(expected, ir_outcome(piped, name, args)));
    };

    for (const Fn& fn : fns) {
        if (fn.arity == 0) {
            check_all(fn.name, {});
        } else if (fn.arity == 1) {
            for (int x = -4; x <= 6; ++x)
                check_all(fn.name, {Value::of_int(x)});
        } else {
            for (int a = -4; a <= 4; ++a)
                for (int b = -4; b <= 4; ++b)
                    check_all(fn.name, {Value::of_int(a), Value::of_int(b)});
        }
    }

    // Spot checks against directly computed values.
    CHECK(eval_ir(piped, "fact", {Value::of_int(6)}) == Value::of_int(720));
    CHECK(eval_ir(piped, "even", {Value::of_int(7)}) == Value::of_bool(false));
    CHECK(eval_ir(piped, "pick", {Value::of_int(3)}) == Value::of_real(4.5));
    CHECK(eval_ir(piped, "safe", {Value::of_int(0)}) == Value::of_int(0));
}

TEST_CASE("the IR accepts new node kinds through a schema extension") {
    auto ext_ast = astspec::parse_spec(R"(# saturating wrapper
tree IrX extends IrL

node IrXExp =
  | Clamp(lo: int, hi: int, operand: base::IrExp)
)");
    auto xschema = std::make_shared<astspec::Schema>(
        astspec::extend_schema(*irgen::schema(), ext_ast));

    // (clamp 0 10 (+ x 2)) — the operand is an ordinary base IR expression.
    NodePtr operand = make_node(xschema, "IrExp", "BinOp",
                                {{"op", str("+")},
                                 {"left", make_node(xschema, "IrExp", "VarRef",
                                                    {{"name", str("x")}})},
                                 {"right", make_node(xschema, "IrExp", "Const",
                                                     {{"value", str("2")}})}});
    NodePtr body = make_node(xschema, "IrXExp", "Clamp",
                             {{"lo", Scalar(std::int64_t{0})},
                              {"hi", Scalar(std::int64_t{10})},
                              {"operand", operand}});
    CHECK(body->origin_tree_id == "IrX");
    CHECK(operand->origin_tree_id == "IrL");

    IrModule ir{"X",
                {IrFunc{"clamped",
                        {baselang::Param{"x", baselang::Type::Int, {}}},
                        baselang::Type::Int, body}},
                xschema};

    // The base evaluator is reused untouched; only the new node needs a
    // handler, registered under the extension's tree id.
    tftest::IrDispatcher d;
    d.register_analysis("IrL", tftest::make_ir_eval_analysis());
    tftest::IrAnalysis ext("IrX");
    ext.on("IrXExp", "Clamp",
           [](const treekit::Node& n, tftest::IrEvalContext& ctx, tftest::IrDispatcher& dd) {
               Value v = dd.dispatch(n.child("operand"), ctx);
               std::int64_t lo = n.int_field("lo");
               std::int64_t hi = n.int_field("hi");
               std::int64_t x = v.as_int();
               return Value::of_int(std::min(std::max(x, lo), hi));
           });
    d.register_analysis("IrX", std::move(ext));

    CHECK(eval_ir_with(d, ir, "clamped", {Value::of_int(5)}) == Value::of_int(7));
    CHECK(eval_ir_with(d, ir, "clamped", {Value::of_int(100)}) == Value::of_int(10));
    CHECK(eval_ir_with(d, ir, "clamped", {Value::of_int(-100)}) == Value::of_int(0));

    // Both trees took part: the wrapper dispatched once per call, the base
    // nodes under it went to the base analysis.
    CHECK(d.counters().at("IrX") == 3);
    CHECK(d.counters().at("IrL") > 0);

    // Base passes keep working through extension nodes without edits:
    // folding reaches the operand under the wrapper.
    NodePtr foldable = make_node(xschema, "IrXExp", "Clamp",
                                 {{"lo", Scalar(std::int64_t{0})},
                                  {"hi", Scalar(std::int64_t{10})},
                                  {"operand",
                                   make_node(xschema, "IrExp", "BinOp",
                                             {{"op", str("+")},
                                              {"left", make_node(xschema, "IrExp", "Const",
                                                                 {{"value", str("1")}})},
                                              {"right", make_node(xschema, "IrExp", "Const",
                                                                  {{"value", str("2")}})}})}});
    IrModule fm{"X", {IrFunc{"k", {}, baselang::Type::Int, foldable}}, xschema};
    IrModule folded = fold_constants(fm);
    NodePtr expected = make_node(xschema, "IrXExp", "Clamp",
                                 {{"lo", Scalar(std::int64_t{0})},
                                  {"hi", Scalar(std::int64_t{10})},
                                  {"operand", make_node(xschema, "IrExp", "Const",
                                                        {{"value", str("3")}})}});
    CHECK(treekit::structurally_equal(std::get<IrFunc>(folded.defs[0]).body, expected));

    // The call-graph walk sees calls nested under extension nodes.
    NodePtr call_other = make_node(xschema, "IrExp", "Call",
                                   {{"fnName", str("q")}, {"args", std::vector<NodePtr>{}}});
    NodePtr wrapped = make_node(xschema, "IrXExp", "Clamp",
                                {{"lo", Scalar(std::int64_t{0})},
                                 {"hi", Scalar(std::int64_t{10})},
                                 {"operand", call_other}});
    NodePtr call_p = make_node(xschema, "IrExp", "Call",
                               {{"fnName", str("p")}, {"args", std::vector<NodePtr>{}}});
    IrModule gm{"X",
                {IrFunc{"p", {}, baselang::Type::Int, wrapped},
                 IrFunc{"q", {}, baselang::Type::Int, call_p}},
                xschema};
    IrModule grouped = group_mutual_recursion(gm);
    REQUIRE(grouped.defs.size() == 1);
    REQUIRE(std::holds_alternative<IrFuncGroup>(grouped.defs[0]));
    const IrFuncGroup& group = std::get<IrFuncGroup>(grouped.defs[0]);
    CHECK(group.members[0].name == "p");
    CHECK(group.members[1].name == "q");
}
