#include "doctest.h"

#include "treeforge/baselang.hpp"
#include "treeforge/extlang.hpp"
#include "treeforge/treekit.hpp"

#include "support/test_util.hpp"

#include <random>

using namespace treeforge;
using namespace treeforge::treekit;
using tftest::error_code_of;
using tftest::rng_below;

namespace {

NodePtr int_lit(const astspec::SchemaPtr& s, std::int64_t v) {
    return make_node(s, "Exp", "IntLit", {{"value", Scalar(v)}});
}

/// Random hybrid process tree over the merged schema: extension nodes with
/// embedded base expression subtrees.
NodePtr random_proc(std::mt19937_64& rng, const astspec::SchemaPtr& s, int depth = 0) {
    auto make = [&](std::string_view alt, FieldMap fields) {
        return make_node(s, "Proc", alt, std::move(fields));
    };
    switch (rng_below(rng, depth >= 3 ? 2 : 6)) {
    case 0:
        return make("Stop", {});
    case 1:
        return make("SkipProc", {});
    case 2:
        return make("Prefix", {{"event", Scalar(std::string(rng_below(rng, 2) ? "a" : "b"))},
                               {"body", random_proc(rng, s, depth + 1)}});
    case 3:
        return make("ExtChoice", {{"left", random_proc(rng, s, depth + 1)},
                                  {"right", random_proc(rng, s, depth + 1)}});
    case 4:
        return make("Seq", {{"first", random_proc(rng, s, depth + 1)},
                            {"second", random_proc(rng, s, depth + 1)}});
    default:
        return make("Guard", {{"cond", tftest::random_exp(rng, s, 2)},
                              {"body", random_proc(rng, s, depth + 1)}});
    }
}

/// Analyses that simply count nodes, one handler table per tree.
struct CountContext {
    int base_nodes = 0;
    int ext_nodes = 0;
};

/// Dispatch children in field declaration order, summing results.
int dispatch_children(const Node& n, CountContext& ctx, Dispatcher<int, CountContext>& d) {
    int sum = 0;
    const auto* alt = n.schema->find_alternative(n.category, n.alternative);
    REQUIRE(alt != nullptr);
    for (const auto& field : alt->fields) {
        const FieldValue& value = n.field(field.name);
        if (const auto* child = std::get_if<NodePtr>(&value))
            sum += d.dispatch(*child, ctx);
        else if (const auto* items = std::get_if<std::vector<NodePtr>>(&value))
            for (const auto& item : *items)
                sum += d.dispatch(item, ctx);
    }
    return sum;
}

Analysis<int, CountContext> counting_base_analysis() {
    Analysis<int, CountContext> a("BaseL");
    a.otherwise([](const Node& n, CountContext& ctx, Dispatcher<int, CountContext>& d) {
        ++ctx.base_nodes;
        return 1 + dispatch_children(n, ctx, d);
    });
    return a;
}

Analysis<int, CountContext> counting_ext_analysis() {
    Analysis<int, CountContext> a("ProcL");
    a.otherwise([](const Node& n, CountContext& ctx, Dispatcher<int, CountContext>& d) {
        ++ctx.ext_nodes;
        return 1 + dispatch_children(n, ctx, d);
    });
    return a;
}

} // namespace

TEST_CASE("nodes take their origin from the schema alternative") {
    auto base = baselang::schema();
    auto merged = extlang::schema();

    CHECK(int_lit(base, 7)->origin_tree_id == "BaseL");
    // Built against the merged schema, a base alternative still reports the
    // base tree as its origin; only extension alternatives report ProcL.
    CHECK(int_lit(merged, 7)->origin_tree_id == "BaseL");
    CHECK(make_node(merged, "Proc", "Stop", {})->origin_tree_id == "ProcL");

    NodePtr guard = make_node(merged, "Proc", "Guard",
                              {{"cond", make_node(merged, "Exp", "BoolLit",
                                                  {{"value", Scalar(true)}})},
                               {"body", make_node(merged, "Proc", "Stop", {})}});
    CHECK(guard->origin_tree_id == "ProcL");
    CHECK(guard->child("cond")->origin_tree_id == "BaseL");
}

TEST_CASE("construction validates shapes eagerly") {
    auto s = baselang::schema();

    CHECK(error_code_of([&] { make_node(s, "Exp", "Nope", {}); }) ==
          ErrorCode::UnknownAlternative);
    CHECK(error_code_of([&] { make_node(s, "Nope", "IntLit", {}); }) ==
          ErrorCode::UnknownAlternative);
    CHECK(error_code_of([&] { make_node(s, "Exp", "IntLit", {}); }) ==
          ErrorCode::FieldShapeMismatch); // missing value
    CHECK(error_code_of([&] {
              make_node(s, "Exp", "IntLit", {{"value", Scalar(1.5)}});
          }) == ErrorCode::FieldShapeMismatch); // real where int expected
    CHECK(error_code_of([&] {
              make_node(s, "Exp", "IntLit",
                        {{"value", Scalar(std::int64_t(1))}, {"extra", Scalar(true)}});
          }) == ErrorCode::FieldShapeMismatch);
    CHECK(error_code_of([&] {
              make_node(s, "Exp", "Unary",
                        {{"op", Scalar(std::string("not"))}, {"operand", int_lit(s, 1)}});
          }) == std::nullopt);
    CHECK(error_code_of([&] {
              // node-ref child of the wrong category
              make_node(s, "Stmt", "ReturnStmt",
                        {{"value", make_node(s, "Stmt", "SkipStmt", {})}});
          }) == ErrorCode::FieldShapeMismatch);
}

TEST_CASE("optional fields default to absent and validate") {
    auto s = baselang::schema();
    NodePtr fn = make_node(s, "Def", "FunctionDef",
                           {{"name", Scalar(std::string("f"))}, {"body", int_lit(s, 1)}});
    CHECK(fn->opt_child("body") != nullptr);
    CHECK(fn->opt_child("pre") == nullptr);
    CHECK(fn->opt_child("post") == nullptr);
    CHECK(validate_tree(*s, fn).empty());
}

TEST_CASE("field accessors enforce kinds") {
    auto s = baselang::schema();
    NodePtr lit = int_lit(s, 3);
    CHECK(lit->int_field("value") == 3);
    CHECK(error_code_of([&] { lit->real_field("value"); }) == ErrorCode::FieldShapeMismatch);
    CHECK(error_code_of([&] { lit->child("value"); }) == ErrorCode::FieldShapeMismatch);
    CHECK(error_code_of([&] { lit->field("missing"); }) == ErrorCode::FieldShapeMismatch);
}

TEST_CASE("parsed trees validate against their schema") {
    auto module = baselang::parse_module(R"(
module M
values
  half = 1 / 2
functions
  double: int -> int
  double(x) == 2 * x
operations
  bump() == skip
)");
    for (const auto& def : module.def_nodes)
        CHECK(validate_tree(*module.schema, def).empty());
}

TEST_CASE("traversal is deterministic and follows field declaration order") {
    auto s = baselang::schema();
    NodePtr e = make_node(s, "Exp", "Binary",
                          {{"op", Scalar(std::string("+"))},
                           {"left", int_lit(s, 1)},
                           {"right", make_node(s, "Exp", "Binary",
                                               {{"op", Scalar(std::string("*"))},
                                                {"left", int_lit(s, 2)},
                                                {"right", int_lit(s, 3)}})}});

    auto pre = traverse(e, Order::Pre);
    REQUIRE(pre.size() == 5);
    CHECK(pre[0]->alternative == "Binary");
    CHECK(pre[1]->int_field("value") == 1);
    CHECK(pre[2]->alternative == "Binary");
    CHECK(pre[3]->int_field("value") == 2);
    CHECK(pre[4]->int_field("value") == 3);

    auto post = traverse(e, Order::Post);
    REQUIRE(post.size() == 5);
    CHECK(post[0]->int_field("value") == 1);
    CHECK(post[4]->alternative == "Binary");

    // Same input, same order, every time.
    CHECK(traverse(e, Order::Pre) == pre);
}

TEST_CASE("structural equality ignores spans") {
    auto s = baselang::schema();
    NodePtr a = make_node(s, "Exp", "IntLit", {{"value", Scalar(std::int64_t(3))}},
                          Span{1, 1, 1});
    NodePtr b = make_node(s, "Exp", "IntLit", {{"value", Scalar(std::int64_t(3))}},
                          Span{9, 9, 1});
    NodePtr c = make_node(s, "Exp", "IntLit", {{"value", Scalar(std::int64_t(4))}});
    CHECK(structurally_equal(a, b));
    CHECK_FALSE(structurally_equal(a, c));
}

TEST_CASE("dispatch routes by origin and instruments every hop") {
    auto merged = extlang::schema();
    Dispatcher<int, CountContext> d;
    d.register_analysis("BaseL", counting_base_analysis());
    d.register_analysis("ProcL", counting_ext_analysis());

    // [true] & a -> Stop — three extension nodes, one base node.
    NodePtr tree = make_node(
        merged, "Proc", "Guard",
        {{"cond", make_node(merged, "Exp", "BoolLit", {{"value", Scalar(true)}})},
         {"body", make_node(merged, "Proc", "Prefix",
                            {{"event", Scalar(std::string("a"))},
                             {"body", make_node(merged, "Proc", "Stop", {})}})}});

    CountContext ctx;
    int total = d.dispatch(tree, ctx);
    CHECK(total == 4);
    CHECK(ctx.base_nodes == 1);
    CHECK(ctx.ext_nodes == 3);

    CHECK(d.counters().at("BaseL") == 1);
    CHECK(d.counters().at("ProcL") == 3);
    REQUIRE(d.log().size() == 4);
    CHECK(d.log()[0] == DispatchLogEntry{"Proc", "Guard", "ProcL", "ProcL"});
    CHECK(d.log()[1] == DispatchLogEntry{"Exp", "BoolLit", "BaseL", "BaseL"});
    CHECK(d.log_text().find("(Exp,BoolLit,BaseL,BaseL)") != std::string::npos);

    std::uint64_t counter_sum = 0;
    for (const auto& [_, n] : d.counters())
        counter_sum += n;
    CHECK(counter_sum == d.log().size());

    d.reset_instrumentation();
    CHECK(d.log().empty());
    CHECK(d.counters().empty());
}

TEST_CASE("dispatch failures carry precise codes") {
    auto merged = extlang::schema();

    Dispatcher<int, CountContext> base_only;
    base_only.register_analysis("BaseL", counting_base_analysis());
    CountContext ctx;
    CHECK(error_code_of([&] {
              base_only.dispatch(make_node(merged, "Proc", "Stop", {}), ctx);
          }) == ErrorCode::MissingAnalysis);

    Analysis<int, CountContext> narrow("BaseL");
    narrow.on("Exp", "IntLit",
              [](const Node&, CountContext&, Dispatcher<int, CountContext>&) { return 1; });
    Dispatcher<int, CountContext> d;
    d.register_analysis("BaseL", narrow);
    CHECK(error_code_of([&] {
              d.dispatch(make_node(merged, "Exp", "BoolLit", {{"value", Scalar(true)}}), ctx);
          }) == ErrorCode::HandlerError);

    CHECK(error_code_of([&] { d.register_analysis("BaseL", counting_base_analysis()); }) ==
          ErrorCode::DuplicateRegistration);
    CHECK(error_code_of([&] { d.register_analysis("Other", counting_base_analysis()); }) ==
          ErrorCode::InvalidConfig);
}

TEST_CASE("handler lookup prefers exact pair, then category, then default") {
    auto s = baselang::schema();
    using D = Dispatcher<std::string, CountContext>;
    Analysis<std::string, CountContext> a("BaseL");
    a.on("Exp", "IntLit", [](const Node&, CountContext&, D&) { return std::string("exact"); });
    a.on_category("Exp", [](const Node&, CountContext&, D&) { return std::string("category"); });
    a.otherwise([](const Node&, CountContext&, D&) { return std::string("default"); });

    D d;
    d.register_analysis("BaseL", a);
    CountContext ctx;
    CHECK(d.dispatch(int_lit(s, 1), ctx) == "exact");
    CHECK(d.dispatch(make_node(s, "Exp", "BoolLit", {{"value", Scalar(true)}}), ctx) ==
          "category");
    CHECK(d.dispatch(make_node(s, "Stmt", "SkipStmt", {}), ctx) == "default");

    auto pairs = a.exact_pairs();
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0] == std::pair<std::string, std::string>{"Exp", "IntLit"});
}

TEST_CASE("seeded hybrid trees always delegate by origin") {
    auto merged = extlang::schema();
    Dispatcher<int, CountContext> d;
    d.register_analysis("BaseL", counting_base_analysis());
    d.register_analysis("ProcL", counting_ext_analysis());

    std::mt19937_64 rng(20240817);
    int trees = 0;
    for (int i = 0; i < 200; ++i) {
        NodePtr tree = random_proc(rng, merged);
        CHECK(validate_tree(*merged, tree).empty());
        d.reset_instrumentation();
        CountContext ctx;
        int total = d.dispatch(tree, ctx);
        CHECK(total == ctx.base_nodes + ctx.ext_nodes);
        CHECK(static_cast<size_t>(total) == d.log().size());
        for (const auto& entry : d.log()) {
            // Delegation is exact: the owner of every handled node is the
            // analysis registered for the node's origin tree.
            CHECK(entry.handler_owner == entry.origin);
            if (entry.category == "Exp")
                CHECK(entry.origin == "BaseL");
            else
                CHECK(entry.origin == "ProcL");
        }
        ++trees;
    }
    CHECK(trees == 200);
}

TEST_CASE("extension re-assumes control below base-owned subtrees") {
    // A hybrid expression: base Binary over a base literal is impossible to
    // confuse, so embed the base expression under an extension guard and send
    // an analysis pass through it. The dispatch log must alternate owners
    // exactly at the origin boundaries.
    auto merged = extlang::schema();
    NodePtr tree = make_node(
        merged, "Proc", "Seq",
        {{"first",
          make_node(merged, "Proc", "Guard",
                    {{"cond", make_node(merged, "Exp", "Binary",
                                        {{"op", Scalar(std::string("<"))},
                                         {"left", int_lit(merged, 1)},
                                         {"right", int_lit(merged, 2)}})},
                     {"body", make_node(merged, "Proc", "SkipProc", {})}})},
         {"second", make_node(merged, "Proc", "Stop", {})}});

    Dispatcher<int, CountContext> d;
    d.register_analysis("BaseL", counting_base_analysis());
    d.register_analysis("ProcL", counting_ext_analysis());
    CountContext ctx;
    d.dispatch(tree, ctx);

    std::vector<std::string> owners;
    for (const auto& entry : d.log())
        owners.push_back(entry.handler_owner);
    CHECK(owners == std::vector<std::string>{"ProcL", "ProcL", "BaseL", "BaseL", "BaseL",
                                             "ProcL", "ProcL"});
}
