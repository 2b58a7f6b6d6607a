#include "treeforge/extlang.hpp"

#include "treeforge/astspec.hpp"
#include "treeforge/lexer.hpp"

#include "baselang_detail.hpp"

namespace treeforge::extlang {

using baselang::EvalContext;
using baselang::PoContext;
using baselang::RunDispatcher;
using baselang::TcContext;
using baselang::TcDispatcher;
using baselang::Type;
using baselang::Value;

std::string_view spec_text() {
    return R"(# Proc-L tree specification
tree ProcL extends BaseL

node Proc =
  | Stop()
  | SkipProc()
  | Prefix(event: ident, body: Proc)
  | ExtChoice(left: Proc, right: Proc)
  | Seq(first: Proc, second: Proc)
  | Guard(cond: base::Exp, body: Proc)

node ProcDef =
  | ProcessDef(name: ident, body: Proc)
)";
}

SchemaPtr schema() {
    static const SchemaPtr cached = std::make_shared<astspec::Schema>(astspec::extend_schema(
        *baselang::schema(), astspec::parse_spec(spec_text())));
    return cached;
}

const ProcDef* ExtModule::find_process(std::string_view name) const {
    for (const auto& p : processes)
        if (p.name == name)
            return &p;
    return nullptr;
}

// --- parsing ---------------------------------------------------------------

namespace {

using baselang::detail::Cursor;

struct ProcParser {
    Cursor& cur;
    const SchemaPtr& schema;

    NodePtr mk(std::string_view alt, treekit::FieldMap fields, const Span& sp) {
        return treekit::make_node(schema, "Proc", alt, std::move(fields), sp);
    }

    // Choice binds loosest, then sequencing, then guards and prefixes.
    NodePtr proc() {
        NodePtr left = seq();
        while (cur.peek().is_punct("[") && cur.peek(1).is_punct("]")) {
            Span sp = cur.take().span;
            cur.take(); // ']'
            left = mk("ExtChoice", {{"left", std::move(left)}, {"right", seq()}}, sp);
        }
        return left;
    }

    NodePtr seq() {
        NodePtr left = unary();
        while (cur.peek().is_punct(";")) {
            Span sp = cur.take().span;
            left = mk("Seq", {{"first", std::move(left)}, {"second", unary()}}, sp);
        }
        return left;
    }

    NodePtr unary() {
        const Token& tok = cur.peek();
        if (tok.is_punct("[") && !cur.peek(1).is_punct("]")) {
            Span sp = cur.take().span;
            NodePtr cond = baselang::detail::parse_exp(cur, schema);
            cur.expect_punct("]");
            cur.expect_punct("&");
            return mk("Guard", {{"cond", std::move(cond)}, {"body", unary()}}, sp);
        }
        if (tok.is(TokenKind::Ident) && cur.peek(1).is_punct("->") && !tok.is_ident("Stop") &&
            !tok.is_ident("Skip")) {
            if (baselang::detail::is_reserved(tok.text))
                cur.fail("'" + tok.text + "' is a reserved word and cannot name an event");
            const Token& event = cur.take();
            cur.take(); // '->'
            return mk("Prefix",
                      {{"event", treekit::Scalar(event.text)}, {"body", unary()}}, event.span);
        }
        return atom();
    }

    NodePtr atom() {
        const Token& tok = cur.peek();
        if (tok.is_ident("Stop"))
            return mk("Stop", {}, cur.take().span);
        if (tok.is_ident("Skip"))
            return mk("SkipProc", {}, cur.take().span);
        if (tok.is_punct("(")) {
            cur.take();
            NodePtr inner = proc();
            cur.expect_punct(")");
            return inner;
        }
        cur.fail("expected a process, got '" + tok.text + "'");
    }
};

} // namespace

ExtModule parse_procl(std::string_view text) {
    TokenBuffer buf{std::string(text), CommentStyle::Dashes};
    Cursor cur{buf};
    ExtModule em;
    em.schema = schema();
    em.base = baselang::detail::parse_module_body(cur, em.schema, {"processes"});

    if (cur.peek().is_ident("processes")) {
        cur.take();
        while (cur.peek().is(TokenKind::Ident)) {
            const Token& name = cur.take();
            if (baselang::detail::is_reserved(name.text))
                throw Error(ErrorCode::SyntaxError,
                            "'" + name.text + "' is a reserved word and cannot name a process",
                            name.span);
            cur.expect_punct("=");
            NodePtr body = ProcParser{cur, em.schema}.proc();
            NodePtr node = treekit::make_node(em.schema, "ProcDef", "ProcessDef",
                                              {{"name", treekit::Scalar(name.text)},
                                               {"body", body}},
                                              name.span);
            em.processes.push_back({name.text, std::move(node), std::move(body), name.span});
        }
    }
    if (!cur.at_end())
        cur.fail("unexpected input after process definitions");
    return em;
}

// --- analyses ------------------------------------------------------------

treekit::Analysis<Type, TcContext> make_ext_type_check_analysis() {
    using D = TcDispatcher;
    treekit::Analysis<Type, TcContext> a("ProcL");

    auto leaf = [](const Node&, TcContext&, D&) { return Type::None; };
    a.on("Proc", "Stop", leaf);
    a.on("Proc", "SkipProc", leaf);
    a.on("Proc", "Prefix", [](const Node& n, TcContext& ctx, D& d) {
        d.dispatch(n.child("body"), ctx);
        return Type::None;
    });
    a.on("Proc", "ExtChoice", [](const Node& n, TcContext& ctx, D& d) {
        d.dispatch(n.child("left"), ctx);
        d.dispatch(n.child("right"), ctx);
        return Type::None;
    });
    a.on("Proc", "Seq", [](const Node& n, TcContext& ctx, D& d) {
        d.dispatch(n.child("first"), ctx);
        d.dispatch(n.child("second"), ctx);
        return Type::None;
    });
    a.on("Proc", "Guard", [](const Node& n, TcContext& ctx, D& d) {
        // The guard expression is base territory; dispatching hands it to
        // whichever analysis owns the node's origin.
        Type t = d.dispatch(n.child("cond"), ctx);
        if (t != Type::Bool && t != Type::Unknown)
            ctx.report("process guard must be bool, got " +
                           std::string(baselang::type_name(t)),
                       n.child("cond")->span);
        d.dispatch(n.child("body"), ctx);
        return Type::None;
    });
    a.on("ProcDef", "ProcessDef", [](const Node& n, TcContext& ctx, D& d) {
        d.dispatch(n.child("body"), ctx);
        return Type::None;
    });

    return a;
}

treekit::Analysis<std::monostate, PoContext> make_ext_po_analysis() {
    using D = baselang::PoDispatcher;
    using R = std::monostate;
    treekit::Analysis<R, PoContext> a("ProcL");

    auto leaf = [](const Node&, PoContext&, D&) -> R { return {}; };
    a.on("Proc", "Stop", leaf);
    a.on("Proc", "SkipProc", leaf);
    a.on("Proc", "Prefix", [](const Node& n, PoContext& ctx, D& d) -> R {
        return d.dispatch(n.child("body"), ctx);
    });
    a.on("Proc", "ExtChoice", [](const Node& n, PoContext& ctx, D& d) -> R {
        d.dispatch(n.child("left"), ctx);
        d.dispatch(n.child("right"), ctx);
        return {};
    });
    a.on("Proc", "Seq", [](const Node& n, PoContext& ctx, D& d) -> R {
        d.dispatch(n.child("first"), ctx);
        d.dispatch(n.child("second"), ctx);
        return {};
    });
    a.on("Proc", "Guard", [](const Node& n, PoContext& ctx, D& d) -> R {
        d.dispatch(n.child("cond"), ctx);
        d.dispatch(n.child("body"), ctx);
        return {};
    });
    a.on("ProcDef", "ProcessDef", [](const Node& n, PoContext& ctx, D& d) -> R {
        return d.dispatch(n.child("body"), ctx);
    });

    return a;
}

ExtCheckResult type_check_ext(const ExtModule& em) {
    TcDispatcher d;
    d.register_analysis("BaseL", baselang::make_type_check_analysis());
    d.register_analysis("ProcL", make_ext_type_check_analysis());

    ExtCheckResult result;
    result.diagnostics = baselang::type_check_with(d, em.base);

    std::map<std::string, Type> globals;
    {
        std::vector<Diagnostic> scratch;
        for (const auto& def : em.base.values) {
            TcContext ctx{&em.base, {globals}, &scratch};
            globals.insert_or_assign(def.name, d.dispatch(def.init, ctx));
        }
    }

    std::set<std::string> seen;
    for (const auto& proc : em.processes) {
        if (!seen.insert(proc.name).second)
            result.diagnostics.push_back({"duplicate process name '" + proc.name + "'",
                                          proc.span});
        TcContext ctx{&em.base, {globals}, &result.diagnostics};
        d.dispatch(proc.node, ctx);
    }

    result.dispatch_log = d.log();
    result.dispatch_counters = d.counters();
    return result;
}

ExtPoResult gen_pos_ext(const ExtModule& em) {
    baselang::PoDispatcher d;
    d.register_analysis("BaseL", baselang::make_po_analysis());
    d.register_analysis("ProcL", make_ext_po_analysis());

    ExtPoResult result;
    result.obligations = baselang::gen_pos_with(d, em.base);

    baselang::TypeEnv globals;
    {
        std::vector<Diagnostic> scratch;
        std::map<std::string, Type> scope;
        for (const auto& def : em.base.values) {
            scope.insert_or_assign(def.name,
                                   baselang::check_exp(em.base, def.init, globals, scratch));
            globals.clear();
            for (const auto& [name, type] : scope)
                globals.emplace_back(name, type);
        }
    }

    for (const auto& proc : em.processes) {
        PoContext ctx{&em.base, globals, &result.obligations, proc.name};
        d.dispatch(proc.node, ctx);
    }

    result.dispatch_log = d.log();
    result.dispatch_counters = d.counters();
    return result;
}

// --- trace semantics ------------------------------------------------------

namespace {

/// Operational engine over process trees. Transitions build successor trees;
/// guard conditions go through the dispatcher and so re-enter the base
/// interpreter.
struct TraceEngine {
    const ExtModule& em;
    RunDispatcher d;
    std::map<std::string, Value> values;

    explicit TraceEngine(const ExtModule& em)
        : em(em), values(baselang::compute_value_env(em.base)) {
        d.register_analysis("BaseL", baselang::make_eval_analysis());
    }

    bool guard_holds(const NodePtr& cond) {
        EvalContext ctx;
        ctx.module = &em.base;
        ctx.scopes = {values};
        Value v = *d.dispatch(cond, ctx);
        return v.as_bool();
    }

    bool term(const NodePtr& p) {
        if (p->is("Proc", "Stop") || p->is("Proc", "Prefix"))
            return false;
        if (p->is("Proc", "SkipProc"))
            return true;
        if (p->is("Proc", "ExtChoice"))
            return term(p->child("left")) || term(p->child("right"));
        if (p->is("Proc", "Seq"))
            return term(p->child("first")) && term(p->child("second"));
        if (p->is("Proc", "Guard"))
            return guard_holds(p->child("cond")) && term(p->child("body"));
        throw Error(ErrorCode::EvalError,
                    "not a process: (" + p->category + ", " + p->alternative + ")", p->span);
    }

    std::vector<std::pair<std::string, NodePtr>> steps(const NodePtr& p) {
        std::vector<std::pair<std::string, NodePtr>> out;
        if (p->is("Proc", "Stop") || p->is("Proc", "SkipProc"))
            return out;
        if (p->is("Proc", "Prefix")) {
            out.emplace_back(p->str_field("event"), p->child("body"));
            return out;
        }
        if (p->is("Proc", "ExtChoice")) {
            out = steps(p->child("left"));
            for (auto& step : steps(p->child("right")))
                out.push_back(std::move(step));
            return out;
        }
        if (p->is("Proc", "Seq")) {
            NodePtr first = p->child("first");
            NodePtr second = p->child("second");
            for (auto& [event, succ] : steps(first))
                out.emplace_back(event,
                                 treekit::make_node(em.schema, "Proc", "Seq",
                                                    {{"first", succ}, {"second", second}},
                                                    p->span));
            if (term(first))
                for (auto& step : steps(second))
                    out.push_back(std::move(step));
            return out;
        }
        if (p->is("Proc", "Guard")) {
            if (guard_holds(p->child("cond")))
                return steps(p->child("body"));
            return out;
        }
        throw Error(ErrorCode::EvalError,
                    "not a process: (" + p->category + ", " + p->alternative + ")", p->span);
    }

    void enumerate(const NodePtr& p, Trace& trace, int depth_left, std::set<Trace>& out) {
        out.insert(trace);
        if (depth_left == 0)
            return;
        for (const auto& [event, succ] : steps(p)) {
            trace.push_back(event);
            enumerate(succ, trace, depth_left - 1, out);
            trace.pop_back();
        }
    }
};

} // namespace

bool proc_terminates(const ExtModule& em, const NodePtr& proc) {
    return TraceEngine(em).term(proc);
}

std::vector<std::pair<std::string, NodePtr>> proc_steps(const ExtModule& em,
                                                        const NodePtr& proc) {
    return TraceEngine(em).steps(proc);
}

std::set<Trace> enumerate_traces(const ExtModule& em, std::string_view process_name,
                                 int max_depth) {
    const ProcDef* proc = em.find_process(process_name);
    if (!proc)
        throw Error(ErrorCode::UnboundName,
                    "unknown process '" + std::string(process_name) + "'");
    if (max_depth < 0)
        throw Error(ErrorCode::BoundsError, "trace depth must be non-negative");
    TraceEngine engine{em};
    std::set<Trace> out;
    Trace trace;
    engine.enumerate(proc->body, trace, max_depth, out);
    return out;
}

std::string render_trace(const Trace& trace) {
    std::string out = "<";
    for (size_t i = 0; i < trace.size(); ++i) {
        if (i)
            out += ", ";
        out += trace[i];
    }
    return out + ">";
}

} // namespace treeforge::extlang
