#include "treeforge/baselang.hpp"

#include "treeforge/text.hpp"

#include <utility>

namespace treeforge::baselang {

namespace {

constexpr int kMaxCallDepth = 512;

bool assignable(Type expected, Type actual) {
    // Ints widen to reals; Unknown means an earlier diagnostic already fired.
    return actual == Type::Unknown || expected == actual ||
           (expected == Type::Real && actual == Type::Int);
}

std::map<std::string, Type> to_scope(const TypeEnv& env) {
    std::map<std::string, Type> scope;
    for (const auto& [name, type] : env)
        scope.insert_or_assign(name, type);
    return scope;
}

} // namespace

std::optional<Type> TcContext::lookup(std::string_view name) const {
    for (auto it = scopes.rbegin(); it != scopes.rend(); ++it)
        if (auto hit = it->find(std::string(name)); hit != it->end())
            return hit->second;
    return std::nullopt;
}

void TcContext::report(std::string message, const std::optional<Span>& span) {
    diags->push_back({std::move(message), span});
}

// --- type checking -----------------------------------------------------

namespace {

Type tc_numeric_op(const Node& node, TcContext& ctx, const std::string& op, Type lt, Type rt) {
    auto numeric = [](Type t) { return t == Type::Int || t == Type::Real; };
    if ((lt != Type::Unknown && !numeric(lt)) || (rt != Type::Unknown && !numeric(rt))) {
        ctx.report("operator '" + op + "' needs numeric operands, got " +
                       std::string(type_name(lt)) + " and " + std::string(type_name(rt)),
                   node.span);
        return Type::Unknown;
    }
    if (lt == Type::Unknown || rt == Type::Unknown)
        return Type::Unknown;
    return (lt == Type::Real || rt == Type::Real) ? Type::Real : Type::Int;
}

Type tc_binary(const Node& node, TcContext& ctx, TcDispatcher& d) {
    const std::string& op = node.str_field("op");
    Type lt = d.dispatch(node.child("left"), ctx);
    Type rt = d.dispatch(node.child("right"), ctx);
    auto numeric = [](Type t) { return t == Type::Int || t == Type::Real; };
    auto known = [](Type t) { return t != Type::Unknown; };

    if (op == "+" || op == "-" || op == "*")
        return tc_numeric_op(node, ctx, op, lt, rt);
    if (op == "/") {
        tc_numeric_op(node, ctx, op, lt, rt);
        return Type::Real;
    }
    if (op == "div" || op == "mod") {
        if ((known(lt) && lt != Type::Int) || (known(rt) && rt != Type::Int))
            ctx.report("operator '" + op + "' needs int operands, got " +
                           std::string(type_name(lt)) + " and " + std::string(type_name(rt)),
                       node.span);
        return Type::Int;
    }
    if (op == "<" || op == "<=" || op == ">" || op == ">=") {
        if ((known(lt) && !numeric(lt)) || (known(rt) && !numeric(rt)))
            ctx.report("operator '" + op + "' needs numeric operands, got " +
                           std::string(type_name(lt)) + " and " + std::string(type_name(rt)),
                       node.span);
        return Type::Bool;
    }
    if (op == "=" || op == "<>") {
        bool ok = (numeric(lt) && numeric(rt)) || (lt == Type::Bool && rt == Type::Bool) ||
                  !known(lt) || !known(rt);
        if (!ok)
            ctx.report("cannot compare " + std::string(type_name(lt)) + " with " +
                           std::string(type_name(rt)),
                       node.span);
        return Type::Bool;
    }
    // and / or
    if ((known(lt) && lt != Type::Bool) || (known(rt) && rt != Type::Bool))
        ctx.report("operator '" + op + "' needs bool operands, got " +
                       std::string(type_name(lt)) + " and " + std::string(type_name(rt)),
                   node.span);
    return Type::Bool;
}

Type tc_if_exp(const Node& node, TcContext& ctx, TcDispatcher& d) {
    Type ct = d.dispatch(node.child("cond"), ctx);
    if (ct != Type::Bool && ct != Type::Unknown)
        ctx.report("if condition must be bool, got " + std::string(type_name(ct)),
                   node.child("cond")->span);
    Type tt = d.dispatch(node.child("thenBranch"), ctx);
    Type et = d.dispatch(node.child("elseBranch"), ctx);
    if (tt == Type::Unknown)
        return et;
    if (et == Type::Unknown || tt == et)
        return tt;
    auto numeric = [](Type t) { return t == Type::Int || t == Type::Real; };
    if (numeric(tt) && numeric(et))
        return Type::Real;
    ctx.report("if branches have different types: " + std::string(type_name(tt)) + " and " +
                   std::string(type_name(et)),
               node.span);
    return Type::Unknown;
}

Type tc_apply(const Node& node, TcContext& ctx, TcDispatcher& d) {
    const std::string& callee = node.str_field("callee");
    const auto& args = node.list("args");
    std::vector<Type> arg_types;
    for (const auto& arg : args)
        arg_types.push_back(d.dispatch(arg, ctx));
    const FunctionDef* fn = ctx.module->find_function(callee);
    if (!fn) {
        ctx.report("unknown function '" + callee + "'", node.span);
        return Type::Unknown;
    }
    if (args.size() != fn->params.size()) {
        ctx.report("function '" + callee + "' expects " +
                       format_int(static_cast<std::int64_t>(fn->params.size())) +
                       " arguments, got " + format_int(static_cast<std::int64_t>(args.size())),
                   node.span);
        return fn->result_type;
    }
    for (size_t i = 0; i < args.size(); ++i)
        if (!assignable(fn->params[i].type, arg_types[i]))
            ctx.report("argument " + format_int(static_cast<std::int64_t>(i + 1)) + " of '" +
                           callee + "' must be " + std::string(type_name(fn->params[i].type)) +
                           ", got " + std::string(type_name(arg_types[i])),
                       args[i]->span);
    return fn->result_type;
}

} // namespace

treekit::Analysis<Type, TcContext> make_type_check_analysis() {
    using D = TcDispatcher;
    treekit::Analysis<Type, TcContext> a("BaseL");

    a.on("Exp", "IntLit", [](const Node&, TcContext&, D&) { return Type::Int; });
    a.on("Exp", "RealLit", [](const Node&, TcContext&, D&) { return Type::Real; });
    a.on("Exp", "BoolLit", [](const Node&, TcContext&, D&) { return Type::Bool; });
    a.on("Exp", "VarRef", [](const Node& n, TcContext& ctx, D&) {
        if (auto type = ctx.lookup(n.str_field("name")))
            return *type;
        ctx.report("unbound name '" + n.str_field("name") + "'", n.span);
        return Type::Unknown;
    });
    a.on("Exp", "Binary", tc_binary);
    a.on("Exp", "Unary", [](const Node& n, TcContext& ctx, D& d) {
        Type t = d.dispatch(n.child("operand"), ctx);
        if (t != Type::Bool && t != Type::Unknown)
            ctx.report("operator 'not' needs a bool operand, got " +
                           std::string(type_name(t)),
                       n.span);
        return Type::Bool;
    });
    a.on("Exp", "IfExp", tc_if_exp);
    a.on("Exp", "LetExp", [](const Node& n, TcContext& ctx, D& d) {
        Type bound = d.dispatch(n.child("bound"), ctx);
        ctx.scopes.push_back({{n.str_field("name"), bound}});
        Type body = d.dispatch(n.child("body"), ctx);
        ctx.scopes.pop_back();
        return body;
    });
    a.on("Exp", "Apply", tc_apply);

    a.on("Stmt", "Assign", [](const Node& n, TcContext& ctx, D& d) {
        Type vt = d.dispatch(n.child("value"), ctx);
        const std::string& target = n.str_field("target");
        const StateDef* st = ctx.module->find_state(target);
        if (!st)
            ctx.report("assignment to unknown state variable '" + target + "'", n.span);
        else if (!assignable(st->type, vt))
            ctx.report("cannot assign " + std::string(type_name(vt)) + " to '" + target +
                           "' of type " + std::string(type_name(st->type)),
                       n.span);
        return Type::None;
    });
    a.on("Stmt", "SeqStmt", [](const Node& n, TcContext& ctx, D& d) {
        d.dispatch(n.child("first"), ctx);
        d.dispatch(n.child("second"), ctx);
        return Type::None;
    });
    a.on("Stmt", "IfStmt", [](const Node& n, TcContext& ctx, D& d) {
        Type ct = d.dispatch(n.child("cond"), ctx);
        if (ct != Type::Bool && ct != Type::Unknown)
            ctx.report("if condition must be bool, got " + std::string(type_name(ct)),
                       n.child("cond")->span);
        d.dispatch(n.child("thenBranch"), ctx);
        d.dispatch(n.child("elseBranch"), ctx);
        return Type::None;
    });
    a.on("Stmt", "ReturnStmt", [](const Node& n, TcContext& ctx, D& d) {
        d.dispatch(n.child("value"), ctx);
        return Type::None;
    });
    a.on("Stmt", "SkipStmt", [](const Node&, TcContext&, D&) { return Type::None; });

    return a;
}

namespace {

/// Value-definition types, in declaration order; diagnostics go to the sink.
std::map<std::string, Type> value_type_scope(const BaseModule& module,
                                             std::vector<Diagnostic>& diags,
                                             TcDispatcher& d) {
    std::map<std::string, Type> scope;
    for (const auto& def : module.values) {
        TcContext ctx{&module, {scope}, &diags};
        Type t = d.dispatch(def.init, ctx);
        scope.insert_or_assign(def.name, t);
    }
    return scope;
}

void check_bool(const BaseModule& module, TcDispatcher& d, const NodePtr& exp,
                std::vector<std::map<std::string, Type>> scopes,
                std::vector<Diagnostic>& diags, std::string_view what) {
    TcContext ctx{&module, std::move(scopes), &diags};
    Type t = d.dispatch(exp, ctx);
    if (t != Type::Bool && t != Type::Unknown)
        diags.push_back({std::string(what) + " must be bool, got " +
                             std::string(type_name(t)),
                         exp->span});
}

} // namespace

std::vector<Diagnostic> type_check(const BaseModule& module) {
    TcDispatcher d;
    return type_check_with(d, module);
}

std::vector<Diagnostic> type_check_with(TcDispatcher& d, const BaseModule& module) {
    std::vector<Diagnostic> diags;
    if (!d.find_analysis("BaseL"))
        d.register_analysis("BaseL", make_type_check_analysis());

    std::map<std::string, Span> names;
    auto claim = [&](const std::string& name, const Span& span) {
        if (!names.emplace(name, span).second)
            diags.push_back({"duplicate top-level name '" + name + "'", span});
    };
    for (const auto& def : module.values)
        claim(def.name, def.span);
    for (const auto& def : module.states)
        claim(def.name, def.span);
    for (const auto& def : module.functions)
        claim(def.name, def.span);
    for (const auto& def : module.operations)
        claim(def.name, def.span);
    for (const auto& def : module.traces)
        claim(def.name, def.span);

    std::map<std::string, Type> globals = value_type_scope(module, diags, d);

    std::map<std::string, Type> states;
    for (const auto& def : module.states) {
        TcContext ctx{&module, {globals}, &diags};
        Type t = d.dispatch(def.init, ctx);
        if (!assignable(def.type, t))
            diags.push_back({"state '" + def.name + "' initialiser has type " +
                                 std::string(type_name(t)) + ", declared " +
                                 std::string(type_name(def.type)),
                             def.span});
        states.insert_or_assign(def.name, def.type);
    }

    auto param_scope = [&diags](const auto& def) {
        std::map<std::string, Type> scope;
        for (const auto& p : def.params)
            if (!scope.emplace(p.name, p.type).second)
                diags.push_back({"duplicate parameter '" + p.name + "' in '" + def.name + "'",
                                 p.span});
        return scope;
    };

    for (const auto& fn : module.functions) {
        std::map<std::string, Type> params = param_scope(fn);
        if (fn.pre)
            check_bool(module, d, fn.pre, {globals, params}, diags,
                       "pre condition of '" + fn.name + "'");
        if (fn.body) {
            TcContext ctx{&module, {globals, params}, &diags};
            Type bt = d.dispatch(fn.body, ctx);
            if (!assignable(fn.result_type, bt))
                diags.push_back({"body of '" + fn.name + "' has type " +
                                     std::string(type_name(bt)) + ", result type is " +
                                     std::string(type_name(fn.result_type)),
                                 fn.span});
        }
        if (fn.post) {
            std::map<std::string, Type> post_scope = params;
            post_scope.insert_or_assign(fn.result_name, fn.result_type);
            check_bool(module, d, fn.post, {globals, post_scope}, diags,
                       "post condition of '" + fn.name + "'");
        }
    }

    for (const auto& op : module.operations) {
        std::map<std::string, Type> params = param_scope(op);
        if (op.pre)
            check_bool(module, d, op.pre, {globals, states, params}, diags,
                       "pre condition of '" + op.name + "'");
        TcContext ctx{&module, {globals, states, params}, &diags};
        d.dispatch(op.body, ctx);
    }

    return diags;
}

Type check_exp(const BaseModule& module, const NodePtr& exp, const TypeEnv& env,
               std::vector<Diagnostic>& diags) {
    TcDispatcher d;
    d.register_analysis("BaseL", make_type_check_analysis());
    std::vector<Diagnostic> scratch;
    std::map<std::string, Type> globals = value_type_scope(module, scratch, d);
    TcContext ctx{&module, {std::move(globals), to_scope(env)}, &diags};
    return d.dispatch(exp, ctx);
}

// --- evaluation ----------------------------------------------------------

namespace {

Value coerce(const Value& value, Type expected, std::string_view what,
             const std::optional<Span>& span) {
    if (expected == Type::Real && value.is_int())
        return Value::of_real(static_cast<double>(value.as_int()));
    if ((expected == Type::Int && value.is_int()) || (expected == Type::Real && value.is_real()) ||
        (expected == Type::Bool && value.is_bool()))
        return value;
    throw Error(ErrorCode::EvalError,
                std::string(what) + " must be " + std::string(type_name(expected)) + ", got " +
                    value.render(),
                span);
}

struct ScopeFrame {
    EvalContext& ctx;
    explicit ScopeFrame(EvalContext& ctx, std::map<std::string, Value> frame) : ctx(ctx) {
        ctx.scopes.push_back(std::move(frame));
    }
    ~ScopeFrame() { ctx.scopes.pop_back(); }
};

std::map<std::string, Value> bind_args(const std::vector<Param>& params,
                                       const std::vector<Value>& args, std::string_view name,
                                       const std::optional<Span>& span) {
    if (args.size() != params.size())
        throw Error(ErrorCode::EvalError,
                    "'" + std::string(name) + "' expects " +
                        format_int(static_cast<std::int64_t>(params.size())) +
                        " arguments, got " + format_int(static_cast<std::int64_t>(args.size())),
                    span);
    std::map<std::string, Value> frame;
    for (size_t i = 0; i < params.size(); ++i)
        frame.emplace(params[i].name,
                      coerce(args[i], params[i].type,
                             "argument '" + params[i].name + "' of '" + std::string(name) + "'",
                             span));
    return frame;
}

std::string call_text(std::string_view name, const std::vector<Value>& args) {
    std::string out = std::string(name) + "(";
    for (size_t i = 0; i < args.size(); ++i) {
        if (i)
            out += ", ";
        out += args[i].render();
    }
    return out + ")";
}

Value solve_search(RunDispatcher& d, EvalContext& ctx, const FunctionDef& fn,
                   const std::optional<Span>& span) {
    // Ascending scan keeps the result deterministic: the smallest value in
    // bounds that satisfies the post condition wins.
    if (fn.result_type != Type::Int)
        throw Error(ErrorCode::ImplicitEvaluationError,
                    "implicit function '" + fn.name + "' has a non-int result; only int "
                    "results can be searched",
                    span);
    for (std::int64_t r = ctx.bounds.lo; r <= ctx.bounds.hi; ++r) {
        ctx.scopes.back().insert_or_assign(fn.result_name, Value::of_int(r));
        Value ok = *d.dispatch(fn.post, ctx);
        if (ok.as_bool())
            return Value::of_int(r);
    }
    throw Error(ErrorCode::NoSolutionInBounds,
                "no result in [" + format_int(ctx.bounds.lo) + ", " + format_int(ctx.bounds.hi) +
                    "] satisfies the post condition of '" + fn.name + "'",
                span);
}

Value call_function(RunDispatcher& d, EvalContext& ctx, const FunctionDef& fn,
                    const std::vector<Value>& args, const std::optional<Span>& span) {
    if (++ctx.depth > kMaxCallDepth) {
        --ctx.depth;
        throw Error(ErrorCode::EvalError, "call depth limit exceeded in '" + fn.name + "'",
                    span);
    }
    std::map<std::string, Value> frame = bind_args(fn.params, args, fn.name, span);

    // Function bodies see the module values and their own parameters only:
    // no state, no caller locals.
    std::vector<std::map<std::string, Value>> saved_scopes = std::move(ctx.scopes);
    State* saved_state = ctx.state;
    bool saved_returned = ctx.returned;
    RunResult saved_return = std::move(ctx.return_value);
    ctx.scopes = {saved_scopes.empty() ? std::map<std::string, Value>{} : saved_scopes.front(),
                  std::move(frame)};
    ctx.state = nullptr;

    auto restore = [&] {
        ctx.scopes = std::move(saved_scopes);
        ctx.state = saved_state;
        ctx.returned = saved_returned;
        ctx.return_value = std::move(saved_return);
        --ctx.depth;
    };

    try {
        if (fn.pre) {
            Value ok = *d.dispatch(fn.pre, ctx);
            if (!ok.as_bool())
                throw Error(ErrorCode::PreconditionFailure,
                            "precondition of '" + fn.name + "' violated for " +
                                call_text(fn.name, args),
                            span ? span : fn.pre->span);
        }
        Value result;
        if (fn.is_implicit()) {
            if (ctx.mode == EvalMode::Strict)
                throw Error(ErrorCode::ImplicitEvaluationError,
                            "function '" + fn.name +
                                "' is implicitly defined and cannot be evaluated directly",
                            span ? span : std::optional<Span>(fn.span));
            result = solve_search(d, ctx, fn, span);
        } else {
            result = coerce(*d.dispatch(fn.body, ctx), fn.result_type,
                            "result of '" + fn.name + "'", span);
            if (fn.post) {
                ctx.scopes.back().insert_or_assign(fn.result_name, result);
                Value ok = *d.dispatch(fn.post, ctx);
                if (!ok.as_bool())
                    throw Error(ErrorCode::PostconditionFailure,
                                "postcondition of '" + fn.name + "' violated for " +
                                    call_text(fn.name, args),
                                span ? span : fn.post->span);
            }
        }
        restore();
        return result;
    } catch (...) {
        restore();
        throw;
    }
}

RunResult eval_var_ref(const Node& n, EvalContext& ctx, RunDispatcher&) {
    const std::string& name = n.str_field("name");
    for (auto it = ctx.scopes.rbegin(); it != ctx.scopes.rend(); ++it)
        if (auto hit = it->find(name); hit != it->end())
            return hit->second;
    if (ctx.state) {
        if (auto hit = ctx.state->find(name); hit != ctx.state->end()) {
            if (ctx.observer)
                ctx.observer(name, Access::Read, hit->second);
            return hit->second;
        }
    }
    throw Error(ErrorCode::UnboundName, "unbound name '" + name + "'", n.span);
}

RunResult eval_binary(const Node& n, EvalContext& ctx, RunDispatcher& d) {
    const std::string& op = n.str_field("op");
    if (op == "and" || op == "or") {
        bool left = d.dispatch(n.child("left"), ctx)->as_bool();
        if (op == "and" && !left)
            return Value::of_bool(false);
        if (op == "or" && left)
            return Value::of_bool(true);
        return Value::of_bool(d.dispatch(n.child("right"), ctx)->as_bool());
    }
    Value left = *d.dispatch(n.child("left"), ctx);
    Value right = *d.dispatch(n.child("right"), ctx);
    return apply_binop(op, left, right, n.span);
}

} // namespace

treekit::Analysis<RunResult, EvalContext> make_eval_analysis() {
    using D = RunDispatcher;
    treekit::Analysis<RunResult, EvalContext> a("BaseL");

    a.on("Exp", "IntLit", [](const Node& n, EvalContext&, D&) -> RunResult {
        return Value::of_int(n.int_field("value"));
    });
    a.on("Exp", "RealLit", [](const Node& n, EvalContext&, D&) -> RunResult {
        return Value::of_real(n.real_field("value"));
    });
    a.on("Exp", "BoolLit", [](const Node& n, EvalContext&, D&) -> RunResult {
        return Value::of_bool(n.bool_field("value"));
    });
    a.on("Exp", "VarRef", eval_var_ref);
    a.on("Exp", "Binary", eval_binary);
    a.on("Exp", "Unary", [](const Node& n, EvalContext& ctx, D& d) -> RunResult {
        return apply_unop(n.str_field("op"), *d.dispatch(n.child("operand"), ctx), n.span);
    });
    a.on("Exp", "IfExp", [](const Node& n, EvalContext& ctx, D& d) -> RunResult {
        bool cond = d.dispatch(n.child("cond"), ctx)->as_bool();
        return d.dispatch(n.child(cond ? "thenBranch" : "elseBranch"), ctx);
    });
    a.on("Exp", "LetExp", [](const Node& n, EvalContext& ctx, D& d) -> RunResult {
        Value bound = *d.dispatch(n.child("bound"), ctx);
        ScopeFrame frame{ctx, {{n.str_field("name"), std::move(bound)}}};
        return d.dispatch(n.child("body"), ctx);
    });
    a.on("Exp", "Apply", [](const Node& n, EvalContext& ctx, D& d) -> RunResult {
        const std::string& callee = n.str_field("callee");
        const FunctionDef* fn = ctx.module->find_function(callee);
        if (!fn)
            throw Error(ErrorCode::UnboundName, "unknown function '" + callee + "'", n.span);
        std::vector<Value> args;
        for (const auto& arg : n.list("args"))
            args.push_back(*d.dispatch(arg, ctx));
        return call_function(d, ctx, *fn, args, n.span);
    });

    a.on("Stmt", "Assign", [](const Node& n, EvalContext& ctx, D& d) -> RunResult {
        Value value = *d.dispatch(n.child("value"), ctx);
        const std::string& target = n.str_field("target");
        if (!ctx.state || !ctx.state->count(target))
            throw Error(ErrorCode::UnboundName,
                        "assignment to unknown state variable '" + target + "'", n.span);
        const StateDef* st = ctx.module->find_state(target);
        Value stored = st ? coerce(value, st->type, "state variable '" + target + "'", n.span)
                          : value;
        (*ctx.state)[target] = stored;
        if (ctx.observer)
            ctx.observer(target, Access::Write, stored);
        return std::nullopt;
    });
    a.on("Stmt", "SeqStmt", [](const Node& n, EvalContext& ctx, D& d) -> RunResult {
        d.dispatch(n.child("first"), ctx);
        if (!ctx.returned)
            d.dispatch(n.child("second"), ctx);
        return std::nullopt;
    });
    a.on("Stmt", "IfStmt", [](const Node& n, EvalContext& ctx, D& d) -> RunResult {
        bool cond = d.dispatch(n.child("cond"), ctx)->as_bool();
        d.dispatch(n.child(cond ? "thenBranch" : "elseBranch"), ctx);
        return std::nullopt;
    });
    a.on("Stmt", "ReturnStmt", [](const Node& n, EvalContext& ctx, D& d) -> RunResult {
        Value value = *d.dispatch(n.child("value"), ctx);
        ctx.returned = true;
        ctx.return_value = std::move(value);
        return std::nullopt;
    });
    a.on("Stmt", "SkipStmt", [](const Node&, EvalContext&, D&) -> RunResult {
        return std::nullopt;
    });

    return a;
}

namespace {

RunDispatcher make_run_dispatcher() {
    RunDispatcher d;
    d.register_analysis("BaseL", make_eval_analysis());
    return d;
}

EvalContext eval_context(const BaseModule& module, EvalMode mode, SolveBounds bounds,
                         std::vector<std::map<std::string, Value>> scopes,
                         State* state = nullptr, AccessObserver observer = nullptr) {
    EvalContext ctx;
    ctx.module = &module;
    ctx.mode = mode;
    ctx.bounds = bounds;
    ctx.scopes = std::move(scopes);
    ctx.state = state;
    ctx.observer = std::move(observer);
    return ctx;
}

} // namespace

std::map<std::string, Value> compute_value_env(const BaseModule& module) {
    RunDispatcher d = make_run_dispatcher();
    std::map<std::string, Value> env;
    for (const auto& def : module.values) {
        EvalContext ctx = eval_context(module, EvalMode::Strict, {}, {env});
        env.insert_or_assign(def.name, *d.dispatch(def.init, ctx));
    }
    return env;
}

Value evaluate(const BaseModule& module, std::string_view call_text, EvalMode mode,
               SolveBounds bounds) {
    ParsedCall call = parse_call(call_text);
    const FunctionDef* fn = module.find_function(call.name);
    if (!fn)
        throw Error(ErrorCode::UnboundName, "unknown function '" + call.name + "'");
    RunDispatcher d = make_run_dispatcher();
    EvalContext ctx = eval_context(module, mode, bounds, {compute_value_env(module)});
    return call_function(d, ctx, *fn, call.args, std::nullopt);
}

Value solve_implicit(const BaseModule& module, const FunctionDef& fn,
                     const std::vector<Value>& args, SolveBounds bounds) {
    if (!fn.is_implicit())
        throw Error(ErrorCode::InvalidConfig,
                    "'" + fn.name + "' has an explicit body; nothing to solve");
    RunDispatcher d = make_run_dispatcher();
    EvalContext ctx = eval_context(module, EvalMode::Solve, bounds, {compute_value_env(module)});
    return call_function(d, ctx, fn, args, std::nullopt);
}

Value evaluate_exp(const BaseModule& module, const NodePtr& exp,
                   const std::map<std::string, Value>& env) {
    RunDispatcher d = make_run_dispatcher();
    EvalContext ctx = eval_context(module, EvalMode::Strict, {}, {compute_value_env(module), env});
    return *d.dispatch(exp, ctx);
}

State initial_state(const BaseModule& module) {
    RunDispatcher d = make_run_dispatcher();
    std::map<std::string, Value> values = compute_value_env(module);
    State state;
    for (const auto& def : module.states) {
        EvalContext ctx = eval_context(module, EvalMode::Strict, {}, {values});
        state.insert_or_assign(def.name,
                               coerce(*d.dispatch(def.init, ctx), def.type,
                                      "state variable '" + def.name + "'", def.span));
    }
    return state;
}

ExecResult exec_operation(const BaseModule& module, const State& state,
                          std::string_view op_name, const std::vector<Value>& args,
                          const AccessObserver& observer) {
    const OperationDef* op = module.find_operation(op_name);
    if (!op)
        throw Error(ErrorCode::UnboundName, "unknown operation '" + std::string(op_name) + "'");
    RunDispatcher d = make_run_dispatcher();
    State work = state;
    EvalContext ctx = eval_context(
        module, EvalMode::Strict, {},
        {compute_value_env(module), bind_args(op->params, args, op->name, op->span)}, &work,
        observer);
    if (op->pre) {
        Value ok = *d.dispatch(op->pre, ctx);
        if (!ok.as_bool())
            throw Error(ErrorCode::PreconditionFailure,
                        "precondition of '" + op->name + "' violated for " +
                            call_text(op->name, args),
                        op->pre->span);
    }
    d.dispatch(op->body, ctx);
    return {std::move(work), std::move(ctx.return_value)};
}

// --- proof obligations -----------------------------------------------------

namespace {

bool nonzero_literal(const NodePtr& e) {
    if (e->is("Exp", "IntLit"))
        return e->int_field("value") != 0;
    if (e->is("Exp", "RealLit"))
        return e->real_field("value") != 0.0;
    return false;
}

Type quiet_type_of(const PoContext& ctx, const NodePtr& exp) {
    std::vector<Diagnostic> scratch;
    return check_exp(*ctx.module, exp, ctx.env, scratch);
}

std::monostate po_binary(const Node& n, PoContext& ctx, PoDispatcher& d) {
    const std::string& op = n.str_field("op");
    if (op == "/" || op == "div" || op == "mod") {
        NodePtr divisor = n.child("right");
        if (!nonzero_literal(divisor))
            ctx.out->push_back({Obligation::Kind::DivByZero, n.span,
                                render_exp(divisor) + " <> 0", ctx.context_name, ctx.env});
    }
    d.dispatch(n.child("left"), ctx);
    d.dispatch(n.child("right"), ctx);
    return {};
}

} // namespace

treekit::Analysis<std::monostate, PoContext> make_po_analysis() {
    using D = PoDispatcher;
    using R = std::monostate;
    treekit::Analysis<R, PoContext> a("BaseL");

    auto leaf = [](const Node&, PoContext&, D&) -> R { return {}; };
    a.on("Exp", "IntLit", leaf);
    a.on("Exp", "RealLit", leaf);
    a.on("Exp", "BoolLit", leaf);
    a.on("Exp", "VarRef", leaf);
    a.on("Exp", "Binary", po_binary);
    a.on("Exp", "Unary", [](const Node& n, PoContext& ctx, D& d) -> R {
        return d.dispatch(n.child("operand"), ctx);
    });
    a.on("Exp", "IfExp", [](const Node& n, PoContext& ctx, D& d) -> R {
        d.dispatch(n.child("cond"), ctx);
        d.dispatch(n.child("thenBranch"), ctx);
        d.dispatch(n.child("elseBranch"), ctx);
        return {};
    });
    a.on("Exp", "LetExp", [](const Node& n, PoContext& ctx, D& d) -> R {
        d.dispatch(n.child("bound"), ctx);
        Type bound_type = quiet_type_of(ctx, n.child("bound"));
        ctx.env.emplace_back(n.str_field("name"), bound_type);
        d.dispatch(n.child("body"), ctx);
        ctx.env.pop_back();
        return {};
    });
    a.on("Exp", "Apply", [](const Node& n, PoContext& ctx, D& d) -> R {
        for (const auto& arg : n.list("args"))
            d.dispatch(arg, ctx);
        return {};
    });

    a.on("Stmt", "Assign", [](const Node& n, PoContext& ctx, D& d) -> R {
        return d.dispatch(n.child("value"), ctx);
    });
    a.on("Stmt", "SeqStmt", [](const Node& n, PoContext& ctx, D& d) -> R {
        d.dispatch(n.child("first"), ctx);
        d.dispatch(n.child("second"), ctx);
        return {};
    });
    a.on("Stmt", "IfStmt", [](const Node& n, PoContext& ctx, D& d) -> R {
        d.dispatch(n.child("cond"), ctx);
        d.dispatch(n.child("thenBranch"), ctx);
        d.dispatch(n.child("elseBranch"), ctx);
        return {};
    });
    a.on("Stmt", "ReturnStmt", [](const Node& n, PoContext& ctx, D& d) -> R {
        return d.dispatch(n.child("value"), ctx);
    });
    a.on("Stmt", "SkipStmt", [](const Node&, PoContext&, D&) -> R { return {}; });

    return a;
}

namespace {

TypeEnv global_type_env(const BaseModule& module) {
    TypeEnv env;
    std::vector<Diagnostic> scratch;
    TcDispatcher d;
    d.register_analysis("BaseL", make_type_check_analysis());
    std::map<std::string, Type> scope = value_type_scope(module, scratch, d);
    for (const auto& [name, type] : scope)
        env.emplace_back(name, type);
    return env;
}

TypeEnv with_params(TypeEnv env, const std::vector<Param>& params) {
    for (const auto& p : params)
        env.emplace_back(p.name, p.type);
    return env;
}

} // namespace

std::vector<Obligation> gen_pos(const BaseModule& module) {
    PoDispatcher d;
    return gen_pos_with(d, module);
}

std::vector<Obligation> gen_pos_with(PoDispatcher& d, const BaseModule& module) {
    std::vector<Obligation> out;
    if (!d.find_analysis("BaseL"))
        d.register_analysis("BaseL", make_po_analysis());
    TypeEnv globals = global_type_env(module);

    auto walk = [&](const NodePtr& node, TypeEnv env, const std::string& context) {
        if (!node)
            return;
        PoContext ctx{&module, std::move(env), &out, context};
        d.dispatch(node, ctx);
    };

    for (const auto& def : module.values)
        walk(def.init, globals, def.name);
    for (const auto& def : module.states)
        walk(def.init, globals, def.name);

    for (const auto& fn : module.functions) {
        TypeEnv env = with_params(globals, fn.params);
        TypeEnv post_env = env;
        post_env.emplace_back(fn.result_name, fn.result_type);
        if (fn.is_implicit())
            out.push_back({Obligation::Kind::ImplicitSatisfiability, fn.span,
                           "exists " + fn.result_name + " : " + render_exp(fn.post), fn.name,
                           post_env});
        walk(fn.pre, env, fn.name);
        walk(fn.body, env, fn.name);
        walk(fn.post, post_env, fn.name);
    }

    TypeEnv state_env = globals;
    for (const auto& st : module.states)
        state_env.emplace_back(st.name, st.type);
    for (const auto& op : module.operations) {
        TypeEnv env = with_params(state_env, op.params);
        walk(op.pre, env, op.name);
        walk(op.body, env, op.name);
    }

    return out;
}

std::vector<Obligation> gen_pos_exp(const BaseModule& module, const NodePtr& exp,
                                    const TypeEnv& env, std::string context_name) {
    std::vector<Obligation> out;
    PoDispatcher d;
    d.register_analysis("BaseL", make_po_analysis());
    PoContext ctx{&module, env, &out, std::move(context_name)};
    d.dispatch(exp, ctx);
    return out;
}

} // namespace treeforge::baselang
