#pragma once

// Test-only interpreter for the code-generation IR. Built on the generic
// dispatcher so extension schemas can plug in handlers for their own nodes.

#include "treeforge/irgen.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tftest {

using treeforge::Error;
using treeforge::ErrorCode;
using treeforge::Span;
using treeforge::baselang::Type;
using treeforge::baselang::Value;
using treeforge::irgen::IrFunc;
using treeforge::irgen::IrModule;
using treeforge::treekit::Node;
using treeforge::treekit::NodePtr;

struct IrEvalContext {
    const IrModule* module = nullptr;
    std::vector<std::map<std::string, Value>> frames; // innermost last
    int depth = 0;
};

using IrDispatcher = treeforge::treekit::Dispatcher<Value, IrEvalContext>;
using IrAnalysis = treeforge::treekit::Analysis<Value, IrEvalContext>;

inline Value coerce_ir(Type target, Value v, const std::optional<Span>& span) {
    if (target == Type::Real && v.is_int())
        return Value::of_real(v.as_real());
    bool ok = (target == Type::Int && v.is_int()) || (target == Type::Real && v.is_real()) ||
              (target == Type::Bool && v.is_bool());
    if (!ok)
        throw Error(ErrorCode::EvalError,
                    "expected " + std::string(treeforge::baselang::type_name(target)) +
                        ", got " + std::string(treeforge::baselang::type_name(v.type())),
                    span);
    return v;
}

inline IrAnalysis make_ir_eval_analysis() {
    IrAnalysis a("IrL");
    a.on("IrExp", "Const", [](const Node& n, IrEvalContext&, IrDispatcher&) {
        return treeforge::irgen::parse_const(n.str_field("value"), n.span);
    });
    a.on("IrExp", "VarRef", [](const Node& n, IrEvalContext& ctx, IrDispatcher&) {
        const std::string& name = n.str_field("name");
        for (auto it = ctx.frames.rbegin(); it != ctx.frames.rend(); ++it) {
            auto hit = it->find(name);
            if (hit != it->end())
                return hit->second;
        }
        throw Error(ErrorCode::UnboundName, "unbound name '" + name + "'", n.span);
    });
    a.on("IrExp", "BinOp", [](const Node& n, IrEvalContext& ctx, IrDispatcher& d) {
        const std::string& op = n.str_field("op");
        if (op == "and" || op == "or") {
            Value l = d.dispatch(n.child("left"), ctx);
            if (!l.is_bool())
                throw Error(ErrorCode::EvalError,
                            "operator '" + op + "' needs bool operands", n.span);
            if (op == "and" && !l.as_bool())
                return Value::of_bool(false);
            if (op == "or" && l.as_bool())
                return Value::of_bool(true);
            Value r = d.dispatch(n.child("right"), ctx);
            if (!r.is_bool())
                throw Error(ErrorCode::EvalError,
                            "operator '" + op + "' needs bool operands", n.span);
            return r;
        }
        Value l = d.dispatch(n.child("left"), ctx);
        Value r = d.dispatch(n.child("right"), ctx);
        return treeforge::baselang::apply_binop(op, l, r, n.span);
    });
    a.on("IrExp", "If", [](const Node& n, IrEvalContext& ctx, IrDispatcher& d) {
        Value c = d.dispatch(n.child("cond"), ctx);
        if (!c.is_bool())
            throw Error(ErrorCode::EvalError, "condition must be bool", n.span);
        return d.dispatch(n.child(c.as_bool() ? "thenBranch" : "elseBranch"), ctx);
    });
    a.on("IrExp", "Let", [](const Node& n, IrEvalContext& ctx, IrDispatcher& d) {
        Value bound = d.dispatch(n.child("bound"), ctx);
        ctx.frames.push_back({{n.str_field("name"), std::move(bound)}});
        Value result = d.dispatch(n.child("body"), ctx);
        ctx.frames.pop_back();
        return result;
    });
    a.on("IrExp", "Call", [](const Node& n, IrEvalContext& ctx, IrDispatcher& d) {
        const std::string& callee = n.str_field("fnName");
        const IrFunc* fn = ctx.module->find_function(callee);
        if (!fn)
            throw Error(ErrorCode::UnboundName, "call to unknown function '" + callee + "'",
                        n.span);
        const auto& args = n.list("args");
        if (args.size() != fn->params.size())
            throw Error(ErrorCode::EvalError,
                        "'" + callee + "' expects " +
                            std::to_string(fn->params.size()) + " arguments, got " +
                            std::to_string(args.size()),
                        n.span);
        std::map<std::string, Value> frame;
        for (size_t i = 0; i < args.size(); ++i)
            frame.emplace(fn->params[i].name,
                          coerce_ir(fn->params[i].type, d.dispatch(args[i], ctx), n.span));
        if (++ctx.depth > 256)
            throw Error(ErrorCode::EvalError, "call depth exceeded", n.span);
        std::vector<std::map<std::string, Value>> saved = std::move(ctx.frames);
        ctx.frames.clear();
        ctx.frames.push_back(std::move(frame));
        Value result = coerce_ir(fn->result_type, d.dispatch(fn->body, ctx), n.span);
        ctx.frames = std::move(saved);
        --ctx.depth;
        return result;
    });
    return a;
}

inline Value eval_ir_with(IrDispatcher& d, const IrModule& ir, std::string_view fn_name,
                          const std::vector<Value>& args) {
    const IrFunc* fn = ir.find_function(fn_name);
    if (!fn)
        throw Error(ErrorCode::UnboundName,
                    "unknown function '" + std::string(fn_name) + "'");
    if (args.size() != fn->params.size())
        throw Error(ErrorCode::EvalError,
                    "'" + std::string(fn_name) + "' expects " +
                        std::to_string(fn->params.size()) + " arguments, got " +
                        std::to_string(args.size()));
    std::map<std::string, Value> frame;
    for (size_t i = 0; i < args.size(); ++i)
        frame.emplace(fn->params[i].name, coerce_ir(fn->params[i].type, args[i], std::nullopt));
    IrEvalContext ctx{&ir, {std::move(frame)}, 1};
    return coerce_ir(fn->result_type, d.dispatch(fn->body, ctx), std::nullopt);
}

inline Value eval_ir(const IrModule& ir, std::string_view fn_name,
                     const std::vector<Value>& args) {
    IrDispatcher d;
    d.register_analysis("IrL", make_ir_eval_analysis());
    return eval_ir_with(d, ir, fn_name, args);
}

} // namespace tftest
