#include "baselang_detail.hpp"

#include "treeforge/text.hpp"

#include <map>

namespace treeforge::baselang {

namespace detail {

const Token& Cursor::expect_punct(std::string_view p) {
    if (!peek().is_punct(p))
        fail("expected '" + std::string(p) + "', got '" + peek().text + "'");
    return take();
}

const Token& Cursor::expect_kw(std::string_view kw) {
    if (!peek().is_ident(kw))
        fail("expected '" + std::string(kw) + "', got '" + peek().text + "'");
    return take();
}

const Token& Cursor::expect_ident(std::string_view what) {
    if (!peek().is(TokenKind::Ident))
        fail("expected " + std::string(what) + ", got '" + peek().text + "'");
    return take();
}

void Cursor::fail(std::string message) const {
    const Token& tok = peek();
    if (tok.is(TokenKind::End))
        throw Error(ErrorCode::SyntaxError, message + " (at end of input)", tok.span);
    throw Error(ErrorCode::SyntaxError, std::move(message), tok.span);
}

bool is_reserved(std::string_view word) {
    static const std::set<std::string_view> words = {
        "module", "values", "state", "functions", "operations", "traces",
        "shared", "pre", "post", "if", "then", "else", "let", "in",
        "not", "and", "or", "div", "mod", "true", "false",
        "skip", "return", "exists",
    };
    return words.count(word) > 0;
}

} // namespace detail

namespace {

using detail::Cursor;

std::string parse_name(Cursor& cur, std::string_view what) {
    const Token& tok = cur.peek();
    if (!tok.is(TokenKind::Ident))
        cur.fail("expected " + std::string(what) + ", got '" + tok.text + "'");
    if (detail::is_reserved(tok.text))
        cur.fail("'" + tok.text + "' is a reserved word and cannot name " + std::string(what));
    return cur.take().text;
}

Type parse_type_name(Cursor& cur) {
    const Token& tok = cur.expect_ident("a type name");
    if (auto type = type_from_name(tok.text))
        return *type;
    throw Error(ErrorCode::SyntaxError, "unknown type '" + tok.text + "'", tok.span);
}

// --- node builders ---------------------------------------------------------

NodePtr mk_int(const SchemaPtr& s, std::int64_t v, const Span& sp) {
    return treekit::make_node(s, "Exp", "IntLit", {{"value", treekit::Scalar(v)}}, sp);
}

NodePtr mk_real(const SchemaPtr& s, double v, const Span& sp) {
    return treekit::make_node(s, "Exp", "RealLit", {{"value", treekit::Scalar(v)}}, sp);
}

NodePtr mk_bool(const SchemaPtr& s, bool v, const Span& sp) {
    return treekit::make_node(s, "Exp", "BoolLit", {{"value", treekit::Scalar(v)}}, sp);
}

NodePtr mk_var(const SchemaPtr& s, std::string name, const Span& sp) {
    return treekit::make_node(s, "Exp", "VarRef",
                              {{"name", treekit::Scalar(std::move(name))}}, sp);
}

NodePtr mk_binary(const SchemaPtr& s, std::string op, NodePtr l, NodePtr r, const Span& sp) {
    return treekit::make_node(s, "Exp", "Binary",
                              {{"op", treekit::Scalar(std::move(op))},
                               {"left", std::move(l)},
                               {"right", std::move(r)}},
                              sp);
}

// --- expressions -------------------------------------------------------

struct ExpParser {
    Cursor& cur;
    const SchemaPtr& schema;

    NodePtr exp() {
        if (cur.peek().is_ident("if"))
            return if_exp();
        if (cur.peek().is_ident("let"))
            return let_exp();
        return or_exp();
    }

    NodePtr if_exp() {
        Span sp = cur.take().span; // 'if'
        NodePtr cond = exp();
        cur.expect_kw("then");
        NodePtr then_branch = exp();
        cur.expect_kw("else");
        NodePtr else_branch = exp();
        return treekit::make_node(schema, "Exp", "IfExp",
                                  {{"cond", std::move(cond)},
                                   {"thenBranch", std::move(then_branch)},
                                   {"elseBranch", std::move(else_branch)}},
                                  sp);
    }

    NodePtr let_exp() {
        Span sp = cur.take().span; // 'let'
        std::string name = parse_name(cur, "a binder");
        cur.expect_punct("=");
        NodePtr bound = exp();
        cur.expect_kw("in");
        NodePtr body = exp();
        return treekit::make_node(schema, "Exp", "LetExp",
                                  {{"name", treekit::Scalar(std::move(name))},
                                   {"bound", std::move(bound)},
                                   {"body", std::move(body)}},
                                  sp);
    }

    NodePtr or_exp() {
        NodePtr left = and_exp();
        while (cur.peek().is_ident("or")) {
            Span sp = cur.take().span;
            left = mk_binary(schema, "or", std::move(left), and_exp(), sp);
        }
        return left;
    }

    NodePtr and_exp() {
        NodePtr left = not_exp();
        while (cur.peek().is_ident("and")) {
            Span sp = cur.take().span;
            left = mk_binary(schema, "and", std::move(left), not_exp(), sp);
        }
        return left;
    }

    NodePtr not_exp() {
        if (cur.peek().is_ident("not")) {
            Span sp = cur.take().span;
            NodePtr operand = not_exp();
            return treekit::make_node(schema, "Exp", "Unary",
                                      {{"op", treekit::Scalar(std::string("not"))},
                                       {"operand", std::move(operand)}},
                                      sp);
        }
        return cmp_exp();
    }

    // Comparisons do not chain; `a < b < c` needs explicit parentheses.
    NodePtr cmp_exp() {
        NodePtr left = add_exp();
        const Token& tok = cur.peek();
        bool is_cmp = tok.is_punct("=") || tok.is_punct("<>") || tok.is_punct("<") ||
                      tok.is_punct("<=") || tok.is_punct(">") || tok.is_punct(">=");
        if (!is_cmp)
            return left;
        Span sp = cur.peek().span;
        std::string op = cur.take().text;
        return mk_binary(schema, std::move(op), std::move(left), add_exp(), sp);
    }

    NodePtr add_exp() {
        NodePtr left = mul_exp();
        while (cur.peek().is_punct("+") || cur.peek().is_punct("-")) {
            Span sp = cur.peek().span;
            std::string op = cur.take().text;
            left = mk_binary(schema, std::move(op), std::move(left), mul_exp(), sp);
        }
        return left;
    }

    NodePtr mul_exp() {
        NodePtr left = unary_minus();
        while (cur.peek().is_punct("*") || cur.peek().is_punct("/") ||
               cur.peek().is_ident("div") || cur.peek().is_ident("mod")) {
            Span sp = cur.peek().span;
            std::string op = cur.take().text;
            left = mk_binary(schema, std::move(op), std::move(left), unary_minus(), sp);
        }
        return left;
    }

    NodePtr unary_minus() {
        if (!cur.peek().is_punct("-"))
            return atom();
        Span sp = cur.take().span;
        NodePtr operand = unary_minus();
        // Negated literals fold into the literal; everything else becomes a
        // subtraction from zero.
        if (operand->is("Exp", "IntLit"))
            return mk_int(schema, -operand->int_field("value"), sp);
        if (operand->is("Exp", "RealLit"))
            return mk_real(schema, -operand->real_field("value"), sp);
        return mk_binary(schema, "-", mk_int(schema, 0, sp), std::move(operand), sp);
    }

    NodePtr atom() {
        const Token& tok = cur.peek();
        switch (tok.kind) {
        case TokenKind::Int: {
            const Token& t = cur.take();
            return mk_int(schema, t.int_value, t.span);
        }
        case TokenKind::Real: {
            const Token& t = cur.take();
            return mk_real(schema, t.real_value, t.span);
        }
        case TokenKind::Punct:
            if (tok.is_punct("(")) {
                cur.take();
                NodePtr inner = exp();
                cur.expect_punct(")");
                return inner;
            }
            cur.fail("expected an expression, got '" + tok.text + "'");
        case TokenKind::Ident: {
            if (tok.is_ident("true") || tok.is_ident("false")) {
                const Token& t = cur.take();
                return mk_bool(schema, t.text == "true", t.span);
            }
            if (detail::is_reserved(tok.text))
                cur.fail("unexpected keyword '" + tok.text + "' in expression");
            const Token& name = cur.take();
            if (cur.eat_punct("(")) {
                std::vector<NodePtr> args;
                if (!cur.peek().is_punct(")")) {
                    args.push_back(exp());
                    while (cur.eat_punct(","))
                        args.push_back(exp());
                }
                cur.expect_punct(")");
                return treekit::make_node(schema, "Exp", "Apply",
                                          {{"callee", treekit::Scalar(name.text)},
                                           {"args", std::move(args)}},
                                          name.span);
            }
            return mk_var(schema, name.text, name.span);
        }
        case TokenKind::End:
            cur.fail("expected an expression");
        }
        cur.fail("expected an expression");
    }
};

// --- statements ------------------------------------------------------------

struct StmtParser {
    Cursor& cur;
    const SchemaPtr& schema;

    NodePtr stmt() {
        NodePtr left = simple();
        while (cur.peek().is_punct(";")) {
            Span sp = cur.take().span;
            left = treekit::make_node(schema, "Stmt", "SeqStmt",
                                      {{"first", std::move(left)}, {"second", simple()}}, sp);
        }
        return left;
    }

    // One statement; sequences inside an if branch need parentheses.
    NodePtr simple() {
        const Token& tok = cur.peek();
        if (tok.is_punct("(")) {
            cur.take();
            NodePtr inner = stmt();
            cur.expect_punct(")");
            return inner;
        }
        if (tok.is_ident("skip")) {
            Span sp = cur.take().span;
            return treekit::make_node(schema, "Stmt", "SkipStmt", {}, sp);
        }
        if (tok.is_ident("return")) {
            Span sp = cur.take().span;
            NodePtr value = ExpParser{cur, schema}.exp();
            return treekit::make_node(schema, "Stmt", "ReturnStmt",
                                      {{"value", std::move(value)}}, sp);
        }
        if (tok.is_ident("if")) {
            Span sp = cur.take().span;
            NodePtr cond = ExpParser{cur, schema}.exp();
            cur.expect_kw("then");
            NodePtr then_branch = simple();
            cur.expect_kw("else");
            NodePtr else_branch = simple();
            return treekit::make_node(schema, "Stmt", "IfStmt",
                                      {{"cond", std::move(cond)},
                                       {"thenBranch", std::move(then_branch)},
                                       {"elseBranch", std::move(else_branch)}},
                                      sp);
        }
        std::string target = parse_name(cur, "a statement");
        Span sp = cur.expect_punct(":=").span;
        NodePtr value = ExpParser{cur, schema}.exp();
        return treekit::make_node(schema, "Stmt", "Assign",
                                  {{"target", treekit::Scalar(std::move(target))},
                                   {"value", std::move(value)}},
                                  sp);
    }
};

// --- module sections -----------------------------------------------------

const std::set<std::string, std::less<>>& section_keywords() {
    static const std::set<std::string, std::less<>> kws = {"values", "state", "functions",
                                                           "operations", "traces"};
    return kws;
}

struct ModuleParser {
    Cursor& cur;
    const SchemaPtr& schema;
    const std::set<std::string, std::less<>>& stops;
    BaseModule m;

    bool at_entry() const {
        const Token& tok = cur.peek();
        return tok.is(TokenKind::Ident) && !section_keywords().count(tok.text) &&
               !stops.count(tok.text);
    }

    NodePtr exp() { return ExpParser{cur, schema}.exp(); }

    void values_section() {
        cur.take(); // 'values'
        while (at_entry()) {
            Span sp = cur.peek().span;
            std::string name = parse_name(cur, "a value name");
            cur.expect_punct("=");
            NodePtr init = exp();
            m.def_nodes.push_back(treekit::make_node(
                schema, "Def", "ValueDef",
                {{"name", treekit::Scalar(name)}, {"init", init}}, sp));
            m.values.push_back({std::move(name), std::move(init), sp});
        }
    }

    void state_section() {
        cur.take(); // 'state'
        while (at_entry() || cur.peek().is_ident("shared")) {
            bool shared = cur.eat_kw("shared");
            Span sp = cur.peek().span;
            std::string name = parse_name(cur, "a state variable name");
            cur.expect_punct(":");
            Type type = parse_type_name(cur);
            cur.expect_punct(":=");
            NodePtr init = exp();
            m.def_nodes.push_back(treekit::make_node(
                schema, "Def", "StateDef",
                {{"name", treekit::Scalar(name)},
                 {"declaredType", treekit::Scalar(std::string(type_name(type)))},
                 {"shared", treekit::Scalar(shared)},
                 {"init", init}},
                sp));
            m.states.push_back({std::move(name), type, std::move(init), shared, sp});
        }
    }

    struct Signature {
        std::vector<Type> params;
        Type result = Type::Int;
        Span span;
        bool used = false;
    };

    void functions_section() {
        cur.take(); // 'functions'
        std::map<std::string, Signature> sigs;
        while (at_entry()) {
            if (cur.peek(1).is_punct(":"))
                parse_signature(sigs);
            else if (cur.peek(1).is_punct("("))
                parse_function(sigs);
            else
                cur.fail("expected a function signature or definition");
        }
        for (const auto& [name, sig] : sigs)
            if (!sig.used)
                throw Error(ErrorCode::SyntaxError,
                            "function '" + name + "' has a signature but no definition",
                            sig.span);
    }

    void parse_signature(std::map<std::string, Signature>& sigs) {
        Span sp = cur.peek().span;
        std::string name = parse_name(cur, "a function name");
        cur.expect_punct(":");
        Signature sig;
        sig.span = sp;
        if (cur.eat_punct("(")) {
            cur.expect_punct(")"); // nullary: `f: () -> int`
        } else {
            sig.params.push_back(parse_type_name(cur));
            while (cur.eat_punct("*"))
                sig.params.push_back(parse_type_name(cur));
        }
        cur.expect_punct("->");
        sig.result = parse_type_name(cur);
        if (!sigs.emplace(name, std::move(sig)).second)
            throw Error(ErrorCode::SyntaxError,
                        "duplicate signature for function '" + name + "'", sp);
    }

    void parse_function(std::map<std::string, Signature>& sigs) {
        // Implicit definitions carry typed parameters and a named result;
        // explicit ones list bare parameter names and lean on a signature.
        bool implicit;
        if (cur.peek(2).is_punct(")"))
            implicit = !cur.peek(3).is_punct("==");
        else
            implicit = cur.peek(3).is_punct(":");

        Span sp = cur.peek().span;
        FunctionDef fn;
        fn.span = sp;
        fn.name = parse_name(cur, "a function name");
        cur.expect_punct("(");
        if (implicit) {
            if (!cur.peek().is_punct(")"))
                fn.params = detail::parse_typed_params(cur);
            cur.expect_punct(")");
            fn.result_name = parse_name(cur, "a result binder");
            cur.expect_punct(":");
            fn.result_type = parse_type_name(cur);
            if (cur.eat_kw("pre"))
                fn.pre = exp();
            if (!cur.peek().is_ident("post"))
                cur.fail("implicit function '" + fn.name + "' needs a post condition");
            cur.take();
            fn.post = exp();
        } else {
            auto it = sigs.find(fn.name);
            if (it == sigs.end())
                throw Error(ErrorCode::SyntaxError,
                            "function '" + fn.name + "' has no signature", sp);
            it->second.used = true;
            std::vector<Param> params;
            if (!cur.peek().is_punct(")")) {
                do {
                    Span psp = cur.peek().span;
                    params.push_back({parse_name(cur, "a parameter name"), Type::Int, psp});
                } while (cur.eat_punct(","));
            }
            cur.expect_punct(")");
            if (params.size() != it->second.params.size())
                throw Error(ErrorCode::SyntaxError,
                            "function '" + fn.name + "' declares " +
                                format_int(static_cast<std::int64_t>(params.size())) +
                                " parameters, its signature has " +
                                format_int(static_cast<std::int64_t>(it->second.params.size())),
                            sp);
            for (size_t i = 0; i < params.size(); ++i)
                params[i].type = it->second.params[i];
            fn.params = std::move(params);
            fn.result_type = it->second.result;
            fn.result_name = "result";
            cur.expect_punct("==");
            fn.body = exp();
            if (cur.eat_kw("pre"))
                fn.pre = exp();
            if (cur.eat_kw("post"))
                fn.post = exp();
        }

        treekit::FieldMap fields = {{"name", treekit::Scalar(fn.name)}};
        if (fn.body)
            fields.emplace("body", fn.body);
        if (fn.pre)
            fields.emplace("pre", fn.pre);
        if (fn.post)
            fields.emplace("post", fn.post);
        m.def_nodes.push_back(
            treekit::make_node(schema, "Def", "FunctionDef", std::move(fields), sp));
        m.functions.push_back(std::move(fn));
    }

    void operations_section() {
        cur.take(); // 'operations'
        while (at_entry()) {
            Span sp = cur.peek().span;
            OperationDef op;
            op.span = sp;
            op.name = parse_name(cur, "an operation name");
            cur.expect_punct("(");
            if (!cur.peek().is_punct(")"))
                op.params = detail::parse_typed_params(cur);
            cur.expect_punct(")");
            cur.expect_punct("==");
            op.body = StmtParser{cur, schema}.stmt();
            if (cur.eat_kw("pre"))
                op.pre = exp();
            treekit::FieldMap fields = {{"name", treekit::Scalar(op.name)},
                                        {"body", op.body}};
            if (op.pre)
                fields.emplace("pre", op.pre);
            m.def_nodes.push_back(
                treekit::make_node(schema, "Def", "OperationDef", std::move(fields), sp));
            m.operations.push_back(std::move(op));
        }
    }

    void traces_section() {
        cur.take(); // 'traces'
        while (at_entry()) {
            Span sp = cur.peek().span;
            std::string name = parse_name(cur, "a trace name");
            const Token& colon = cur.expect_punct(":");
            if (cur.at_end() || cur.peek().span.line != colon.span.line)
                cur.fail("trace '" + name + "' has no expression on its line");
            std::string text = cur.buf->rest_of_line(cur.pos);
            cur.pos = cur.buf->first_token_after_line(cur.pos);
            m.def_nodes.push_back(treekit::make_node(
                schema, "Def", "TraceDef",
                {{"name", treekit::Scalar(name)}, {"spec", treekit::Scalar(text)}}, sp));
            m.traces.push_back({std::move(name), std::move(text), sp});
        }
    }

    void run() {
        cur.expect_kw("module");
        m.name = parse_name(cur, "a module name");
        m.schema = schema;
        while (!cur.at_end()) {
            const Token& tok = cur.peek();
            if (!tok.is(TokenKind::Ident))
                cur.fail("expected a section keyword, got '" + tok.text + "'");
            if (stops.count(tok.text))
                return;
            if (tok.text == "values")
                values_section();
            else if (tok.text == "state")
                state_section();
            else if (tok.text == "functions")
                functions_section();
            else if (tok.text == "operations")
                operations_section();
            else if (tok.text == "traces")
                traces_section();
            else
                cur.fail("expected a section keyword, got '" + tok.text + "'");
        }
    }
};

} // namespace

namespace detail {

std::vector<Param> parse_typed_params(Cursor& cur) {
    std::vector<Param> params;
    do {
        Span sp = cur.peek().span;
        std::string name = parse_name(cur, "a parameter name");
        cur.expect_punct(":");
        params.push_back({std::move(name), parse_type_name(cur), sp});
    } while (cur.eat_punct(","));
    return params;
}

NodePtr parse_exp(Cursor& cur, const SchemaPtr& schema) {
    return ExpParser{cur, schema}.exp();
}

NodePtr parse_stmt(Cursor& cur, const SchemaPtr& schema) {
    return StmtParser{cur, schema}.stmt();
}

BaseModule parse_module_body(Cursor& cur, const SchemaPtr& schema,
                             const std::set<std::string, std::less<>>& stop_keywords) {
    ModuleParser parser{cur, schema, stop_keywords, {}};
    parser.run();
    return std::move(parser.m);
}

} // namespace detail

BaseModule parse_module(std::string_view text) {
    TokenBuffer buf{std::string(text), CommentStyle::Dashes};
    detail::Cursor cur{buf};
    BaseModule m = detail::parse_module_body(cur, schema(), {});
    if (!cur.at_end())
        cur.fail("unexpected input after module sections");
    return m;
}

NodePtr parse_exp_text(std::string_view text) {
    TokenBuffer buf{std::string(text), CommentStyle::Dashes};
    detail::Cursor cur{buf};
    NodePtr exp = detail::parse_exp(cur, schema());
    if (!cur.at_end())
        cur.fail("unexpected input after expression");
    return exp;
}

ObligationPredicate parse_obligation_predicate(std::string_view text) {
    TokenBuffer buf{std::string(text), CommentStyle::Dashes};
    detail::Cursor cur{buf};
    ObligationPredicate pred;
    if (cur.peek().is_ident("exists")) {
        cur.take();
        pred.binder = parse_name(cur, "a binder");
        cur.expect_punct(":");
    }
    pred.body = detail::parse_exp(cur, schema());
    if (!cur.at_end())
        cur.fail("unexpected input after predicate");
    return pred;
}

ParsedCall parse_call(std::string_view call_text) {
    TokenBuffer buf{std::string(call_text), CommentStyle::Dashes};
    detail::Cursor cur{buf};
    ParsedCall call;
    call.name = parse_name(cur, "a function or operation name");
    cur.expect_punct("(");
    if (!cur.peek().is_punct(")")) {
        do {
            bool negative = cur.eat_punct("-");
            const Token& tok = cur.take();
            if (tok.is(TokenKind::Int))
                call.args.push_back(Value::of_int(negative ? -tok.int_value : tok.int_value));
            else if (tok.is(TokenKind::Real))
                call.args.push_back(
                    Value::of_real(negative ? -tok.real_value : tok.real_value));
            else if (!negative && (tok.is_ident("true") || tok.is_ident("false")))
                call.args.push_back(Value::of_bool(tok.text == "true"));
            else
                throw Error(ErrorCode::SyntaxError,
                            "call arguments must be literals, got '" + tok.text + "'",
                            tok.span);
        } while (cur.eat_punct(","));
    }
    cur.expect_punct(")");
    if (!cur.at_end())
        cur.fail("unexpected input after call");
    return call;
}

// --- rendering -------------------------------------------------------------

namespace {

int binop_prec(std::string_view op) {
    if (op == "or")
        return 1;
    if (op == "and")
        return 2;
    if (op == "*" || op == "/" || op == "div" || op == "mod")
        return 6;
    if (op == "+" || op == "-")
        return 5;
    return 4; // comparisons
}

void render_rec(const NodePtr& e, int ctx_prec, std::string& out) {
    auto wrap = [&](int prec, auto&& body) {
        bool parens = prec < ctx_prec;
        if (parens)
            out += "(";
        body();
        if (parens)
            out += ")";
    };

    if (e->is("Exp", "IntLit")) {
        out += format_int(e->int_field("value"));
    } else if (e->is("Exp", "RealLit")) {
        out += format_real(e->real_field("value"));
    } else if (e->is("Exp", "BoolLit")) {
        out += e->bool_field("value") ? "true" : "false";
    } else if (e->is("Exp", "VarRef")) {
        out += e->str_field("name");
    } else if (e->is("Exp", "Binary")) {
        const std::string& op = e->str_field("op");
        int prec = binop_prec(op);
        // Comparisons are non-associative, so both sides bind one level up;
        // the other operators associate to the left.
        int left_prec = prec == 4 ? prec + 1 : prec;
        wrap(prec, [&] {
            render_rec(e->child("left"), left_prec, out);
            out += " " + op + " ";
            render_rec(e->child("right"), prec + 1, out);
        });
    } else if (e->is("Exp", "Unary")) {
        wrap(3, [&] {
            out += "not ";
            render_rec(e->child("operand"), 4, out);
        });
    } else if (e->is("Exp", "IfExp")) {
        wrap(0, [&] {
            out += "if ";
            render_rec(e->child("cond"), 0, out);
            out += " then ";
            render_rec(e->child("thenBranch"), 0, out);
            out += " else ";
            render_rec(e->child("elseBranch"), 0, out);
        });
    } else if (e->is("Exp", "LetExp")) {
        wrap(0, [&] {
            out += "let " + e->str_field("name") + " = ";
            render_rec(e->child("bound"), 0, out);
            out += " in ";
            render_rec(e->child("body"), 0, out);
        });
    } else if (e->is("Exp", "Apply")) {
        out += e->str_field("callee") + "(";
        const auto& args = e->list("args");
        for (size_t i = 0; i < args.size(); ++i) {
            if (i)
                out += ", ";
            render_rec(args[i], 0, out);
        }
        out += ")";
    } else {
        throw Error(ErrorCode::EvalError,
                    "cannot render (" + e->category + ", " + e->alternative + ")", e->span);
    }
}

} // namespace

std::string render_exp(const NodePtr& exp) {
    std::string out;
    render_rec(exp, 0, out);
    return out;
}

} // namespace treeforge::baselang
