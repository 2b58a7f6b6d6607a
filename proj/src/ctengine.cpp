#include "treeforge/ctengine.hpp"

#include "treeforge/lexer.hpp"
#include "treeforge/text.hpp"

#include "baselang_detail.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace treeforge::ctengine {

using baselang::detail::Cursor;

// --- rendering --------------------------------------------------------------

std::string render_call(const Call& call) {
    std::string out = call.op_name + "(";
    for (size_t i = 0; i < call.args.size(); ++i) {
        if (i)
            out += ", ";
        out += call.args[i].render();
    }
    return out + ")";
}

std::string render_test(const TestCase& test) {
    if (test.calls.empty())
        return "<empty>";
    std::vector<std::string> parts;
    parts.reserve(test.calls.size());
    for (const auto& call : test.calls)
        parts.push_back(render_call(call));
    return join(parts, " ; ");
}

std::string render_verdict(const Verdict& verdict) {
    switch (verdict.kind) {
    case Verdict::Kind::Passed:
        return "PASSED";
    case Verdict::Kind::Failed:
        return "FAILED(" + verdict.reason + ", " +
               format_int(static_cast<std::int64_t>(*verdict.call_index)) + ")";
    case Verdict::Kind::Inconclusive:
        return "INCONCLUSIVE(" +
               format_int(static_cast<std::int64_t>(*verdict.call_index)) + ")";
    }
    return {};
}

// --- parsing ----------------------------------------------------------------

namespace {

Value parse_literal(Cursor& cur) {
    bool negative = cur.eat_punct("-");
    const Token& tok = cur.take();
    if (tok.is(TokenKind::Int))
        return Value::of_int(negative ? -tok.int_value : tok.int_value);
    if (tok.is(TokenKind::Real))
        return Value::of_real(negative ? -tok.real_value : tok.real_value);
    if (!negative && (tok.is_ident("true") || tok.is_ident("false")))
        return Value::of_bool(tok.text == "true");
    throw Error(ErrorCode::SyntaxError,
                "trace call arguments must be literals, got '" + tok.text + "'", tok.span);
}

struct TraceParser {
    Cursor& cur;

    TraceExprPtr alt() {
        std::vector<TraceExprPtr> items{seq()};
        while (cur.eat_punct("|"))
            items.push_back(seq());
        if (items.size() == 1)
            return items[0];
        auto node = std::make_shared<TraceExpr>();
        node->kind = TraceExpr::Kind::Alt;
        node->items = std::move(items);
        return node;
    }

    TraceExprPtr seq() {
        std::vector<TraceExprPtr> items{repeat()};
        while (cur.eat_punct(";"))
            items.push_back(repeat());
        if (items.size() == 1)
            return items[0];
        auto node = std::make_shared<TraceExpr>();
        node->kind = TraceExpr::Kind::Seq;
        node->items = std::move(items);
        return node;
    }

    TraceExprPtr repeat() {
        TraceExprPtr inner = primary();
        while (cur.peek().is_punct("{")) {
            Span sp = cur.take().span;
            std::int64_t lo = expect_bound();
            cur.expect_punct(",");
            std::int64_t hi = expect_bound();
            cur.expect_punct("}");
            if (lo > hi)
                throw Error(ErrorCode::BoundsError,
                            "repetition bounds are inverted: {" + format_int(lo) + "," +
                                format_int(hi) + "}",
                            sp);
            auto node = std::make_shared<TraceExpr>();
            node->kind = TraceExpr::Kind::Repeat;
            node->inner = std::move(inner);
            node->lo = static_cast<int>(lo);
            node->hi = static_cast<int>(hi);
            inner = std::move(node);
        }
        return inner;
    }

    std::int64_t expect_bound() {
        const Token& tok = cur.take();
        if (!tok.is(TokenKind::Int))
            throw Error(ErrorCode::SyntaxError,
                        "repetition bounds must be non-negative integers, got '" + tok.text +
                            "'",
                        tok.span);
        return tok.int_value;
    }

    TraceExprPtr primary() {
        if (cur.eat_punct("(")) {
            TraceExprPtr inner = alt();
            cur.expect_punct(")");
            return inner;
        }
        const Token& name = cur.peek();
        if (!name.is(TokenKind::Ident))
            cur.fail("expected an operation call, got '" + name.text + "'");
        cur.take();
        cur.expect_punct("(");
        auto node = std::make_shared<TraceExpr>();
        node->kind = TraceExpr::Kind::Call;
        node->call.op_name = name.text;
        if (!cur.peek().is_punct(")")) {
            do
                node->call.args.push_back(parse_literal(cur));
            while (cur.eat_punct(","));
        }
        cur.expect_punct(")");
        return node;
    }
};

constexpr std::int64_t kCountCap = std::numeric_limits<std::int64_t>::max();

std::int64_t saturating_mul(std::int64_t a, std::int64_t b) {
    if (a == 0 || b == 0)
        return 0;
    if (a > kCountCap / b)
        return kCountCap;
    return a * b;
}

std::int64_t saturating_add(std::int64_t a, std::int64_t b) {
    if (a > kCountCap - b)
        return kCountCap;
    return a + b;
}

void check_repeat_bounds(const TraceExprPtr& expr, const CtConfig& config) {
    switch (expr->kind) {
    case TraceExpr::Kind::Call:
        return;
    case TraceExpr::Kind::Seq:
    case TraceExpr::Kind::Alt:
        for (const auto& item : expr->items)
            check_repeat_bounds(item, config);
        return;
    case TraceExpr::Kind::Repeat:
        if (expr->hi > config.max_repeat)
            throw Error(ErrorCode::BoundsError,
                        "repetition bound " + format_int(expr->hi) +
                            " exceeds the configured limit " +
                            format_int(config.max_repeat));
        check_repeat_bounds(expr->inner, config);
        return;
    }
}

using CallSeq = std::vector<Call>;

std::vector<CallSeq> expand_rec(const TraceExprPtr& expr) {
    switch (expr->kind) {
    case TraceExpr::Kind::Call:
        return {{expr->call}};
    case TraceExpr::Kind::Seq: {
        std::vector<CallSeq> acc{{}};
        for (const auto& item : expr->items) {
            std::vector<CallSeq> part = expand_rec(item);
            std::vector<CallSeq> next;
            next.reserve(acc.size() * part.size());
            for (const auto& prefix : acc)
                for (const auto& suffix : part) {
                    CallSeq joined = prefix;
                    joined.insert(joined.end(), suffix.begin(), suffix.end());
                    next.push_back(std::move(joined));
                }
            acc = std::move(next);
        }
        return acc;
    }
    case TraceExpr::Kind::Alt: {
        std::vector<CallSeq> out;
        for (const auto& item : expr->items)
            for (auto& seq : expand_rec(item))
                out.push_back(std::move(seq));
        return out;
    }
    case TraceExpr::Kind::Repeat: {
        std::vector<CallSeq> base = expand_rec(expr->inner);
        std::vector<CallSeq> out;
        // k-fold powers in ascending k; within each k, earlier copies vary
        // slower, matching sequence expansion.
        std::vector<CallSeq> power{{}};
        for (int k = 0; k <= expr->hi; ++k) {
            if (k >= expr->lo)
                for (const auto& seq : power)
                    out.push_back(seq);
            if (k == expr->hi)
                break;
            std::vector<CallSeq> next;
            next.reserve(power.size() * base.size());
            for (const auto& prefix : power)
                for (const auto& suffix : base) {
                    CallSeq joined = prefix;
                    joined.insert(joined.end(), suffix.begin(), suffix.end());
                    next.push_back(std::move(joined));
                }
            power = std::move(next);
        }
        return out;
    }
    }
    return {};
}

/// Uniform selection without replacement that keeps input order: walk the
/// input once, drawing each element with probability (needed / remaining).
std::uint64_t rng_below(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = rng.max() - rng.max() % n;
    std::uint64_t draw = rng();
    while (draw >= limit)
        draw = rng();
    return draw % n;
}

} // namespace

TraceExprPtr parse_trace_expr(std::string_view text) {
    TokenBuffer buf{std::string(text), CommentStyle::Dashes};
    Cursor cur{buf};
    TraceParser parser{cur};
    TraceExprPtr expr = parser.alt();
    if (!cur.at_end())
        cur.fail("unexpected input after trace expression");
    return expr;
}

std::int64_t expansion_count(const TraceExprPtr& expr) {
    switch (expr->kind) {
    case TraceExpr::Kind::Call:
        return 1;
    case TraceExpr::Kind::Seq: {
        std::int64_t product = 1;
        for (const auto& item : expr->items)
            product = saturating_mul(product, expansion_count(item));
        return product;
    }
    case TraceExpr::Kind::Alt: {
        std::int64_t sum = 0;
        for (const auto& item : expr->items)
            sum = saturating_add(sum, expansion_count(item));
        return sum;
    }
    case TraceExpr::Kind::Repeat: {
        std::int64_t base = expansion_count(expr->inner);
        std::int64_t sum = 0;
        std::int64_t power = 1; // base^0
        for (int k = 0; k <= expr->hi; ++k) {
            if (k >= expr->lo)
                sum = saturating_add(sum, power);
            power = saturating_mul(power, base);
        }
        return sum;
    }
    }
    return 0;
}

std::vector<TestCase> expand(const TraceExprPtr& expr, const CtConfig& config) {
    check_repeat_bounds(expr, config);
    std::int64_t count = expansion_count(expr);
    if (count > config.max_tests)
        throw Error(ErrorCode::ExpansionBudgetExceeded,
                    "expansion produces " + format_int(count) + " tests, budget is " +
                        format_int(config.max_tests));

    std::vector<CallSeq> seqs = expand_rec(expr);
    std::vector<TestCase> tests;
    tests.reserve(seqs.size());
    for (size_t i = 0; i < seqs.size(); ++i)
        tests.push_back({static_cast<std::int64_t>(i), std::move(seqs[i])});
    return tests;
}

std::vector<TestResult> execute(const std::vector<TestCase>& tests, const BaseModule& module,
                                const State& initial) {
    std::vector<TestResult> results;
    results.reserve(tests.size());
    for (const auto& test : tests) {
        State state = initial;
        Verdict verdict;
        for (size_t i = 0; i < test.calls.size(); ++i) {
            const Call& call = test.calls[i];
            try {
                auto r = baselang::exec_operation(module, state, call.op_name, call.args);
                state = std::move(r.state);
            } catch (const Error& e) {
                if (e.code() == ErrorCode::PreconditionFailure)
                    verdict = {Verdict::Kind::Inconclusive, {}, i};
                else
                    verdict = {Verdict::Kind::Failed, std::string(error_code_name(e.code())),
                               i};
                break;
            }
        }
        results.push_back({test, verdict});
    }
    return results;
}

std::vector<TestCase> reduce(const std::vector<TestCase>& tests, double factor,
                             std::uint64_t seed) {
    if (!(factor > 0.0) || factor > 1.0)
        throw Error(ErrorCode::InvalidConfig,
                    "reduction factor must be in (0, 1], got " + format_real(factor));

    const std::uint64_t n = tests.size();
    // The epsilon keeps exact products like 0.1 * 100 from rounding up.
    auto wanted = static_cast<std::uint64_t>(
        std::ceil(factor * static_cast<double>(n) - 1e-9));
    if (wanted > n)
        wanted = n;

    std::vector<TestCase> out;
    out.reserve(wanted);
    std::mt19937_64 rng(seed);
    std::uint64_t chosen = 0;
    for (std::uint64_t i = 0; i < n && chosen < wanted; ++i) {
        if (rng_below(rng, n - i) < wanted - chosen) {
            out.push_back(tests[i]);
            ++chosen;
        }
    }
    return out;
}

std::string report(const std::vector<TestResult>& results) {
    std::string out;
    for (const auto& r : results) {
        out += format_int(r.test.index);
        out += '\t';
        out += render_verdict(r.verdict);
        out += '\t';
        out += render_test(r.test);
        out += '\n';
    }
    return out;
}

bool any_failed(const std::vector<TestResult>& results) {
    for (const auto& r : results)
        if (r.verdict.kind == Verdict::Kind::Failed)
            return true;
    return false;
}

std::vector<TestCase> expand_trace(const BaseModule& module, std::string_view trace_name,
                                   const CtConfig& config) {
    const baselang::TraceDef* trace = module.find_trace(trace_name);
    if (!trace)
        throw Error(ErrorCode::UnboundName,
                    "unknown trace '" + std::string(trace_name) + "'");
    return expand(parse_trace_expr(trace->text), config);
}

} // namespace treeforge::ctengine
