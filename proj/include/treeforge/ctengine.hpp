#pragma once

#include "treeforge/baselang.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace treeforge::ctengine {

using baselang::BaseModule;
using baselang::State;
using baselang::Value;

struct CtConfig {
    int max_repeat = 8;             // largest allowed repetition upper bound
    std::int64_t max_tests = 100000; // expansion budget
};

struct Call {
    std::string op_name;
    std::vector<Value> args;

    bool operator==(const Call&) const = default;
};

std::string render_call(const Call& call);

struct TraceExpr;
using TraceExprPtr = std::shared_ptr<const TraceExpr>;

/// A regular-expression-like description of operation call sequences:
/// single calls, sequencing, alternation, and bounded repetition.
struct TraceExpr {
    enum class Kind { Call, Seq, Alt, Repeat };

    Kind kind = Kind::Call;
    Call call;                        // Kind::Call
    std::vector<TraceExprPtr> items;  // Kind::Seq / Kind::Alt
    TraceExprPtr inner;               // Kind::Repeat
    int lo = 0;                       // Kind::Repeat, inclusive
    int hi = 0;                       // Kind::Repeat, inclusive
};

/// Grammar: `op(literal args)`, `;` sequencing, `|` alternation (loosest),
/// postfix `{lo,hi}` repetition, parentheses.
TraceExprPtr parse_trace_expr(std::string_view text);

/// How many tests expand would produce: 1 per call, products over sequences,
/// sums over alternations, geometric sums over repetitions. Saturates instead
/// of overflowing.
std::int64_t expansion_count(const TraceExprPtr& expr);

struct TestCase {
    std::int64_t index = 0; // position in the full expansion order
    std::vector<Call> calls;

    bool operator==(const TestCase&) const = default;
};

std::string render_test(const TestCase& test);

/// Deterministic expansion. Earlier factors of a sequence vary slower than
/// later ones; alternations expand in source order; repetitions count up
/// from the lower bound.
std::vector<TestCase> expand(const TraceExprPtr& expr, const CtConfig& config = {});

struct Verdict {
    enum class Kind { Passed, Failed, Inconclusive };

    Kind kind = Kind::Passed;
    std::string reason;                    // Failed: error code name
    std::optional<std::size_t> call_index; // Failed / Inconclusive

    bool operator==(const Verdict&) const = default;
};

std::string render_verdict(const Verdict& verdict);

struct TestResult {
    TestCase test;
    Verdict verdict;
};

/// Runs every test from a fresh copy of the initial state. A precondition
/// refusal makes the test inconclusive; any other error fails it; verdicts
/// absorb all errors.
std::vector<TestResult> execute(const std::vector<TestCase>& tests, const BaseModule& module,
                                const State& initial);

/// Order-preserving seeded sample of ceil(factor * n) tests; factor 1 keeps
/// everything. Original test indices survive so single tests can be re-run.
std::vector<TestCase> reduce(const std::vector<TestCase>& tests, double factor,
                             std::uint64_t seed);

/// One row per result: index<TAB>verdict<TAB>calls.
std::string report(const std::vector<TestResult>& results);

bool any_failed(const std::vector<TestResult>& results);

/// Parses and expands the named trace of a module.
std::vector<TestCase> expand_trace(const BaseModule& module, std::string_view trace_name,
                                   const CtConfig& config = {});

} // namespace treeforge::ctengine
