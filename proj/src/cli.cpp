#include "treeforge/cli.hpp"

#include "treeforge/astspec.hpp"
#include "treeforge/baselang.hpp"
#include "treeforge/cosim.hpp"
#include "treeforge/ctengine.hpp"
#include "treeforge/diag.hpp"
#include "treeforge/extlang.hpp"
#include "treeforge/irgen.hpp"
#include "treeforge/lexer.hpp"
#include "treeforge/text.hpp"

#include "CLI11.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace treeforge::cli {
namespace {

/// Bad flag values and unreadable inputs; maps to exit code 2.
struct UsageError {
    std::string message;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UsageError{"cannot open '" + path + "'"};
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad())
        throw UsageError{"cannot read '" + path + "'"};
    return buf.str();
}

/// A module file is treated as Proc-L when it has a `processes` section.
/// The word is not reserved, so look for it used as a section header — an
/// identifier followed by another identifier (the first process name) or by
/// the end of the document — rather than as an expression operand, which is
/// always followed by an operator or a closing delimiter.
bool looks_like_procl(const std::string& text) {
    TokenBuffer tokens(text, CommentStyle::Dashes);
    for (size_t i = 0; i + 1 < tokens.size(); ++i) {
        if (!tokens.at(i).is_ident("processes"))
            continue;
        const Token& next = tokens.at(i + 1);
        if (next.is(TokenKind::Ident) || next.is(TokenKind::End))
            return true;
    }
    return false;
}

std::int64_t parse_int_flag(std::string_view text, const std::string& flag) {
    std::int64_t value = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw UsageError{flag + " expects an integer, got '" + std::string(text) + "'"};
    return value;
}

baselang::SolveBounds parse_bounds(const std::string& text) {
    size_t comma = text.find(',');
    if (comma == std::string::npos)
        throw UsageError{"--bounds expects 'lo,hi', got '" + text + "'"};
    baselang::SolveBounds bounds;
    bounds.lo = parse_int_flag(std::string_view(text).substr(0, comma), "--bounds");
    bounds.hi = parse_int_flag(std::string_view(text).substr(comma + 1), "--bounds");
    return bounds;
}

std::vector<std::string> split_list(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string current;
    for (char c : text) {
        if (c == sep) {
            if (!current.empty())
                parts.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    if (!current.empty())
        parts.push_back(current);
    return parts;
}

std::string render_obligation(const baselang::Obligation& ob) {
    std::string out = ob.location ? to_string(*ob.location) : "-";
    out += '\t';
    out += obligation_kind_name(ob.kind);
    out += '\t';
    out += ob.context_name;
    out += '\t';
    out += ob.predicate_text;
    return out;
}

// --- subcommand bodies -------------------------------------------------

int cmd_spec_check(const std::string& file, const std::string& base_file, std::ostream& out) {
    astspec::SpecAst ast = astspec::parse_spec(read_file(file));
    astspec::Schema schema;
    if (!base_file.empty()) {
        astspec::SpecAst base_ast = astspec::parse_spec(read_file(base_file));
        schema = astspec::extend_schema(astspec::build_schema(base_ast), ast);
    } else {
        schema = astspec::build_schema(ast);
    }
    size_t alternatives = 0;
    for (const auto& [name, category] : schema.categories)
        alternatives += category.alternatives.size();
    out << "tree " << schema.tree_id << ": " << schema.categories.size() << " categories, "
        << alternatives << " alternatives\n";
    return 0;
}

int cmd_check(const std::string& file, std::ostream& out, std::ostream& err) {
    std::string text = read_file(file);
    std::vector<Diagnostic> diags;
    if (looks_like_procl(text)) {
        extlang::ExtModule em = extlang::parse_procl(text);
        diags = extlang::type_check_ext(em).diagnostics;
    } else {
        baselang::BaseModule module = baselang::parse_module(text);
        diags = baselang::type_check(module);
    }
    if (!diags.empty()) {
        err << render_diagnostics(diags);
        return 1;
    }
    out << "ok\n";
    return 0;
}

int cmd_eval(const std::string& file, const std::string& call, bool solve,
             const std::string& bounds_text, std::ostream& out) {
    baselang::SolveBounds bounds;
    if (!bounds_text.empty())
        bounds = parse_bounds(bounds_text);
    baselang::BaseModule module = baselang::parse_module(read_file(file));
    baselang::Value value = baselang::evaluate(
        module, call, solve ? baselang::EvalMode::Solve : baselang::EvalMode::Strict, bounds);
    out << value.render() << "\n";
    return 0;
}

int cmd_po(const std::string& file, std::ostream& out) {
    std::string text = read_file(file);
    std::vector<baselang::Obligation> obligations;
    if (looks_like_procl(text)) {
        extlang::ExtModule em = extlang::parse_procl(text);
        obligations = extlang::gen_pos_ext(em).obligations;
    } else {
        baselang::BaseModule module = baselang::parse_module(text);
        obligations = baselang::gen_pos(module);
    }
    for (const auto& ob : obligations)
        out << render_obligation(ob) << "\n";
    return 0;
}

int cmd_ct_expand(const std::string& file, const std::string& trace,
                  const ctengine::CtConfig& config, std::ostream& out) {
    baselang::BaseModule module = baselang::parse_module(read_file(file));
    for (const auto& test : ctengine::expand_trace(module, trace, config))
        out << ctengine::render_test(test) << "\n";
    return 0;
}

int cmd_ct_run(const std::string& file, const std::string& trace, const ctengine::CtConfig& config,
               double reduce_factor, std::uint64_t seed, std::ostream& out) {
    if (!(reduce_factor > 0.0) || reduce_factor > 1.0)
        throw UsageError{"--reduce expects a factor in (0, 1], got " + format_real(reduce_factor)};
    baselang::BaseModule module = baselang::parse_module(read_file(file));
    std::vector<ctengine::TestCase> tests = ctengine::expand_trace(module, trace, config);
    tests = ctengine::reduce(tests, reduce_factor, seed);
    std::vector<ctengine::TestResult> results =
        ctengine::execute(tests, module, baselang::initial_state(module));
    out << ctengine::report(results);
    return ctengine::any_failed(results) ? 1 : 0;
}

int cmd_traces(const std::string& file, const std::string& process, int depth, std::ostream& out) {
    extlang::ExtModule em = extlang::parse_procl(read_file(file));
    for (const auto& trace : extlang::enumerate_traces(em, process, depth))
        out << extlang::render_trace(trace) << "\n";
    return 0;
}

int cmd_codegen(const std::string& file, const std::string& passes, const std::string& emit,
                std::ostream& out) {
    if (emit != "pseudo")
        throw UsageError{"unknown emitter '" + emit + "' (expected 'pseudo')"};
    std::vector<std::string> pass_names = split_list(passes, ',');
    for (const auto& name : pass_names)
        if (!irgen::pass_registry().count(name))
            throw UsageError{"unknown pass '" + name + "'"};
    baselang::BaseModule module = baselang::parse_module(read_file(file));
    irgen::IrModule ir = irgen::run_passes(irgen::translate(module), pass_names);
    out << irgen::emit_pseudo(ir);
    return 0;
}

int cmd_cosim(const std::string& file, std::ostream& out) {
    cosim::Scenario scenario = cosim::parse_scenario(read_file(file));
    cosim::CosimResult result = cosim::cosimulate(scenario);
    out << cosim::render_timeline(result.timeline);
    return 0;
}

} // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"tree-language tooling: schemas, checking, testing, codegen, co-simulation"};
    app.name("treeforge");
    app.require_subcommand(1);

    std::function<int()> action;

    auto* spec = app.add_subcommand("spec", "inspect tree specification files");
    spec->require_subcommand(1);
    auto* spec_check = spec->add_subcommand("check", "parse and compile a specification");
    std::string spec_file;
    std::string spec_base;
    spec_check->add_option("file", spec_file, "specification file")->required();
    spec_check->add_option("--extends", spec_base, "base specification the file extends");
    spec_check->callback([&] { action = [&] { return cmd_spec_check(spec_file, spec_base, out); }; });

    auto* check = app.add_subcommand("check", "type check a module");
    std::string check_file;
    check->add_option("module", check_file, "module file")->required();
    check->callback([&] { action = [&] { return cmd_check(check_file, out, err); }; });

    auto* eval = app.add_subcommand("eval", "evaluate a function call in a module");
    std::string eval_file;
    std::string eval_call;
    std::string eval_bounds;
    bool eval_solve = false;
    eval->add_option("module", eval_file, "module file")->required();
    eval->add_option("--call", eval_call, "call text, e.g. \"f(3)\"")->required();
    eval->add_flag("--solve", eval_solve, "search implicit definitions over the bounds");
    eval->add_option("--bounds", eval_bounds, "search range 'lo,hi'")->envname("TREEFORGE_BOUNDS");
    eval->callback(
        [&] { action = [&] { return cmd_eval(eval_file, eval_call, eval_solve, eval_bounds, out); }; });

    auto* po = app.add_subcommand("po", "list proof obligations");
    std::string po_file;
    po->add_option("module", po_file, "module file")->required();
    po->callback([&] { action = [&] { return cmd_po(po_file, out); }; });

    auto* ct = app.add_subcommand("ct", "combinatorial trace testing");
    ct->require_subcommand(1);
    auto* ct_expand = ct->add_subcommand("expand", "list the tests a trace expands into");
    auto* ct_run = ct->add_subcommand("run", "expand a trace and execute every test");
    std::string ct_file;
    std::string ct_trace;
    ctengine::CtConfig ct_defaults;
    int ct_max_repeat = ct_defaults.max_repeat;
    std::int64_t ct_max_tests = ct_defaults.max_tests;
    double ct_reduce = 1.0;
    std::uint64_t ct_seed = 0;
    for (CLI::App* sub : {ct_expand, ct_run}) {
        sub->add_option("module", ct_file, "module file")->required();
        sub->add_option("--trace", ct_trace, "trace name")->required();
        sub->add_option("--max-repeat", ct_max_repeat, "largest repetition bound")
            ->envname("TREEFORGE_MAX_REPEAT");
        sub->add_option("--max-tests", ct_max_tests, "expansion budget")
            ->envname("TREEFORGE_MAX_TESTS");
    }
    ct_run->add_option("--reduce", ct_reduce, "keep a seeded sample of ceil(f * n) tests");
    ct_run->add_option("--seed", ct_seed, "sampling seed")->envname("TREEFORGE_SEED");
    ct_expand->callback([&] {
        action = [&] {
            return cmd_ct_expand(ct_file, ct_trace, {ct_max_repeat, ct_max_tests}, out);
        };
    });
    ct_run->callback([&] {
        action = [&] {
            return cmd_ct_run(ct_file, ct_trace, {ct_max_repeat, ct_max_tests}, ct_reduce, ct_seed,
                              out);
        };
    });

    auto* traces = app.add_subcommand("traces", "enumerate the traces of a process");
    std::string traces_file;
    std::string traces_process;
    int traces_depth = 0;
    traces->add_option("module", traces_file, "module file")->required();
    traces->add_option("--process", traces_process, "process name")->required();
    traces->add_option("--depth", traces_depth, "maximum trace length")
        ->required()
        ->check(CLI::NonNegativeNumber);
    traces->callback(
        [&] { action = [&] { return cmd_traces(traces_file, traces_process, traces_depth, out); }; });

    auto* codegen = app.add_subcommand("codegen", "translate a module and emit code");
    std::string codegen_file;
    std::string codegen_passes = join(irgen::default_pass_order(), ",");
    std::string codegen_emit;
    codegen->add_option("module", codegen_file, "module file")->required();
    codegen->add_option("--passes", codegen_passes, "comma-separated pass list")
        ->envname("TREEFORGE_PASSES");
    codegen->add_option("--emit", codegen_emit, "output form ('pseudo')")->required();
    codegen->callback(
        [&] { action = [&] { return cmd_codegen(codegen_file, codegen_passes, codegen_emit, out); }; });

    auto* cosim_cmd = app.add_subcommand("cosim", "run a co-simulation scenario");
    std::string cosim_file;
    cosim_cmd->add_option("scenario", cosim_file, "scenario file")->required();
    cosim_cmd->callback([&] { action = [&] { return cmd_cosim(cosim_file, out); }; });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    if (!action) {
        err << app.help();
        return 2;
    }
    try {
        return action();
    } catch (const UsageError& u) {
        err << "treeforge: " << u.message << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace treeforge::cli
