#pragma once

#include "treeforge/baselang.hpp"

#include <cstdint>
#include <set>

namespace treeforge::extlang {

using astspec::SchemaPtr;
using baselang::BaseModule;
using baselang::Obligation;
using treekit::Node;
using treekit::NodePtr;

/// The Proc-L extension tree specification (extends the Base-L tree).
std::string_view spec_text();

/// Merged schema: every Base-L category plus the process categories. Base
/// alternatives keep their origin, so hybrid trees tag themselves.
SchemaPtr schema();

struct ProcDef {
    std::string name;
    NodePtr node; // the ProcessDef node
    NodePtr body; // its Proc body
    Span span;
};

/// A Proc-L document: a full Base-L module part plus process definitions
/// whose guards are Base-L expressions embedded in extension trees.
struct ExtModule {
    BaseModule base;
    std::vector<ProcDef> processes;
    SchemaPtr schema;

    const ProcDef* find_process(std::string_view name) const;
};

ExtModule parse_procl(std::string_view text);

/// Process-side handlers for the type checker. Guards are dispatched, not
/// inspected: the Exp subtree lands in the Base-L analysis.
treekit::Analysis<baselang::Type, baselang::TcContext> make_ext_type_check_analysis();

/// Process-side handlers for the obligation generator.
treekit::Analysis<std::monostate, baselang::PoContext> make_ext_po_analysis();

struct ExtCheckResult {
    std::vector<Diagnostic> diagnostics;
    std::vector<treekit::DispatchLogEntry> dispatch_log;
    std::map<std::string, std::uint64_t> dispatch_counters;
};

/// Checks the base part and every process through one shared dispatcher;
/// the instrumentation of the whole run comes back with the result.
ExtCheckResult type_check_ext(const ExtModule& em);

struct ExtPoResult {
    std::vector<Obligation> obligations;
    std::vector<treekit::DispatchLogEntry> dispatch_log;
    std::map<std::string, std::uint64_t> dispatch_counters;
};

ExtPoResult gen_pos_ext(const ExtModule& em);

using Trace = std::vector<std::string>;

/// Whether the process can terminate successfully without taking a step.
bool proc_terminates(const ExtModule& em, const NodePtr& proc);

/// The process's immediate steps: (event, successor), in syntactic order.
std::vector<std::pair<std::string, NodePtr>> proc_steps(const ExtModule& em,
                                                        const NodePtr& proc);

/// All traces of the named process up to the given length. The result is
/// prefix-closed and ordered lexicographically by the set's ordering.
std::set<Trace> enumerate_traces(const ExtModule& em, std::string_view process_name,
                                 int max_depth);

std::string render_trace(const Trace& trace);

} // namespace treeforge::extlang
