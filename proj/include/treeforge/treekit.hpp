#pragma once

#include "treeforge/astspec.hpp"
#include "treeforge/diag.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace treeforge::treekit {

using astspec::Schema;
using astspec::SchemaPtr;

struct Node;
using NodePtr = std::shared_ptr<const Node>;

using Scalar = std::variant<std::int64_t, double, bool, std::string>;

/// Marker for an opt field with no value.
struct Absent {
    bool operator==(const Absent&) const = default;
};

using FieldValue = std::variant<Scalar, NodePtr, std::vector<NodePtr>, Absent>;
using FieldMap = std::map<std::string, FieldValue>;

/// A generic tree instance conforming to a schema. Nodes are immutable and
/// shareable; the origin tree id drives extension-aware dispatch.
struct Node {
    SchemaPtr schema;
    std::string origin_tree_id;
    std::string category;
    std::string alternative;
    FieldMap fields;
    std::optional<Span> span;

    bool is(std::string_view cat, std::string_view alt) const {
        return category == cat && alternative == alt;
    }

    const FieldValue& field(std::string_view name) const;
    NodePtr child(std::string_view name) const;
    NodePtr opt_child(std::string_view name) const; // nullptr when absent
    const std::vector<NodePtr>& list(std::string_view name) const;
    std::int64_t int_field(std::string_view name) const;
    double real_field(std::string_view name) const;
    bool bool_field(std::string_view name) const;
    const std::string& str_field(std::string_view name) const;
};

/// Builds a validated node. The origin tag is taken from the schema's
/// alternative, so hybrid trees tag themselves correctly no matter which
/// notation's parser constructs them.
NodePtr make_node(SchemaPtr schema, std::string_view category, std::string_view alternative,
                  FieldMap fields, std::optional<Span> span = std::nullopt);

/// Checks a whole tree against a schema. Returns diagnostics instead of
/// throwing; empty means every node satisfies the node invariants.
std::vector<Diagnostic> validate_tree(const Schema& schema, const NodePtr& root);

/// Structural comparison: category, alternative, and fields, recursively.
/// Spans and schema identity are ignored.
bool structurally_equal(const NodePtr& a, const NodePtr& b);

enum class Order { Pre, Post };

/// Deterministic traversal: children in schema field-declaration order,
/// list fields in element order.
std::vector<NodePtr> traverse(const NodePtr& root, Order order);

template <typename R, typename C>
class Dispatcher;

/// Handler table for one tree id. Lookup order: exact (category, alternative)
/// pair, then category default, then global default.
///
/// Handlers never call another analysis directly; recursive descent re-enters
/// the dispatcher, which is what lets an extension re-assume control when a
/// base analysis walks into an extension subtree.
template <typename R, typename C>
class Analysis {
public:
    using Handler = std::function<R(const Node&, C&, Dispatcher<R, C>&)>;
    using PairKey = std::pair<std::string, std::string>;

    explicit Analysis(std::string tree_id) : tree_id_(std::move(tree_id)) {}

    const std::string& tree_id() const { return tree_id_; }

    Analysis& on(std::string category, std::string alternative, Handler handler) {
        handlers_[{std::move(category), std::move(alternative)}] = std::move(handler);
        return *this;
    }

    Analysis& on_category(std::string category, Handler handler) {
        category_defaults_[std::move(category)] = std::move(handler);
        return *this;
    }

    Analysis& otherwise(Handler handler) {
        global_default_ = std::move(handler);
        return *this;
    }

    const Handler* find(const std::string& category, const std::string& alternative) const {
        if (auto it = handlers_.find({category, alternative}); it != handlers_.end())
            return &it->second;
        if (auto it = category_defaults_.find(category); it != category_defaults_.end())
            return &it->second;
        if (global_default_)
            return &global_default_;
        return nullptr;
    }

    /// Exact-pair keys, exposed so tests can assert which alternatives an
    /// analysis claims for itself.
    std::vector<PairKey> exact_pairs() const {
        std::vector<PairKey> keys;
        for (const auto& [key, _] : handlers_)
            keys.push_back(key);
        return keys;
    }

private:
    std::string tree_id_;
    std::map<PairKey, Handler> handlers_;
    std::map<std::string, Handler> category_defaults_;
    Handler global_default_;
};

struct DispatchLogEntry {
    std::string category;
    std::string alternative;
    std::string origin;
    std::string handler_owner;

    bool operator==(const DispatchLogEntry&) const = default;
};

/// Routes each node to the analysis registered for the node's origin tree.
/// Counters and the dispatch log are always on; they are the measurement
/// basis for the reuse properties.
template <typename R, typename C>
class Dispatcher {
public:
    void register_analysis(std::string_view tree_id, Analysis<R, C> analysis) {
        if (analysis.tree_id() != tree_id)
            throw Error(ErrorCode::InvalidConfig,
                        "analysis serves tree '" + analysis.tree_id() +
                            "', registered under '" + std::string(tree_id) + "'");
        auto [it, inserted] = analyses_.emplace(std::string(tree_id), std::move(analysis));
        if (!inserted)
            throw Error(ErrorCode::DuplicateRegistration,
                        "an analysis for tree '" + std::string(tree_id) +
                            "' is already registered");
    }

    R dispatch(const Node& node, C& context) {
        auto it = analyses_.find(node.origin_tree_id);
        if (it == analyses_.end())
            throw Error(ErrorCode::MissingAnalysis,
                        "no analysis registered for tree '" + node.origin_tree_id + "'",
                        node.span);
        Analysis<R, C>& analysis = it->second;
        const auto* handler = analysis.find(node.category, node.alternative);
        if (!handler)
            throw Error(ErrorCode::HandlerError,
                        "analysis for '" + analysis.tree_id() + "' has no handler for (" +
                            node.category + ", " + node.alternative + ")",
                        node.span);
        ++counters_[node.origin_tree_id];
        log_.push_back({node.category, node.alternative, node.origin_tree_id,
                        analysis.tree_id()});
        try {
            return (*handler)(node, context, *this);
        } catch (const Error& err) {
            if (!err.span() && node.span)
                throw err.with_span(*node.span);
            throw;
        } catch (const std::exception& ex) {
            throw Error(ErrorCode::HandlerError, ex.what(), node.span);
        }
    }

    R dispatch(const NodePtr& node, C& context) { return dispatch(*node, context); }

    const Analysis<R, C>* find_analysis(std::string_view tree_id) const {
        auto it = analyses_.find(std::string(tree_id));
        return it == analyses_.end() ? nullptr : &it->second;
    }

    const std::map<std::string, std::uint64_t>& counters() const { return counters_; }
    const std::vector<DispatchLogEntry>& log() const { return log_; }

    std::string log_text() const {
        std::string out;
        for (const auto& e : log_) {
            out += "(" + e.category + "," + e.alternative + "," + e.origin + "," +
                   e.handler_owner + ")\n";
        }
        return out;
    }

    void reset_instrumentation() {
        counters_.clear();
        log_.clear();
    }

private:
    std::map<std::string, Analysis<R, C>> analyses_;
    std::map<std::string, std::uint64_t> counters_;
    std::vector<DispatchLogEntry> log_;
};

} // namespace treeforge::treekit
