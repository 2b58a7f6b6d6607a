#include "treeforge/treekit.hpp"

namespace treeforge::treekit {

using astspec::Alternative;
using astspec::Field;
using astspec::FieldKind;
using astspec::ScalarKind;

namespace {

bool scalar_matches(const Scalar& value, ScalarKind kind) {
    switch (kind) {
    case ScalarKind::Int: return std::holds_alternative<std::int64_t>(value);
    case ScalarKind::Real: return std::holds_alternative<double>(value);
    case ScalarKind::Bool: return std::holds_alternative<bool>(value);
    case ScalarKind::String:
    case ScalarKind::Ident: return std::holds_alternative<std::string>(value);
    }
    return false;
}

std::string shape_of(const FieldValue& value) {
    if (std::holds_alternative<Scalar>(value)) {
        const Scalar& s = std::get<Scalar>(value);
        if (std::holds_alternative<std::int64_t>(s)) return "int";
        if (std::holds_alternative<double>(s)) return "real";
        if (std::holds_alternative<bool>(s)) return "bool";
        return "string";
    }
    if (std::holds_alternative<NodePtr>(value)) return "node";
    if (std::holds_alternative<std::vector<NodePtr>>(value)) return "list";
    return "absent";
}

/// Checks one field value against its declared kind; returns a complaint or
/// the empty string.
std::string check_field(const Field& decl, const FieldValue& value) {
    const FieldKind& kind = decl.kind;
    switch (kind.shape) {
    case FieldKind::Shape::Scalar: {
        const Scalar* s = std::get_if<Scalar>(&value);
        if (!s || !scalar_matches(*s, kind.scalar))
            return "field '" + decl.name + "' expects " + kind.describe() + ", got " +
                   shape_of(value);
        return {};
    }
    case FieldKind::Shape::Node: {
        const NodePtr* child = std::get_if<NodePtr>(&value);
        if (!child || !*child)
            return "field '" + decl.name + "' expects a " + kind.category + " node, got " +
                   shape_of(value);
        if ((*child)->category != kind.category)
            return "field '" + decl.name + "' expects category " + kind.category +
                   ", got " + (*child)->category;
        return {};
    }
    case FieldKind::Shape::Opt: {
        if (std::holds_alternative<Absent>(value))
            return {};
        const NodePtr* child = std::get_if<NodePtr>(&value);
        if (!child || !*child)
            return "field '" + decl.name + "' expects an optional " + kind.category +
                   " node, got " + shape_of(value);
        if ((*child)->category != kind.category)
            return "field '" + decl.name + "' expects category " + kind.category +
                   ", got " + (*child)->category;
        return {};
    }
    case FieldKind::Shape::List: {
        const auto* items = std::get_if<std::vector<NodePtr>>(&value);
        if (!items)
            return "field '" + decl.name + "' expects a list of " + kind.category +
                   " nodes, got " + shape_of(value);
        for (const auto& item : *items) {
            if (!item)
                return "field '" + decl.name + "' contains a null element";
            if (item->category != kind.category)
                return "field '" + decl.name + "' expects elements of category " +
                       kind.category + ", got " + item->category;
        }
        return {};
    }
    }
    return {};
}

} // namespace

const FieldValue& Node::field(std::string_view name) const {
    auto it = fields.find(std::string(name));
    if (it == fields.end())
        throw Error(ErrorCode::FieldShapeMismatch,
                    "node " + category + "." + alternative + " has no field '" +
                        std::string(name) + "'",
                    span);
    return it->second;
}

NodePtr Node::child(std::string_view name) const {
    const FieldValue& v = field(name);
    if (const NodePtr* p = std::get_if<NodePtr>(&v))
        return *p;
    throw Error(ErrorCode::FieldShapeMismatch,
                "field '" + std::string(name) + "' of " + alternative + " is not a node", span);
}

NodePtr Node::opt_child(std::string_view name) const {
    const FieldValue& v = field(name);
    if (std::holds_alternative<Absent>(v))
        return nullptr;
    if (const NodePtr* p = std::get_if<NodePtr>(&v))
        return *p;
    throw Error(ErrorCode::FieldShapeMismatch,
                "field '" + std::string(name) + "' of " + alternative + " is not a node", span);
}

const std::vector<NodePtr>& Node::list(std::string_view name) const {
    const FieldValue& v = field(name);
    if (const auto* p = std::get_if<std::vector<NodePtr>>(&v))
        return *p;
    throw Error(ErrorCode::FieldShapeMismatch,
                "field '" + std::string(name) + "' of " + alternative + " is not a list", span);
}

namespace {
const Scalar& scalar_field(const Node& node, std::string_view name) {
    const FieldValue& v = node.field(name);
    if (const Scalar* p = std::get_if<Scalar>(&v))
        return *p;
    throw Error(ErrorCode::FieldShapeMismatch,
                "field '" + std::string(name) + "' of " + node.alternative + " is not a scalar",
                node.span);
}

template <typename T>
const T& scalar_as(const Node& node, std::string_view name, const char* kind) {
    const Scalar& s = scalar_field(node, name);
    if (const T* p = std::get_if<T>(&s))
        return *p;
    throw Error(ErrorCode::FieldShapeMismatch,
                "field '" + std::string(name) + "' of " + node.alternative + " is not " + kind,
                node.span);
}
} // namespace

std::int64_t Node::int_field(std::string_view name) const {
    return scalar_as<std::int64_t>(*this, name, "an int");
}

double Node::real_field(std::string_view name) const {
    return scalar_as<double>(*this, name, "a real");
}

bool Node::bool_field(std::string_view name) const {
    return scalar_as<bool>(*this, name, "a bool");
}

const std::string& Node::str_field(std::string_view name) const {
    return scalar_as<std::string>(*this, name, "a string");
}

NodePtr make_node(SchemaPtr schema, std::string_view category, std::string_view alternative,
                  FieldMap fields, std::optional<Span> span) {
    if (!schema)
        throw Error(ErrorCode::InvalidConfig, "make_node requires a schema");
    const Alternative* alt = schema->find_alternative(category, alternative);
    if (!alt)
        throw Error(ErrorCode::UnknownAlternative,
                    "(" + std::string(category) + ", " + std::string(alternative) +
                        ") is not declared in tree '" + schema->tree_id + "'",
                    span);

    for (const auto& decl : alt->fields) {
        auto it = fields.find(decl.name);
        if (it == fields.end()) {
            if (decl.kind.shape == FieldKind::Shape::Opt) {
                fields.emplace(decl.name, Absent{});
                continue;
            }
            throw Error(ErrorCode::FieldShapeMismatch,
                        "missing field '" + decl.name + "' (" + decl.kind.describe() +
                            ") of " + std::string(alternative),
                        span);
        }
        if (std::string complaint = check_field(decl, it->second); !complaint.empty())
            throw Error(ErrorCode::FieldShapeMismatch, complaint, span);
    }
    for (const auto& [name, _] : fields)
        if (!alt->find_field(name))
            throw Error(ErrorCode::FieldShapeMismatch,
                        "unexpected field '" + name + "' on " + std::string(alternative), span);

    auto node = std::make_shared<Node>();
    node->schema = std::move(schema);
    node->origin_tree_id = alt->origin_tree_id;
    node->category = std::string(category);
    node->alternative = std::string(alternative);
    node->fields = std::move(fields);
    node->span = span;
    return node;
}

namespace {

void validate_rec(const Schema& schema, const NodePtr& node, std::vector<Diagnostic>& out) {
    const Alternative* alt = schema.find_alternative(node->category, node->alternative);
    if (!alt) {
        out.push_back({"(" + node->category + ", " + node->alternative +
                           ") is not declared in tree '" + schema.tree_id + "'",
                       node->span});
        return;
    }
    if (node->origin_tree_id != alt->origin_tree_id)
        out.push_back({"node " + node->category + "." + node->alternative + " carries origin '" +
                           node->origin_tree_id + "', schema says '" + alt->origin_tree_id + "'",
                       node->span});
    for (const auto& decl : alt->fields) {
        auto it = node->fields.find(decl.name);
        if (it == node->fields.end()) {
            out.push_back({"missing field '" + decl.name + "' of " + node->alternative,
                           node->span});
            continue;
        }
        if (std::string complaint = check_field(decl, it->second); !complaint.empty())
            out.push_back({complaint, node->span});
    }
    for (const auto& [name, _] : node->fields)
        if (!alt->find_field(name))
            out.push_back({"unexpected field '" + name + "' on " + node->alternative,
                           node->span});
    // Recurse in declaration order so diagnostic order is deterministic.
    for (const auto& decl : alt->fields) {
        auto it = node->fields.find(decl.name);
        if (it == node->fields.end())
            continue;
        if (const NodePtr* child = std::get_if<NodePtr>(&it->second)) {
            if (*child)
                validate_rec(schema, *child, out);
        } else if (const auto* items = std::get_if<std::vector<NodePtr>>(&it->second)) {
            for (const auto& item : *items)
                if (item)
                    validate_rec(schema, item, out);
        }
    }
}

void collect_children(const NodePtr& node, std::vector<NodePtr>& out) {
    const Alternative* alt =
        node->schema ? node->schema->find_alternative(node->category, node->alternative)
                     : nullptr;
    if (!alt) {
        // Fall back to field-name order; only reachable for nodes whose schema
        // no longer declares them.
        for (const auto& [_, value] : node->fields) {
            if (const NodePtr* child = std::get_if<NodePtr>(&value)) {
                if (*child)
                    out.push_back(*child);
            } else if (const auto* items = std::get_if<std::vector<NodePtr>>(&value)) {
                for (const auto& item : *items)
                    if (item)
                        out.push_back(item);
            }
        }
        return;
    }
    for (const auto& decl : alt->fields) {
        auto it = node->fields.find(decl.name);
        if (it == node->fields.end())
            continue;
        if (const NodePtr* child = std::get_if<NodePtr>(&it->second)) {
            if (*child)
                out.push_back(*child);
        } else if (const auto* items = std::get_if<std::vector<NodePtr>>(&it->second)) {
            for (const auto& item : *items)
                if (item)
                    out.push_back(item);
        }
    }
}

void traverse_rec(const NodePtr& node, Order order, std::vector<NodePtr>& out) {
    if (order == Order::Pre)
        out.push_back(node);
    std::vector<NodePtr> children;
    collect_children(node, children);
    for (const auto& child : children)
        traverse_rec(child, order, out);
    if (order == Order::Post)
        out.push_back(node);
}

} // namespace

bool structurally_equal(const NodePtr& a, const NodePtr& b) {
    if (a == b)
        return true;
    if (!a || !b)
        return false;
    if (a->category != b->category || a->alternative != b->alternative)
        return false;
    if (a->fields.size() != b->fields.size())
        return false;
    for (auto ia = a->fields.begin(), ib = b->fields.begin(); ia != a->fields.end(); ++ia, ++ib) {
        if (ia->first != ib->first)
            return false;
        const FieldValue& va = ia->second;
        const FieldValue& vb = ib->second;
        if (va.index() != vb.index())
            return false;
        if (const auto* sa = std::get_if<Scalar>(&va)) {
            if (*sa != std::get<Scalar>(vb))
                return false;
        } else if (const auto* na = std::get_if<NodePtr>(&va)) {
            if (!structurally_equal(*na, std::get<NodePtr>(vb)))
                return false;
        } else if (const auto* la = std::get_if<std::vector<NodePtr>>(&va)) {
            const auto& lb = std::get<std::vector<NodePtr>>(vb);
            if (la->size() != lb.size())
                return false;
            for (size_t i = 0; i < la->size(); ++i)
                if (!structurally_equal((*la)[i], lb[i]))
                    return false;
        } // Absent == Absent
    }
    return true;
}

std::vector<Diagnostic> validate_tree(const Schema& schema, const NodePtr& root) {
    std::vector<Diagnostic> out;
    if (root)
        validate_rec(schema, root, out);
    return out;
}

std::vector<NodePtr> traverse(const NodePtr& root, Order order) {
    std::vector<NodePtr> out;
    if (root)
        traverse_rec(root, order, out);
    return out;
}

} // namespace treeforge::treekit
