#pragma once

#include "treeforge/diag.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace treeforge::astspec {

enum class ScalarKind { Int, Real, Bool, String, Ident };

std::string_view scalar_kind_name(ScalarKind kind);

/// Shape of one field of an alternative. Scalars are terminal values;
/// Node/List/Opt reference another category, optionally qualified with
/// `base::` inside an extension spec.
struct FieldKind {
    enum class Shape { Scalar, Node, List, Opt };

    Shape shape = Shape::Scalar;
    ScalarKind scalar = ScalarKind::Int; // Shape::Scalar only
    std::string category;                // Node/List/Opt
    bool base_qualified = false;

    bool operator==(const FieldKind&) const = default;

    std::string describe() const;
};

// --- parsed form -----------------------------------------------------------

struct FieldDecl {
    std::string name;
    FieldKind kind;
    Span span;
};

struct AlternativeDecl {
    std::string name;
    std::vector<FieldDecl> fields;
    Span span;
};

struct CategoryDecl {
    std::string name;
    std::vector<AlternativeDecl> alternatives;
    Span span;
};

struct SpecAst {
    std::string tree_id;
    std::optional<std::string> extends_id;
    std::vector<CategoryDecl> categories;
};

// --- compiled form ---------------------------------------------------------

struct Field {
    std::string name;
    FieldKind kind;

    bool operator==(const Field&) const = default;
};

struct Alternative {
    std::string name;
    std::string origin_tree_id;
    std::vector<Field> fields;

    bool operator==(const Alternative&) const = default;
    const Field* find_field(std::string_view name) const;
};

struct Category {
    std::string name;
    std::string origin_tree_id;
    std::map<std::string, Alternative> alternatives;

    bool operator==(const Category&) const = default;
};

/// Compiled metamodel of a tree specification. Immutable after construction
/// and safe to share across threads.
struct Schema {
    std::string tree_id;
    std::optional<std::string> base_tree_id;
    std::map<std::string, Category> categories;

    bool operator==(const Schema&) const = default;

    const Category* find_category(std::string_view name) const;
    const Alternative* find_alternative(std::string_view category,
                                        std::string_view alternative) const;
};

using SchemaPtr = std::shared_ptr<const Schema>;

/// Parses a tree specification source. Throws Error with SyntaxError or
/// DuplicateName on malformed input.
SpecAst parse_spec(std::string_view text);

/// Compiles a base specification (no `extends`) into a schema.
Schema build_schema(const SpecAst& ast);

/// Merges an extension specification over a base schema. The base value is
/// never mutated; base elements keep their origin, extension elements are
/// tagged with the extension tree id.
Schema extend_schema(const Schema& base, const SpecAst& ext);

} // namespace treeforge::astspec
