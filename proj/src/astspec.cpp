#include "treeforge/astspec.hpp"

#include "treeforge/lexer.hpp"

namespace treeforge::astspec {

std::string_view scalar_kind_name(ScalarKind kind) {
    switch (kind) {
    case ScalarKind::Int: return "int";
    case ScalarKind::Real: return "real";
    case ScalarKind::Bool: return "bool";
    case ScalarKind::String: return "string";
    case ScalarKind::Ident: return "ident";
    }
    return "?";
}

std::string FieldKind::describe() const {
    switch (shape) {
    case Shape::Scalar: return std::string(scalar_kind_name(scalar));
    case Shape::Node: return (base_qualified ? "base::" : "") + category;
    case Shape::List: return (base_qualified ? "base::" : "") + category + "*";
    case Shape::Opt: return (base_qualified ? "base::" : "") + category + "?";
    }
    return "?";
}

const Field* Alternative::find_field(std::string_view field_name) const {
    for (const auto& f : fields)
        if (f.name == field_name)
            return &f;
    return nullptr;
}

const Category* Schema::find_category(std::string_view name) const {
    auto it = categories.find(std::string(name));
    return it == categories.end() ? nullptr : &it->second;
}

const Alternative* Schema::find_alternative(std::string_view category,
                                            std::string_view alternative) const {
    const Category* cat = find_category(category);
    if (!cat)
        return nullptr;
    auto it = cat->alternatives.find(std::string(alternative));
    return it == cat->alternatives.end() ? nullptr : &it->second;
}

namespace {

class SpecParser {
public:
    explicit SpecParser(std::string_view text)
        : tokens_(std::string(text), CommentStyle::Hash) {}

    SpecAst parse() {
        SpecAst ast;
        expect_keyword("tree");
        ast.tree_id = expect_ident("tree name");
        if (peek().is_ident("extends")) {
            next();
            ast.extends_id = expect_ident("base tree name");
        }
        while (!peek().is(TokenKind::End))
            ast.categories.push_back(parse_category());
        check_unique_names(ast);
        return ast;
    }

private:
    CategoryDecl parse_category() {
        CategoryDecl cat;
        cat.span = peek().span;
        expect_keyword("node");
        cat.name = expect_ident("category name");
        expect_punct("=");
        while (peek().is_punct("|"))
            cat.alternatives.push_back(parse_alternative());
        if (cat.alternatives.empty())
            throw Error(ErrorCode::SyntaxError,
                        "category '" + cat.name + "' has no alternatives", peek().span);
        return cat;
    }

    AlternativeDecl parse_alternative() {
        AlternativeDecl alt;
        expect_punct("|");
        alt.span = peek().span;
        alt.name = expect_ident("alternative name");
        expect_punct("(");
        if (!peek().is_punct(")")) {
            alt.fields.push_back(parse_field());
            while (peek().is_punct(",")) {
                next();
                alt.fields.push_back(parse_field());
            }
        }
        expect_punct(")");
        return alt;
    }

    FieldDecl parse_field() {
        FieldDecl field;
        field.span = peek().span;
        field.name = expect_ident("field name");
        expect_punct(":");
        field.kind = parse_kind();
        return field;
    }

    FieldKind parse_kind() {
        FieldKind kind;
        std::string name = expect_ident("field kind");
        if (name == "int" || name == "real" || name == "bool" || name == "string" ||
            name == "ident") {
            kind.shape = FieldKind::Shape::Scalar;
            kind.scalar = name == "int"    ? ScalarKind::Int
                          : name == "real" ? ScalarKind::Real
                          : name == "bool" ? ScalarKind::Bool
                          : name == "string" ? ScalarKind::String
                                             : ScalarKind::Ident;
            return kind;
        }
        kind.shape = FieldKind::Shape::Node;
        if (name == "base" && peek().is_punct("::")) {
            next();
            kind.base_qualified = true;
            kind.category = expect_ident("base category name");
        } else {
            kind.category = name;
        }
        if (peek().is_punct("*")) {
            next();
            kind.shape = FieldKind::Shape::List;
        } else if (peek().is_punct("?")) {
            next();
            kind.shape = FieldKind::Shape::Opt;
        }
        return kind;
    }

    void check_unique_names(const SpecAst& ast) {
        if (ast.tree_id.empty())
            throw Error(ErrorCode::SyntaxError, "empty tree id");
        std::map<std::string, Span> cats;
        for (const auto& cat : ast.categories) {
            report_duplicate(cats, cat.name, cat.span, "category");
            std::map<std::string, Span> alts;
            for (const auto& alt : cat.alternatives) {
                report_duplicate(alts, alt.name, alt.span,
                                 "alternative in category '" + cat.name + "'");
                std::map<std::string, Span> fields;
                for (const auto& field : alt.fields)
                    report_duplicate(fields, field.name, field.span,
                                     "field in alternative '" + alt.name + "'");
            }
        }
    }

    static void report_duplicate(std::map<std::string, Span>& seen, const std::string& name,
                                 const Span& span, const std::string& what) {
        auto [it, inserted] = seen.emplace(name, span);
        if (!inserted)
            throw Error(ErrorCode::DuplicateName,
                        what + " '" + name + "' already declared at " + to_string(it->second),
                        span);
    }

    const Token& peek() const { return tokens_.at(index_); }
    const Token& next() { return tokens_.at(index_++); }

    void expect_keyword(std::string_view kw) {
        if (!peek().is_ident(kw))
            throw Error(ErrorCode::SyntaxError,
                        "expected '" + std::string(kw) + "', got '" + peek().text + "'",
                        peek().span);
        next();
    }

    std::string expect_ident(std::string_view what) {
        if (!peek().is(TokenKind::Ident))
            throw Error(ErrorCode::SyntaxError,
                        "expected " + std::string(what) + ", got '" + peek().text + "'",
                        peek().span);
        return next().text;
    }

    void expect_punct(std::string_view p) {
        if (!peek().is_punct(p))
            throw Error(ErrorCode::SyntaxError,
                        "expected '" + std::string(p) + "', got '" + peek().text + "'",
                        peek().span);
        next();
    }

    TokenBuffer tokens_;
    size_t index_ = 0;
};

void resolve_reference(const Schema& schema, const Schema* base, const FieldDecl& field,
                       bool extension) {
    const FieldKind& kind = field.kind;
    if (kind.shape == FieldKind::Shape::Scalar)
        return;
    if (kind.base_qualified) {
        if (!extension)
            throw Error(ErrorCode::QualifierWithoutBase,
                        "field '" + field.name + "' uses base:: but the tree extends nothing",
                        field.span);
        if (!base->find_category(kind.category))
            throw Error(ErrorCode::UnresolvedReference,
                        "base category '" + kind.category + "' not found in tree '" +
                            base->tree_id + "'",
                        field.span);
        return;
    }
    if (!schema.find_category(kind.category))
        throw Error(ErrorCode::UnresolvedReference,
                    "category '" + kind.category + "' not declared" +
                        (extension ? " in the extension (use base:: for base categories)" : ""),
                    field.span);
}

Alternative compile_alternative(const AlternativeDecl& decl, const std::string& origin) {
    Alternative alt;
    alt.name = decl.name;
    alt.origin_tree_id = origin;
    for (const auto& field : decl.fields)
        alt.fields.push_back({field.name, field.kind});
    return alt;
}

void add_categories(Schema& schema, const SpecAst& ast) {
    for (const auto& decl : ast.categories) {
        Category cat;
        cat.name = decl.name;
        cat.origin_tree_id = ast.tree_id;
        for (const auto& alt_decl : decl.alternatives)
            cat.alternatives.emplace(alt_decl.name,
                                     compile_alternative(alt_decl, ast.tree_id));
        schema.categories.emplace(cat.name, std::move(cat));
    }
}

} // namespace

SpecAst parse_spec(std::string_view text) {
    return SpecParser(text).parse();
}

Schema build_schema(const SpecAst& ast) {
    if (ast.extends_id)
        throw Error(ErrorCode::BaseMismatch,
                    "spec extends '" + *ast.extends_id +
                        "'; build_schema handles base specs only");
    Schema schema;
    schema.tree_id = ast.tree_id;
    add_categories(schema, ast);
    for (const auto& cat : ast.categories)
        for (const auto& alt : cat.alternatives)
            for (const auto& field : alt.fields)
                resolve_reference(schema, nullptr, field, false);
    return schema;
}

Schema extend_schema(const Schema& base, const SpecAst& ext) {
    if (!ext.extends_id)
        throw Error(ErrorCode::BaseMismatch, "tree '" + ext.tree_id + "' extends nothing");
    if (*ext.extends_id != base.tree_id)
        throw Error(ErrorCode::BaseMismatch,
                    "tree extends '" + *ext.extends_id + "' but the base tree is '" +
                        base.tree_id + "'");

    Schema merged;
    merged.tree_id = ext.tree_id;
    merged.base_tree_id = base.tree_id;
    merged.categories = base.categories;

    for (const auto& decl : ext.categories)
        if (base.find_category(decl.name))
            throw Error(ErrorCode::IllegalOverride,
                        "extension redeclares base category '" + decl.name + "'", decl.span);

    add_categories(merged, ext);

    for (const auto& cat : ext.categories)
        for (const auto& alt : cat.alternatives)
            for (const auto& field : alt.fields)
                resolve_reference(merged, &base, field, true);
    return merged;
}

} // namespace treeforge::astspec
