#pragma once

// Internal parsing surface shared by the Base-L parser and the notations that
// embed Base-L fragments (process guards, plant derivatives, scenarios).

#include "treeforge/baselang.hpp"
#include "treeforge/lexer.hpp"

#include <set>

namespace treeforge::baselang::detail {

struct Cursor {
    explicit Cursor(const TokenBuffer& buf) : buf(&buf) {}

    const TokenBuffer* buf;
    size_t pos = 0;

    const Token& peek(size_t ahead = 0) const { return buf->at(pos + ahead); }
    bool at_end() const { return peek().is(TokenKind::End); }

    const Token& take() {
        const Token& tok = buf->at(pos);
        if (!tok.is(TokenKind::End))
            ++pos;
        return tok;
    }

    bool eat_punct(std::string_view p) {
        if (peek().is_punct(p)) {
            take();
            return true;
        }
        return false;
    }

    bool eat_kw(std::string_view kw) {
        if (peek().is_ident(kw)) {
            take();
            return true;
        }
        return false;
    }

    const Token& expect_punct(std::string_view p);
    const Token& expect_kw(std::string_view kw);
    const Token& expect_ident(std::string_view what);

    [[noreturn]] void fail(std::string message) const;
};

/// Words that cannot name variables, functions, operations, or processes.
bool is_reserved(std::string_view word);

NodePtr parse_exp(Cursor& cur, const SchemaPtr& schema);
NodePtr parse_stmt(Cursor& cur, const SchemaPtr& schema);

std::vector<Param> parse_typed_params(Cursor& cur);

/// Parses module sections (values/state/functions/operations/traces) until a
/// stop keyword, a foreign section, or the end of input. Nodes are built
/// against the given schema so extension notations can host hybrid trees.
BaseModule parse_module_body(Cursor& cur, const SchemaPtr& schema,
                             const std::set<std::string, std::less<>>& stop_keywords);

} // namespace treeforge::baselang::detail
