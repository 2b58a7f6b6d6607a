#pragma once

#include "treeforge/diag.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace treeforge {

enum class TokenKind { Ident, Int, Real, Punct, End };

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;       // lexeme (for Punct: the operator)
    std::int64_t int_value = 0;
    double real_value = 0.0;
    Span span;
    size_t offset = 0;      // byte offset into the source

    bool is(TokenKind k) const { return kind == k; }
    bool is_punct(std::string_view p) const { return kind == TokenKind::Punct && text == p; }
    bool is_ident(std::string_view name) const { return kind == TokenKind::Ident && text == name; }
};

enum class CommentStyle { None, Hash, Dashes };

/// Tokenizes a whole source buffer up front. All notations in the toolkit
/// share one token shape; keywords are plain identifiers matched by the
/// parsers.
class TokenBuffer {
public:
    TokenBuffer(std::string source, CommentStyle comments);

    const Token& at(size_t index) const;
    size_t size() const { return tokens_.size(); }
    const std::string& source() const { return source_; }

    /// Raw source text from the given token to the end of that token's line,
    /// used for sections that keep their payload unparsed.
    std::string rest_of_line(size_t token_index) const;

    /// Index of the first token on a later line than the given token.
    size_t first_token_after_line(size_t token_index) const;

private:
    std::string source_;
    std::vector<Token> tokens_;
};

} // namespace treeforge
