#include "treeforge/lexer.hpp"

#include <array>
#include <cctype>
#include <cstdlib>

namespace treeforge {

namespace {

bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

constexpr std::array<std::string_view, 7> kTwoCharOps = {
    ":=", "::", "==", "<>", "<=", ">=", "->",
};

constexpr std::string_view kOneCharOps = "+-*/=<>()[]{},:;|&?";

} // namespace

TokenBuffer::TokenBuffer(std::string source, CommentStyle comments)
    : source_(std::move(source)) {
    const std::string& src = source_;
    size_t pos = 0;
    int line = 1;
    int col = 1;

    auto advance = [&](size_t n) {
        for (size_t i = 0; i < n; ++i) {
            if (src[pos] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++pos;
        }
    };

    while (pos < src.size()) {
        char c = src[pos];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance(1);
            continue;
        }
        if (comments == CommentStyle::Hash && c == '#') {
            while (pos < src.size() && src[pos] != '\n')
                advance(1);
            continue;
        }
        if (comments == CommentStyle::Dashes && c == '-' && pos + 1 < src.size() &&
            src[pos + 1] == '-') {
            while (pos < src.size() && src[pos] != '\n')
                advance(1);
            continue;
        }

        Token tok;
        tok.span = {line, col, 0};
        tok.offset = pos;

        if (ident_start(c)) {
            size_t start = pos;
            while (pos < src.size() && ident_char(src[pos]))
                advance(1);
            tok.kind = TokenKind::Ident;
            tok.text = src.substr(start, pos - start);
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = pos;
            while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos])))
                advance(1);
            bool is_real = false;
            if (pos + 1 < src.size() && src[pos] == '.' &&
                std::isdigit(static_cast<unsigned char>(src[pos + 1]))) {
                is_real = true;
                advance(1);
                while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos])))
                    advance(1);
            }
            if (pos < src.size() && (src[pos] == 'e' || src[pos] == 'E')) {
                size_t look = pos + 1;
                if (look < src.size() && (src[look] == '+' || src[look] == '-'))
                    ++look;
                if (look < src.size() && std::isdigit(static_cast<unsigned char>(src[look]))) {
                    is_real = true;
                    advance(look - pos);
                    while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos])))
                        advance(1);
                }
            }
            tok.text = src.substr(start, pos - start);
            if (is_real) {
                tok.kind = TokenKind::Real;
                tok.real_value = std::strtod(tok.text.c_str(), nullptr);
            } else {
                tok.kind = TokenKind::Int;
                tok.int_value = std::strtoll(tok.text.c_str(), nullptr, 10);
            }
        } else {
            std::string_view rest(src.data() + pos, src.size() - pos);
            std::string_view matched;
            for (auto op : kTwoCharOps) {
                if (rest.substr(0, op.size()) == op) {
                    matched = op;
                    break;
                }
            }
            if (matched.empty() && kOneCharOps.find(c) != std::string_view::npos)
                matched = rest.substr(0, 1);
            if (matched.empty())
                throw Error(ErrorCode::SyntaxError,
                            std::string("unexpected character '") + c + "'",
                            Span{line, col, 1});
            tok.kind = TokenKind::Punct;
            tok.text = std::string(matched);
            advance(matched.size());
        }

        tok.span.length = static_cast<int>(pos - tok.offset);
        tokens_.push_back(std::move(tok));
    }

    Token end;
    end.kind = TokenKind::End;
    end.span = {line, col, 0};
    end.offset = pos;
    tokens_.push_back(std::move(end));
}

const Token& TokenBuffer::at(size_t index) const {
    if (index >= tokens_.size())
        return tokens_.back();
    return tokens_[index];
}

std::string TokenBuffer::rest_of_line(size_t token_index) const {
    const Token& tok = at(token_index);
    size_t start = tok.offset;
    size_t end = start;
    while (end < source_.size() && source_[end] != '\n')
        ++end;
    return source_.substr(start, end - start);
}

size_t TokenBuffer::first_token_after_line(size_t token_index) const {
    int line = at(token_index).span.line;
    size_t i = token_index;
    while (i < size() && !at(i).is(TokenKind::End) && at(i).span.line == line)
        ++i;
    return i;
}

} // namespace treeforge
