#pragma once

#include "templet/diagnostics.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace templet {

enum class TokenKind { Ident, Delimiter };

struct Token {
    TokenKind kind = TokenKind::Ident;
    std::string text;
    Position pos;

    bool is(std::string_view delim) const { return kind == TokenKind::Delimiter && text == delim; }

    friend bool operator==(const Token&, const Token&) = default;
};

inline bool is_delimiter_char(char c)
{
    switch (c) {
    case '~': case '=': case ';': case '.': case '+': case '?': case '!': case '|':
    case ',': case '*': case ':': case '&': case '(': case ')': case '<': case '>':
        return true;
    default:
        return false;
    }
}

inline bool is_space(char c)
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

/// Total: every run of non-space, non-delimiter bytes is an identifier. A '-'
/// is an identifier byte unless it starts "->".
inline std::vector<Token> tokenize(std::string_view text, Position origin = {})
{
    std::vector<Token> out;
    Position pos = origin;
    std::size_t i = 0;
    auto step = [&](std::size_t n) {
        pos = advance(pos, text.substr(i, n));
        i += n;
    };
    while (i < text.size()) {
        char c = text[i];
        if (is_space(c)) {
            step(1);
        } else if (c == '-' && i + 1 < text.size() && text[i + 1] == '>') {
            out.push_back({TokenKind::Delimiter, "->", pos});
            step(2);
        } else if (is_delimiter_char(c)) {
            out.push_back({TokenKind::Delimiter, std::string(1, c), pos});
            step(1);
        } else {
            std::size_t j = i;
            while (j < text.size() && !is_space(text[j]) && !is_delimiter_char(text[j]) &&
                   !(text[j] == '-' && j + 1 < text.size() && text[j + 1] == '>'))
                ++j;
            out.push_back({TokenKind::Ident, std::string(text.substr(i, j - i)), pos});
            step(j - i);
        }
    }
    return out;
}

} // namespace templet
