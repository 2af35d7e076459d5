#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace templet {

/// 1-based line/column inside the scanned file.
struct Position {
    std::size_t line = 1;
    std::size_t column = 1;

    friend bool operator==(const Position&, const Position&) = default;
};

/// A position attached to AST nodes. It is carried for diagnostics only and
/// never participates in structural equality of the tree.
struct SourceLoc {
    Position pos;

    friend bool operator==(const SourceLoc&, const SourceLoc&) { return true; }
};

/// Advance `pos` over `text`, counting '\n' as a line break.
inline Position advance(Position pos, std::string_view text)
{
    for (char c : text) {
        if (c == '\n') {
            ++pos.line;
            pos.column = 1;
        } else {
            ++pos.column;
        }
    }
    return pos;
}

enum class Severity { Error, Warning };

inline std::string_view to_string(Severity s)
{
    return s == Severity::Error ? "error" : "warning";
}

struct Diagnostic {
    Severity severity = Severity::Error;
    std::string code;
    std::string message;
    Position pos;
};

using Diagnostics = std::vector<Diagnostic>;

inline bool has_errors(const Diagnostics& ds)
{
    for (const auto& d : ds)
        if (d.severity == Severity::Error) return true;
    return false;
}

inline std::size_t count_code(const Diagnostics& ds, std::string_view code)
{
    std::size_t n = 0;
    for (const auto& d : ds)
        if (d.code == code) ++n;
    return n;
}

/// `file:line:col: severity CODE message`
inline std::string format(const Diagnostic& d, std::string_view file)
{
    std::string out(file);
    out += ':' + std::to_string(d.pos.line) + ':' + std::to_string(d.pos.column) + ": ";
    out += to_string(d.severity);
    out += ' ';
    out += d.code;
    out += ' ';
    out += d.message;
    return out;
}

/// Base of every language-level failure thrown by the library. Carries a
/// stable code (e.g. "MissingScheme") and the position it refers to.
class Error : public std::runtime_error {
public:
    Error(std::string code, std::string message, Position pos = {})
        : std::runtime_error(message), code_(std::move(code)), pos_(pos)
    {
    }

    const std::string& code() const noexcept { return code_; }
    Position position() const noexcept { return pos_; }

    Diagnostic diagnostic() const { return {Severity::Error, code_, what(), pos_}; }

private:
    std::string code_;
    Position pos_;
};

} // namespace templet
