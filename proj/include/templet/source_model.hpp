#pragma once

// Lossless block decomposition of a marked source file.
//
// A module is a byte stream of base-language text with two kinds of marked
// regions: exactly one scheme block and any number of user blocks. Markers
// are literal substrings matched first-occurrence, left to right.

#include "templet/diagnostics.hpp"

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace templet {

struct SignatureSet {
    std::string scheme_prefix = "/*templet*";
    std::string scheme_postfix = "*end*/";
    std::string user_prefix_open = "/*templet$";
    std::string user_prefix_close = "*/";
    std::string user_postfix = "/*end*/";

    std::array<const std::string*, 5> all() const
    {
        return {&scheme_prefix, &scheme_postfix, &user_prefix_open, &user_prefix_close, &user_postfix};
    }

    friend bool operator==(const SignatureSet&, const SignatureSet&) = default;
};

/// Throws Error("InvalidSignatures") unless every marker is non-empty, the
/// markers are pairwise distinct, and neither opener overlaps another marker
/// by containment. Closers may contain each other (the defaults do: `*end*/`
/// sits inside `/*end*/`); they are only searched for inside an open block.
inline void validate(const SignatureSet& sig)
{
    auto markers = sig.all();
    for (std::size_t i = 0; i < markers.size(); ++i) {
        if (markers[i]->empty()) throw Error("InvalidSignatures", "signature markers must be non-empty");
        for (std::size_t j = i + 1; j < markers.size(); ++j)
            if (*markers[i] == *markers[j])
                throw Error("InvalidSignatures", "signature markers must be distinct: '" + *markers[i] + "'");
    }
    for (const std::string* opener : {&sig.scheme_prefix, &sig.user_prefix_open}) {
        for (const std::string* other : markers) {
            if (other == opener) continue;
            if (opener->find(*other) != std::string::npos || other->find(*opener) != std::string::npos)
                throw Error("InvalidSignatures",
                            "opening marker '" + *opener + "' overlaps marker '" + *other + "'");
        }
    }
}

enum class BlockKind { BaseText, UserBlock, SchemeBlock };

/// User-block key: the header between the user-block markers split on '$'.
/// Empty segments are legal (`/*templet$$include*/` yields {"", "include"}).
using UserKey = std::vector<std::string>;

inline std::string join_key(const UserKey& key)
{
    std::string out;
    for (std::size_t i = 0; i < key.size(); ++i) {
        if (i) out += '$';
        out += key[i];
    }
    return out;
}

inline UserKey split_key(std::string_view text)
{
    UserKey key;
    std::size_t start = 0;
    for (;;) {
        auto dollar = text.find('$', start);
        if (dollar == std::string_view::npos) {
            key.emplace_back(text.substr(start));
            return key;
        }
        key.emplace_back(text.substr(start, dollar - start));
        start = dollar + 1;
    }
}

struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;

    friend bool operator==(const Span&, const Span&) = default;
};

struct Block {
    BlockKind kind = BlockKind::BaseText;
    std::string text; // interior, markers excluded
    UserKey key;      // UserBlock only
    Span span;        // markers included

    friend bool operator==(const Block&, const Block&) = default;
};

struct SourceModule {
    std::vector<Block> blocks;
    SignatureSet signatures;

    const Block& scheme_block() const
    {
        for (const auto& b : blocks)
            if (b.kind == BlockKind::SchemeBlock) return b;
        throw Error("MissingScheme", "module has no scheme block");
    }

    friend bool operator==(const SourceModule&, const SourceModule&) = default;
};

/// Position of the first byte of the scheme block interior.
inline Position scheme_origin(const SourceModule& m, std::string_view file_text)
{
    const Block& b = m.scheme_block();
    return advance(Position{}, file_text.substr(0, b.span.begin + m.signatures.scheme_prefix.size()));
}

namespace detail {

inline Position position_at(std::string_view text, std::size_t offset)
{
    return advance(Position{}, text.substr(0, offset));
}

struct Found {
    std::size_t pos = std::string_view::npos;
    const std::string* marker = nullptr;
};

inline Found find_first(std::string_view text, std::size_t from, std::initializer_list<const std::string*> markers)
{
    Found best;
    for (const std::string* m : markers) {
        auto p = text.find(*m, from);
        if (p != std::string_view::npos && p < best.pos) best = {p, m};
    }
    return best;
}

} // namespace detail

/// Split `text` into blocks. Throws Error with one of the codes
/// MissingScheme, DuplicateScheme, UnterminatedBlock, NestedBlock, StrayMarker.
inline SourceModule scan(std::string_view text, const SignatureSet& sig = {})
{
    validate(sig);
    SourceModule m;
    m.signatures = sig;

    auto check_closers = [&](std::size_t begin, std::size_t end) {
        auto f = detail::find_first(text.substr(0, end), begin, {&sig.scheme_postfix, &sig.user_postfix});
        if (f.pos != std::string_view::npos)
            throw Error("StrayMarker", "closing marker '" + *f.marker + "' outside of an open block",
                        detail::position_at(text, f.pos));
    };
    auto check_nested = [&](std::size_t begin, std::size_t end) {
        auto f = detail::find_first(text.substr(0, end), begin, {&sig.scheme_prefix, &sig.user_prefix_open});
        if (f.pos != std::string_view::npos)
            throw Error("NestedBlock", "marker '" + *f.marker + "' inside an open block",
                        detail::position_at(text, f.pos));
    };

    std::size_t pos = 0;
    std::size_t schemes = 0;
    while (pos < text.size()) {
        auto open = detail::find_first(text, pos, {&sig.scheme_prefix, &sig.user_prefix_open});
        std::size_t base_end = open.pos == std::string_view::npos ? text.size() : open.pos;
        if (base_end > pos) {
            check_closers(pos, base_end);
            m.blocks.push_back({BlockKind::BaseText, std::string(text.substr(pos, base_end - pos)), {}, {pos, base_end}});
        }
        if (open.pos == std::string_view::npos) break;

        const std::size_t start = open.pos;
        const std::size_t body = start + open.marker->size();
        if (open.marker == &sig.scheme_prefix) {
            auto close = text.find(sig.scheme_postfix, body);
            if (close == std::string_view::npos)
                throw Error("UnterminatedBlock", "scheme block is not closed by '" + sig.scheme_postfix + "'",
                            detail::position_at(text, start));
            check_nested(body, close);
            if (++schemes > 1)
                throw Error("DuplicateScheme", "module contains more than one scheme block",
                            detail::position_at(text, start));
            pos = close + sig.scheme_postfix.size();
            m.blocks.push_back({BlockKind::SchemeBlock, std::string(text.substr(body, close - body)), {}, {start, pos}});
        } else {
            auto header_end = text.find(sig.user_prefix_close, body);
            if (header_end == std::string_view::npos)
                throw Error("UnterminatedBlock", "user block header is not closed by '" + sig.user_prefix_close + "'",
                            detail::position_at(text, start));
            check_nested(body, header_end);
            const std::size_t content = header_end + sig.user_prefix_close.size();
            auto close = text.find(sig.user_postfix, content);
            if (close == std::string_view::npos)
                throw Error("UnterminatedBlock", "user block is not closed by '" + sig.user_postfix + "'",
                            detail::position_at(text, start));
            check_nested(content, close);
            if (sig.scheme_postfix != sig.user_postfix) {
                auto stray = text.substr(0, close).find(sig.scheme_postfix, content);
                if (stray != std::string_view::npos)
                    throw Error("StrayMarker", "closing marker '" + sig.scheme_postfix + "' inside a user block",
                                detail::position_at(text, stray));
            }
            pos = close + sig.user_postfix.size();
            m.blocks.push_back({BlockKind::UserBlock, std::string(text.substr(content, close - content)),
                                split_key(text.substr(body, header_end - body)), {start, pos}});
        }
    }
    if (schemes == 0) throw Error("MissingScheme", "module has no scheme block", detail::position_at(text, text.size()));
    return m;
}

inline void render_block(std::string& out, const Block& b, const SignatureSet& sig)
{
    switch (b.kind) {
    case BlockKind::BaseText:
        out += b.text;
        break;
    case BlockKind::SchemeBlock:
        out += sig.scheme_prefix;
        out += b.text;
        out += sig.scheme_postfix;
        break;
    case BlockKind::UserBlock:
        out += sig.user_prefix_open;
        out += join_key(b.key);
        out += sig.user_prefix_close;
        out += b.text;
        out += sig.user_postfix;
        break;
    }
}

inline std::string render(const SourceModule& m)
{
    std::string out;
    for (const auto& b : m.blocks) render_block(out, b, m.signatures);
    return out;
}

/// Recompute spans from block contents, e.g. after a transformation.
inline void reflow_spans(SourceModule& m)
{
    std::size_t offset = 0;
    std::string scratch;
    for (auto& b : m.blocks) {
        scratch.clear();
        render_block(scratch, b, m.signatures);
        b.span = {offset, offset + scratch.size()};
        offset = b.span.end;
    }
}

/// Key -> indices into `m.blocks`, duplicates kept in file order.
inline std::map<UserKey, std::vector<std::size_t>> user_blocks(const SourceModule& m)
{
    std::map<UserKey, std::vector<std::size_t>> index;
    for (std::size_t i = 0; i < m.blocks.size(); ++i)
        if (m.blocks[i].kind == BlockKind::UserBlock) index[m.blocks[i].key].push_back(i);
    return index;
}

} // namespace templet
