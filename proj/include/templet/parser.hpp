#pragma once

// Recursive-descent parser for module schemes.
//
//   scheme      = { channel | process }
//   channel     = '~' ident [params] ['=' state {';' state}] '.'
//   state       = ['+'] ident [('?'|'!') [rules]]
//   rules       = rule {'|' rule}
//   rule        = ident {',' ident} '->' ident
//   process     = '*' ident [params] ['=' ((ports [';' actions]) | actions)] '.'
//   ports       = port {';' port}
//   port        = ident ':' ident ('?'|'!') [(rules ['|' '->' ident]) | ('->' ident)]
//   actions     = action {';' action}
//   action      = ['+'] [ident ':'] disjunction ['->' ([ident] '|' ident) | ident]
//   disjunction = conjunction {'|' conjunction}
//   conjunction = call {'&' call}
//   call        = ident '(' [args] ')'
//   args        = ident ('?'|'!') ident {',' ident ('?'|'!') ident}
//   params      = '<' ident {',' ident} '>'

#include "templet/ast.hpp"
#include "templet/lexer.hpp"

#include <span>
#include <string>
#include <vector>

namespace templet {

class SyntaxError : public Error {
public:
    SyntaxError(Position pos, std::vector<std::string> expected, const std::string& found)
        : Error("SyntaxError", describe(expected, found), pos), expected_(std::move(expected))
    {
    }

    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    static std::string describe(const std::vector<std::string>& expected, const std::string& found)
    {
        std::string msg = "expected ";
        if (expected.size() > 1) msg += "one of ";
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) msg += ", ";
            msg += expected[i];
        }
        msg += " but found " + found;
        return msg;
    }

    std::vector<std::string> expected_;
};

namespace detail {

class Parser {
public:
    Parser(std::span<const Token> tokens, Position end) : toks_(tokens), end_(end) {}

    Scheme scheme()
    {
        Scheme s;
        while (!at_end()) {
            if (peek_is("~"))
                s.classes.emplace_back(channel());
            else if (peek_is("*"))
                s.classes.emplace_back(process());
            else
                fail({"'~'", "'*'"});
        }
        return s;
    }

private:
    bool at_end() const { return i_ >= toks_.size(); }
    const Token* peek(std::size_t ahead = 0) const
    {
        return i_ + ahead < toks_.size() ? &toks_[i_ + ahead] : nullptr;
    }
    bool peek_is(std::string_view delim, std::size_t ahead = 0) const
    {
        const Token* t = peek(ahead);
        return t && t->is(delim);
    }
    bool peek_ident(std::size_t ahead = 0) const
    {
        const Token* t = peek(ahead);
        return t && t->kind == TokenKind::Ident;
    }
    Position here() const { return at_end() ? end_ : toks_[i_].pos; }

    [[noreturn]] void fail(std::vector<std::string> expected) const
    {
        std::string found = at_end() ? "end of scheme" : "'" + toks_[i_].text + "'";
        throw SyntaxError(here(), std::move(expected), found);
    }

    bool accept(std::string_view delim)
    {
        if (!peek_is(delim)) return false;
        ++i_;
        return true;
    }
    void expect(std::string_view delim)
    {
        if (!accept(delim)) fail({"'" + std::string(delim) + "'"});
    }
    std::string ident()
    {
        if (!peek_ident()) fail({"identifier"});
        return toks_[i_++].text;
    }

    std::vector<std::string> params()
    {
        std::vector<std::string> out;
        if (!accept("<")) return out;
        out.push_back(ident());
        while (accept(",")) out.push_back(ident());
        expect(">");
        return out;
    }

    Rule rule()
    {
        Rule r;
        r.loc.pos = here();
        r.messages.push_back(ident());
        while (accept(",")) r.messages.push_back(ident());
        expect("->");
        r.target = ident();
        return r;
    }

    ChannelDef channel()
    {
        ChannelDef c;
        c.loc.pos = here();
        expect("~");
        c.name = ident();
        c.params = params();
        if (accept("=")) {
            c.states.push_back(state());
            while (accept(";")) c.states.push_back(state());
        }
        if (!accept(".")) fail(c.states.empty() ? std::vector<std::string>{"'<'", "'='", "'.'"}
                                                : std::vector<std::string>{"';'", "'.'"});
        return c;
    }

    StateDef state()
    {
        StateDef s;
        s.loc.pos = here();
        s.initial = accept("+");
        s.name = ident();
        if (accept("?"))
            s.mark = StateMark::Question;
        else if (accept("!"))
            s.mark = StateMark::Answer;
        if (s.mark != StateMark::Unmarked && peek_ident()) {
            s.rules.push_back(rule());
            while (accept("|")) s.rules.push_back(rule());
        }
        return s;
    }

    ProcessDef process()
    {
        ProcessDef p;
        p.loc.pos = here();
        expect("*");
        p.name = ident();
        p.params = params();
        if (accept("=")) {
            do {
                if (starts_port()) {
                    if (!p.actions.empty()) fail({"action"});
                    p.ports.push_back(port());
                } else {
                    p.actions.push_back(action());
                }
            } while (accept(";"));
        }
        if (!accept(".")) fail(p.ports.empty() && p.actions.empty() ? std::vector<std::string>{"'<'", "'='", "'.'"}
                                                                    : std::vector<std::string>{"';'", "'.'"});
        return p;
    }

    // port: ident ':' ident ('?'|'!'); labelled action: ident ':' ident '('
    bool starts_port() const
    {
        return peek_ident() && peek_is(":", 1) && peek_ident(2) && (peek_is("?", 3) || peek_is("!", 3));
    }

    PortDef port()
    {
        PortDef p;
        p.loc.pos = here();
        p.name = ident();
        expect(":");
        p.channel = ident();
        if (accept("?"))
            p.side = PortSide::Server;
        else if (accept("!"))
            p.side = PortSide::Client;
        else
            fail({"'?'", "'!'"});

        if (accept("->")) {
            p.default_action = ident();
        } else if (peek_ident()) {
            p.rules.push_back(rule());
            while (accept("|")) {
                if (accept("->")) {
                    p.default_action = ident();
                    break;
                }
                p.rules.push_back(rule());
            }
        }
        return p;
    }

    Call call()
    {
        Call c;
        c.loc.pos = here();
        c.name = ident();
        expect("(");
        if (!peek_is(")")) {
            do {
                Arg a;
                a.loc.pos = here();
                a.port = ident();
                if (accept("?"))
                    a.mode = ArgMode::Read;
                else if (accept("!"))
                    a.mode = ArgMode::Write;
                else
                    fail({"'?'", "'!'"});
                a.message = ident();
                c.args.push_back(std::move(a));
            } while (accept(","));
        }
        expect(")");
        return c;
    }

    ActionDef action()
    {
        ActionDef a;
        a.loc.pos = here();
        a.initial = accept("+");
        if (peek_ident() && peek_is(":", 1)) {
            a.label = ident();
            expect(":");
        }
        do {
            Conjunction conj;
            conj.push_back(call());
            while (accept("&")) conj.push_back(call());
            a.body.push_back(std::move(conj));
        } while (accept("|"));

        if (accept("->")) {
            if (accept("|")) {
                a.on_failure = ident();
            } else {
                a.on_success = ident();
                if (accept("|")) a.on_failure = ident();
            }
        }
        return a;
    }

    std::span<const Token> toks_;
    Position end_;
    std::size_t i_ = 0;
};

} // namespace detail

/// Throws SyntaxError on the first error. `end` is reported for errors at end
/// of input.
inline Scheme parse(std::span<const Token> tokens, Position end = {})
{
    return detail::Parser(tokens, end).scheme();
}

inline Scheme parse_scheme(std::string_view text, Position origin = {})
{
    auto tokens = tokenize(text, origin);
    return parse(tokens, advance(origin, text));
}

} // namespace templet
