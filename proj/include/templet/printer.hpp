#pragma once

#include "templet/ast.hpp"

#include <string>

namespace templet {

namespace detail {

inline void print_list(std::string& out, const std::vector<std::string>& items, std::string_view sep)
{
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
}

inline void print_params(std::string& out, const std::vector<std::string>& params)
{
    if (params.empty()) return;
    out += '<';
    print_list(out, params, ", ");
    // "x-" directly before '>' would lex as "x" "->"
    if (params.back().ends_with('-')) out += ' ';
    out += '>';
}

inline void print_rules(std::string& out, const std::vector<Rule>& rules)
{
    for (std::size_t i = 0; i < rules.size(); ++i) {
        if (i) out += " | ";
        print_list(out, rules[i].messages, ", ");
        out += " -> ";
        out += rules[i].target;
    }
}

inline void print_call(std::string& out, const Call& c)
{
    out += c.name;
    out += '(';
    for (std::size_t i = 0; i < c.args.size(); ++i) {
        if (i) out += ", ";
        out += c.args[i].port;
        out += c.args[i].mode == ArgMode::Read ? '?' : '!';
        out += c.args[i].message;
    }
    out += ')';
}

} // namespace detail

inline std::string print_channel(const ChannelDef& c)
{
    std::string out = "~" + c.name;
    detail::print_params(out, c.params);
    for (std::size_t i = 0; i < c.states.size(); ++i) {
        const StateDef& s = c.states[i];
        out += i ? "; " : " = ";
        if (s.initial) out += '+';
        out += s.name;
        if (s.mark != StateMark::Unmarked) out += s.mark == StateMark::Question ? " ?" : " !";
        if (!s.rules.empty()) {
            out += ' ';
            detail::print_rules(out, s.rules);
        }
    }
    out += '.';
    return out;
}

inline std::string print_action(const ActionDef& a)
{
    std::string out;
    if (a.initial) out += '+';
    if (a.label) out += *a.label + ":";
    for (std::size_t d = 0; d < a.body.size(); ++d) {
        if (d) out += " | ";
        for (std::size_t c = 0; c < a.body[d].size(); ++c) {
            if (c) out += " & ";
            detail::print_call(out, a.body[d][c]);
        }
    }
    if (a.on_success || a.on_failure) {
        out += " ->";
        if (a.on_success) out += " " + *a.on_success;
        if (a.on_failure) out += " | " + *a.on_failure;
    }
    return out;
}

inline std::string print_process(const ProcessDef& p)
{
    std::string out = "*" + p.name;
    detail::print_params(out, p.params);
    bool first = true;
    auto sep = [&] {
        out += first ? " = " : "; ";
        first = false;
    };
    for (const PortDef& port : p.ports) {
        sep();
        out += port.name + ":" + port.channel + (port.side == PortSide::Server ? " ?" : " !");
        if (!port.rules.empty()) {
            out += ' ';
            detail::print_rules(out, port.rules);
            if (port.default_action) out += " | -> " + *port.default_action;
        } else if (port.default_action) {
            out += " -> " + *port.default_action;
        }
    }
    for (const ActionDef& a : p.actions) {
        sep();
        out += print_action(a);
    }
    out += '.';
    return out;
}

inline std::string print_class(const ClassDef& c)
{
    return std::visit(
        [](const auto& d) {
            if constexpr (std::is_same_v<std::decay_t<decltype(d)>, ChannelDef>)
                return print_channel(d);
            else
                return print_process(d);
        },
        c);
}

/// Canonical text, one class definition per line.
inline std::string pretty_print(const Scheme& s)
{
    std::string out;
    for (const auto& c : s.classes) {
        out += print_class(c);
        out += '\n';
    }
    return out;
}

} // namespace templet
