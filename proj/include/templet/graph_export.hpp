#pragma once

// Graphviz DOT for channel protocols and process structure.
//
// Shapes: doublecircle = initial state / initial action, box = server state
// or server port, ellipse = client state, client port or call. Control flow
// edges are solid for success and dashed for failure; port dispatch edges are
// bold; data flow edges are dotted and labelled `message?` / `message!`.

#include "templet/semantic.hpp"

#include <string>

namespace templet {

enum class GraphKind { ChannelGraph, ProcessGraph };

struct GraphDoc {
    GraphKind kind = GraphKind::ChannelGraph;
    std::string dot;
};

namespace detail {

inline std::string dot_quote(std::string_view s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

inline void dot_edge(std::string& out, std::string_view from, std::string_view to, std::string_view label,
                     std::string_view style)
{
    out += "  " + dot_quote(from) + " -> " + dot_quote(to) + " [label=" + dot_quote(label);
    if (!style.empty()) {
        out += ", style=";
        out += style;
    }
    out += "];\n";
}

} // namespace detail

inline GraphDoc channel_graph(const ResolvedChannel& c)
{
    std::string out = "digraph " + detail::dot_quote(c.name) + " {\n";
    for (const auto& st : c.states) {
        std::string_view shape = st.initial                    ? "doublecircle"
                                 : st.kind == StateKind::Answer ? "box"
                                                                : "ellipse";
        out += "  " + detail::dot_quote(st.name) + " [shape=" + std::string(shape) + "];\n";
    }
    for (const auto& st : c.states)
        for (const auto& r : st.rules)
            for (const auto& m : r.messages) detail::dot_edge(out, st.name, r.target, m, "");
    out += "}\n";
    return {GraphKind::ChannelGraph, std::move(out)};
}

inline GraphDoc process_graph(const ResolvedProcess& p)
{
    auto port_id = [](const std::string& n) { return "port:" + n; };
    auto action_id = [](const std::string& n) { return "action:" + n; };

    std::string out = "digraph " + detail::dot_quote(p.name) + " {\n";
    for (const auto& port : p.ports)
        out += "  " + detail::dot_quote(port_id(port.name())) +
               " [label=" + detail::dot_quote(port.name() + ":" + port.def.channel) +
               ", shape=" + (port.side() == PortSide::Server ? "box" : "ellipse") + "];\n";
    for (const auto& a : p.regular_actions) {
        std::string label = a.id == a.call.name ? a.id + "()" : a.id + ": " + a.call.name + "()";
        out += "  " + detail::dot_quote(action_id(a.id)) + " [label=" + detail::dot_quote(label) +
               ", shape=" + (a.initial ? "doublecircle" : "ellipse") + "];\n";
    }
    for (const auto& a : p.regular_actions)
        for (const auto& arg : a.call.args) {
            if (arg.mode == ArgMode::Read)
                detail::dot_edge(out, port_id(arg.port), action_id(a.id), arg.message + "?", "dotted");
            else
                detail::dot_edge(out, action_id(a.id), port_id(arg.port), arg.message + "!", "dotted");
        }
    for (const auto& port : p.ports) {
        for (const auto& [m, action] : port.dispatch) detail::dot_edge(out, port_id(port.name()), action_id(action), m, "bold");
        if (port.def.default_action)
            detail::dot_edge(out, port_id(port.name()), action_id(*port.def.default_action), "->", "bold");
    }
    for (const auto& a : p.regular_actions) {
        if (a.on_success) detail::dot_edge(out, action_id(a.id), action_id(*a.on_success), "", "solid");
        if (a.on_failure) detail::dot_edge(out, action_id(a.id), action_id(*a.on_failure), "", "dashed");
    }
    out += "}\n";
    return {GraphKind::ProcessGraph, std::move(out)};
}

} // namespace templet
