#pragma once

#include "templet/diagnostics.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace templet {

/// `messages -> target`; `A,B -> S` keeps both messages in one rule.
struct Rule {
    std::vector<std::string> messages;
    std::string target;
    SourceLoc loc;

    friend bool operator==(const Rule&, const Rule&) = default;
};

/// '?' / '!' marker on a channel state.
enum class StateMark { Question, Answer, Unmarked };

struct StateDef {
    std::string name;
    bool initial = false;
    StateMark mark = StateMark::Unmarked;
    std::vector<Rule> rules;
    SourceLoc loc;

    friend bool operator==(const StateDef&, const StateDef&) = default;
};

struct ChannelDef {
    std::string name;
    std::vector<std::string> params;
    std::vector<StateDef> states;
    SourceLoc loc;

    friend bool operator==(const ChannelDef&, const ChannelDef&) = default;
};

/// Server ports are marked '?', client ports '!'.
enum class PortSide { Server, Client };

struct PortDef {
    std::string name;
    std::string channel;
    PortSide side = PortSide::Client;
    std::vector<Rule> rules; // target = action id
    std::optional<std::string> default_action;
    SourceLoc loc;

    friend bool operator==(const PortDef&, const PortDef&) = default;
};

enum class ArgMode { Read, Write };

struct Arg {
    std::string port;
    ArgMode mode = ArgMode::Read;
    std::string message;
    SourceLoc loc;

    friend bool operator==(const Arg&, const Arg&) = default;
};

struct Call {
    std::string name;
    std::vector<Arg> args;
    SourceLoc loc;

    friend bool operator==(const Call&, const Call&) = default;
};

using Conjunction = std::vector<Call>;
using Disjunction = std::vector<Conjunction>;

struct ActionDef {
    bool initial = false;
    std::optional<std::string> label;
    Disjunction body;
    std::optional<std::string> on_success;
    std::optional<std::string> on_failure;
    SourceLoc loc;

    /// Explicit label, else the name of the first call.
    const std::string& id() const { return label ? *label : body.front().front().name; }

    friend bool operator==(const ActionDef&, const ActionDef&) = default;
};

struct ProcessDef {
    std::string name;
    std::vector<std::string> params;
    std::vector<PortDef> ports;
    std::vector<ActionDef> actions;
    SourceLoc loc;

    friend bool operator==(const ProcessDef&, const ProcessDef&) = default;
};

using ClassDef = std::variant<ChannelDef, ProcessDef>;

inline const std::string& class_name(const ClassDef& c)
{
    return std::visit([](const auto& d) -> const std::string& { return d.name; }, c);
}

inline Position class_pos(const ClassDef& c)
{
    return std::visit([](const auto& d) { return d.loc.pos; }, c);
}

struct Scheme {
    std::vector<ClassDef> classes;

    friend bool operator==(const Scheme&, const Scheme&) = default;
};

} // namespace templet
