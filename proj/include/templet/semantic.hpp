#pragma once

// Contextual validation of a parsed scheme.
//
// resolve() applies every naming, visibility and direction rule, completes
// channel state lists with implicit states, and desugars process actions to
// regular single-call form. All violations are collected; nothing throws.

#include "templet/ast.hpp"
#include "templet/diagnostics.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace templet {

/// Direction of a message: questions travel client -> server, answers
/// server -> client.
enum class Direction { Question, Answer };

/// Resolved state kind. ClientDefault is an unmarked (or implicit) state:
/// the client holds access and no transitions leave it.
enum class StateKind { Question, Answer, ClientDefault };

inline std::string_view to_string(Direction d) { return d == Direction::Question ? "question" : "answer"; }

struct ResolvedState {
    std::string name;
    bool initial = false;
    StateKind kind = StateKind::ClientDefault;
    bool implicit = false;
    std::vector<Rule> rules;
    Position pos;
};

struct MessageInfo {
    Direction direction = Direction::Question;
    std::set<std::string> sources;
};

struct ResolvedChannel {
    std::string name;
    std::vector<std::string> params;
    std::vector<ResolvedState> states;
    std::string initial_state; // empty only for a bodyless channel
    std::map<std::string, MessageInfo> messages;
    Position pos;

    const ResolvedState* find_state(std::string_view s) const
    {
        for (const auto& st : states)
            if (st.name == s) return &st;
        return nullptr;
    }

    /// Target of `message` leaving `state`, if the protocol allows it.
    std::optional<std::string> transition(std::string_view state, std::string_view message) const
    {
        const ResolvedState* st = find_state(state);
        if (!st) return std::nullopt;
        for (const auto& r : st->rules)
            if (std::find(r.messages.begin(), r.messages.end(), message) != r.messages.end()) return r.target;
        return std::nullopt;
    }

    std::optional<Direction> direction_of(std::string_view message) const
    {
        auto it = messages.find(std::string(message));
        if (it == messages.end()) return std::nullopt;
        return it->second.direction;
    }
};

/// Regular form `call -> on_success | on_failure`.
struct RegularAction {
    std::string id;
    Call call;
    std::optional<std::string> on_success;
    std::optional<std::string> on_failure;
    bool initial = false;
    bool synthesized = false;
    Position pos;

    friend bool operator==(const RegularAction& a, const RegularAction& b)
    {
        return a.id == b.id && a.call == b.call && a.on_success == b.on_success && a.on_failure == b.on_failure &&
               a.initial == b.initial && a.synthesized == b.synthesized;
    }
};

struct ResolvedPort {
    PortDef def;
    /// message -> action id, in declaration order (`A,B -> x` yields two entries)
    std::vector<std::pair<std::string, std::string>> dispatch;

    const std::string& name() const { return def.name; }
    PortSide side() const { return def.side; }
};

struct ResolvedProcess {
    std::string name;
    std::vector<std::string> params;
    std::vector<ResolvedPort> ports;
    std::vector<RegularAction> regular_actions;
    std::vector<std::string> initial_actions;
    Position pos;

    const ResolvedPort* find_port(std::string_view n) const
    {
        for (const auto& p : ports)
            if (p.name() == n) return &p;
        return nullptr;
    }
    const RegularAction* find_action(std::string_view id) const
    {
        for (const auto& a : regular_actions)
            if (a.id == id) return &a;
        return nullptr;
    }
};

using ResolvedClass = std::variant<ResolvedChannel, ResolvedProcess>;

struct ResolvedScheme {
    Scheme source;
    std::vector<ResolvedClass> classes;

    const ResolvedChannel* find_channel(std::string_view n) const
    {
        for (const auto& c : classes)
            if (auto ch = std::get_if<ResolvedChannel>(&c); ch && ch->name == n) return ch;
        return nullptr;
    }
    const ResolvedProcess* find_process(std::string_view n) const
    {
        for (const auto& c : classes)
            if (auto p = std::get_if<ResolvedProcess>(&c); p && p->name == n) return p;
        return nullptr;
    }
};

/// Direction a port receives: server ports get questions, client ports answers.
inline Direction received_direction(PortSide side)
{
    return side == PortSide::Server ? Direction::Question : Direction::Answer;
}

/// Direction a port may read (`?`) or write (`!`) through a call argument.
inline Direction arg_direction(PortSide side, ArgMode mode)
{
    Direction recv = received_direction(side);
    if (mode == ArgMode::Read) return recv;
    return recv == Direction::Question ? Direction::Answer : Direction::Question;
}

/// Expand one action into regular form. `A & B -> C|D` becomes
/// `A -> B|D; B -> C|D` and `A | B -> C|D` becomes `A -> C|B; B -> C|D`,
/// applied left to right. The first call takes the action id; later calls
/// get `<id>#1`, `<id>#2`, ... which no user identifier can reference.
inline std::vector<RegularAction> desugar(const ActionDef& action)
{
    const std::string& base = action.id();
    std::vector<RegularAction> out;
    std::size_t total = 0;
    for (const auto& conj : action.body) total += conj.size();
    out.reserve(total);

    auto id_of = [&](std::size_t k) { return k == 0 ? base : base + "#" + std::to_string(k); };

    std::size_t k = 0;
    for (std::size_t d = 0; d < action.body.size(); ++d) {
        const Conjunction& conj = action.body[d];
        const bool last_disjunct = d + 1 == action.body.size();
        std::optional<std::string> fail_target =
            last_disjunct ? action.on_failure : std::optional<std::string>(id_of(k + conj.size()));
        for (std::size_t c = 0; c < conj.size(); ++c, ++k) {
            RegularAction r;
            r.id = id_of(k);
            r.call = conj[c];
            r.on_success = c + 1 < conj.size() ? std::optional<std::string>(id_of(k + 1)) : action.on_success;
            r.on_failure = fail_target;
            r.initial = action.initial && k == 0;
            r.synthesized = k != 0;
            r.pos = conj[c].loc.pos;
            out.push_back(std::move(r));
        }
    }
    return out;
}

inline std::vector<RegularAction> desugar(const ProcessDef& p)
{
    std::vector<RegularAction> out;
    for (const auto& a : p.actions) {
        auto part = desugar(a);
        out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return out;
}

namespace detail {

class Resolver {
public:
    Diagnostics diags;

    ResolvedScheme run(const Scheme& s)
    {
        ResolvedScheme out;
        out.source = s;
        std::map<std::string, std::size_t> index; // class name -> position in scheme
        for (std::size_t i = 0; i < s.classes.size(); ++i) {
            const std::string& name = class_name(s.classes[i]);
            check_ident(name, class_pos(s.classes[i]));
            if (!index.emplace(name, i).second)
                error("DuplicateClass", "class '" + name + "' is already defined", class_pos(s.classes[i]));
        }
        for (std::size_t i = 0; i < s.classes.size(); ++i) {
            if (auto c = std::get_if<ChannelDef>(&s.classes[i]))
                out.classes.emplace_back(channel(*c));
            else
                out.classes.emplace_back(process(std::get<ProcessDef>(s.classes[i]), s, out, index, i));
        }
        return out;
    }

private:
    void error(std::string code, std::string msg, Position pos)
    {
        diags.push_back({Severity::Error, std::move(code), std::move(msg), pos});
    }
    void warning(std::string code, std::string msg, Position pos)
    {
        diags.push_back({Severity::Warning, std::move(code), std::move(msg), pos});
    }

    // '$' separates user-block key segments, so identifiers cannot carry it.
    void check_ident(const std::string& id, Position pos)
    {
        if (id.find('$') != std::string::npos)
            error("BadIdentifier", "identifier '" + id + "' contains '$'", pos);
    }

    ResolvedChannel channel(const ChannelDef& c)
    {
        ResolvedChannel r;
        r.name = c.name;
        r.params = c.params;
        r.pos = c.loc.pos;

        std::set<std::string> names;
        std::vector<const StateDef*> initials;
        for (const auto& s : c.states) {
            check_ident(s.name, s.loc.pos);
            if (!names.insert(s.name).second) {
                error("DuplicateState", "state '" + s.name + "' is already defined in channel '" + c.name + "'",
                      s.loc.pos);
                continue;
            }
            if (s.initial) initials.push_back(&s);
            ResolvedState rs;
            rs.name = s.name;
            rs.initial = s.initial;
            rs.kind = s.mark == StateMark::Question ? StateKind::Question
                      : s.mark == StateMark::Answer ? StateKind::Answer
                                                    : StateKind::ClientDefault;
            rs.rules = s.rules;
            rs.pos = s.loc.pos;
            r.states.push_back(std::move(rs));
        }
        if (!c.states.empty()) {
            if (initials.empty())
                error("NoInitialState", "channel '" + c.name + "' has no initial ('+') state", c.loc.pos);
            else if (initials.size() > 1)
                error("MultipleInitialStates", "channel '" + c.name + "' has more than one initial state",
                      initials[1]->loc.pos);
            if (!initials.empty()) r.initial_state = initials.front()->name;
        }

        std::vector<ResolvedState> implicit_states;
        for (const ResolvedState& st : r.states) {
            const Direction dir = st.kind == StateKind::Answer ? Direction::Answer : Direction::Question;
            std::set<std::string> seen;
            for (const auto& rule : st.rules) {
                for (const auto& m : rule.messages) {
                    check_ident(m, rule.loc.pos);
                    if (!seen.insert(m).second)
                        error("DuplicateTransition",
                              "message '" + m + "' has two transitions from state '" + st.name + "'", rule.loc.pos);
                    auto [it, fresh] = r.messages.try_emplace(m, MessageInfo{dir, {}});
                    if (!fresh && it->second.direction != dir)
                        error("MessageDirectionConflict",
                              "message '" + m + "' is used both as a question and as an answer in channel '" +
                                  c.name + "'",
                              rule.loc.pos);
                    it->second.sources.insert(st.name);
                }
                if (names.insert(rule.target).second) {
                    check_ident(rule.target, rule.loc.pos);
                    ResolvedState implicit;
                    implicit.name = rule.target;
                    implicit.implicit = true;
                    implicit.pos = rule.loc.pos;
                    implicit_states.push_back(std::move(implicit));
                }
            }
        }
        r.states.insert(r.states.end(), std::make_move_iterator(implicit_states.begin()),
                        std::make_move_iterator(implicit_states.end()));
        return r;
    }

    ResolvedProcess process(const ProcessDef& p, const Scheme& s, const ResolvedScheme& so_far,
                            const std::map<std::string, std::size_t>& index, std::size_t self)
    {
        ResolvedProcess r;
        r.name = p.name;
        r.params = p.params;
        r.pos = p.loc.pos;

        std::set<std::string> action_ids;
        for (const auto& a : p.actions) {
            if (a.label) check_ident(*a.label, a.loc.pos);
            for (const auto& conj : a.body)
                for (const auto& call : conj) check_ident(call.name, call.loc.pos);
            if (!action_ids.insert(a.id()).second)
                error("DuplicateActionId", "action id '" + a.id() + "' is already used in process '" + p.name + "'",
                      a.loc.pos);
        }

        std::map<std::string, const ResolvedChannel*> port_channels;
        std::set<std::string> port_names;
        for (const auto& port : p.ports) {
            check_ident(port.name, port.loc.pos);
            if (!port_names.insert(port.name).second) {
                error("DuplicatePort", "port '" + port.name + "' is already defined in process '" + p.name + "'",
                      port.loc.pos);
                continue;
            }
            if (action_ids.count(port.name))
                error("NameClash", "port '" + port.name + "' has the same name as an action", port.loc.pos);

            const ResolvedChannel* ch = lookup_channel(port, s, so_far, index, self);
            port_channels[port.name] = ch;

            ResolvedPort rp{port, {}};
            std::set<std::string> listed;
            for (const auto& rule : port.rules) {
                if (!action_ids.count(rule.target))
                    error("UndefinedAction", "port rule targets unknown action '" + rule.target + "'", rule.loc.pos);
                for (const auto& m : rule.messages) {
                    if (!listed.insert(m).second)
                        error("DuplicateTransition", "message '" + m + "' is dispatched twice on port '" + port.name + "'",
                              rule.loc.pos);
                    rp.dispatch.emplace_back(m, rule.target);
                    if (!ch) continue;
                    auto dir = ch->direction_of(m);
                    if (!dir)
                        error("UnknownMessage", "channel '" + ch->name + "' has no message '" + m + "'", rule.loc.pos);
                    else if (*dir != received_direction(port.side))
                        error("DirectionMismatch",
                              std::string(port.side == PortSide::Server ? "server" : "client") + " port '" +
                                  port.name + "' cannot receive " + std::string(to_string(*dir)) + "-message '" + m +
                                  "'",
                              rule.loc.pos);
                }
            }
            if (port.default_action && !action_ids.count(*port.default_action))
                error("UndefinedAction", "port default targets unknown action '" + *port.default_action + "'",
                      port.loc.pos);
            r.ports.push_back(std::move(rp));
        }

        for (const auto& a : p.actions) {
            for (const auto* target : {&a.on_success, &a.on_failure})
                if (*target && !action_ids.count(**target))
                    error("UndefinedAction", "transition to unknown action '" + **target + "'", a.loc.pos);
            for (const auto& conj : a.body)
                for (const auto& call : conj) check_call(call, r, port_channels);
        }

        r.regular_actions = desugar(p);
        for (const auto& a : r.regular_actions)
            if (a.initial) r.initial_actions.push_back(a.id);
        return r;
    }

    const ResolvedChannel* lookup_channel(const PortDef& port, const Scheme& s, const ResolvedScheme& so_far,
                                          const std::map<std::string, std::size_t>& index, std::size_t self)
    {
        auto it = index.find(port.channel);
        if (it == index.end()) {
            error("UndefinedChannel", "channel '" + port.channel + "' is not defined", port.loc.pos);
            return nullptr;
        }
        if (!std::holds_alternative<ChannelDef>(s.classes[it->second])) {
            error("NotAChannel", "'" + port.channel + "' is a process, not a channel", port.loc.pos);
            return nullptr;
        }
        if (it->second > self) {
            error("ForwardReference", "channel '" + port.channel + "' is used before its definition", port.loc.pos);
            return nullptr;
        }
        return so_far.find_channel(port.channel);
    }

    void check_call(const Call& call, const ResolvedProcess& r,
                    const std::map<std::string, const ResolvedChannel*>& port_channels)
    {
        for (const auto& arg : call.args) {
            const ResolvedPort* port = r.find_port(arg.port);
            if (!port) {
                error("UndefinedPort", "call '" + call.name + "' uses unknown port '" + arg.port + "'", arg.loc.pos);
                continue;
            }
            const ResolvedChannel* ch = port_channels.at(arg.port);
            if (!ch) continue;
            auto dir = ch->direction_of(arg.message);
            if (!dir) {
                error("UnknownMessage", "channel '" + ch->name + "' has no message '" + arg.message + "'", arg.loc.pos);
                continue;
            }
            if (*dir != arg_direction(port->side(), arg.mode))
                error("ModeMismatch",
                      std::string(arg.mode == ArgMode::Read ? "cannot read " : "cannot write ") +
                          std::string(to_string(*dir)) + "-message '" + arg.message + "' on " +
                          (port->side() == PortSide::Server ? "server" : "client") + " port '" + arg.port + "'",
                      arg.loc.pos);
        }
    }
};

} // namespace detail

struct Resolution {
    ResolvedScheme scheme;
    Diagnostics diagnostics;
};

inline Resolution resolve(const Scheme& s)
{
    detail::Resolver r;
    auto scheme = r.run(s);
    return {std::move(scheme), std::move(r.diags)};
}

/// Warning for every state not reachable from the initial state.
inline Diagnostics check_reachability(const ResolvedChannel& c)
{
    Diagnostics out;
    if (c.initial_state.empty()) return out;
    std::set<std::string> inbound;
    for (const auto& st : c.states)
        for (const auto& r : st.rules) inbound.insert(r.target);

    std::set<std::string> seen{c.initial_state};
    std::deque<std::string> work{c.initial_state};
    while (!work.empty()) {
        const ResolvedState* st = c.find_state(work.front());
        work.pop_front();
        if (!st) continue;
        for (const auto& r : st->rules)
            if (seen.insert(r.target).second) work.push_back(r.target);
    }
    for (const auto& st : c.states) {
        if (seen.count(st.name)) continue;
        std::string why = inbound.count(st.name) ? "no path from initial state '" + c.initial_state + "'"
                                                 : "no transition leads to it";
        out.push_back({Severity::Warning, "UnreachableState",
                       "state '" + st.name + "' of channel '" + c.name + "' is unreachable: " + why, st.pos});
    }
    return out;
}

/// Ids of regular actions that an initial action or a port dispatch can reach
/// through success/failure transitions.
inline std::set<std::string> reachable_actions(const ResolvedProcess& p)
{
    std::set<std::string> seen;
    std::deque<std::string> work;
    auto visit = [&](const std::string& id) {
        if (seen.insert(id).second) work.push_back(id);
    };
    for (const auto& id : p.initial_actions) visit(id);
    for (const auto& port : p.ports) {
        for (const auto& [m, action] : port.dispatch) visit(action);
        if (port.def.default_action) visit(*port.def.default_action);
    }
    while (!work.empty()) {
        const RegularAction* a = p.find_action(work.front());
        work.pop_front();
        if (!a) continue;
        if (a->on_success) visit(*a->on_success);
        if (a->on_failure) visit(*a->on_failure);
    }
    return seen;
}

inline Diagnostics check_action_reachability(const ResolvedProcess& p)
{
    Diagnostics out;
    auto seen = reachable_actions(p);
    for (const auto& a : p.regular_actions)
        if (!seen.count(a.id))
            out.push_back({Severity::Warning, "UnreachableAction",
                           "action '" + a.id + "' of process '" + p.name + "' can never run", a.pos});
    return out;
}

/// resolve() followed by both reachability passes when resolution is clean.
inline Resolution analyze(const Scheme& s)
{
    Resolution res = resolve(s);
    if (has_errors(res.diagnostics)) return res;
    for (const auto& c : res.scheme.classes) {
        Diagnostics more = std::holds_alternative<ResolvedChannel>(c)
                               ? check_reachability(std::get<ResolvedChannel>(c))
                               : check_action_reachability(std::get<ResolvedProcess>(c));
        res.diagnostics.insert(res.diagnostics.end(), more.begin(), more.end());
    }
    return res;
}

} // namespace templet
