#pragma once

// Deterministic simulation of a process/channel network.
//
// A channel is owned alternately by its client and its server; the client
// holds it first. Sending a message validates it against the channel's
// protocol, hands the channel to the other side and puts it on the ready
// queue. The scheduler repeatedly removes a pseudo-randomly chosen ready
// channel and lets the receiving process handle it. Everything runs on the
// calling thread; a given seed always produces the same trace.

#include "templet/semantic.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace templet {

using Value = std::variant<double, std::string, bool>;
using Payload = std::map<std::string, Value>;

enum class Side { Client, Server };

inline std::string_view to_string(Side s) { return s == Side::Client ? "client" : "server"; }
inline Side other(Side s) { return s == Side::Client ? Side::Server : Side::Client; }
inline Side side_of(PortSide p) { return p == PortSide::Client ? Side::Client : Side::Server; }

/// 64-bit LCG (Knuth MMIX constants); draws are the high 32 bits.
class Lcg {
public:
    explicit Lcg(std::uint64_t seed) : state_(seed) {}

    std::uint32_t next()
    {
        state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<std::uint32_t>(state_ >> 32);
    }

private:
    std::uint64_t state_;
};

struct ChannelHandle {
    std::size_t index = 0;
    friend bool operator==(ChannelHandle, ChannelHandle) = default;
};
struct ProcessHandle {
    std::size_t index = 0;
    friend bool operator==(ProcessHandle, ProcessHandle) = default;
};

/// Which process port a channel side is attached to; the port name doubles
/// as the selector used for dispatch.
struct Binding {
    std::size_t process = 0;
    std::string port;
};

struct ChannelInstance {
    std::string name;
    const ResolvedChannel* def = nullptr;
    std::string state;
    Side access = Side::Client;
    bool sending = false;
    std::optional<std::string> pending;
    std::map<std::string, Payload> payloads;
    std::optional<Binding> client;
    std::optional<Binding> server;
};

struct ProcessInstance {
    std::string name;
    const ResolvedProcess* def = nullptr;
    std::map<std::string, std::size_t> port_bindings; // port -> channel index
    Payload vars;
};

enum class EventKind { InitialAction, Deliver, Call, Send, Skip, Halt };

inline std::string_view to_string(EventKind k)
{
    switch (k) {
    case EventKind::InitialAction: return "INITIAL";
    case EventKind::Deliver: return "DELIVER";
    case EventKind::Call: return "CALL";
    case EventKind::Send: return "SEND";
    case EventKind::Skip: return "SKIP";
    case EventKind::Halt: return "HALT";
    }
    return "?";
}

/// One trace entry. Fields not meaningful for `kind` stay empty.
struct Event {
    EventKind kind = EventKind::Halt;
    std::string process;
    std::string channel;
    std::string port;
    std::string message;
    std::string action;
    std::string function;
    std::string side;   // Send: sending side; Deliver: receiving side
    std::string reason; // Skip: access | callback_false; Halt: see HaltReason
    std::string detail;
    std::optional<bool> result;

    friend bool operator==(const Event&, const Event&) = default;
};

namespace halt {
inline constexpr std::string_view queue_empty = "queue_empty";
inline constexpr std::string_view protocol_violation = "protocol_violation";
inline constexpr std::string_view unknown_message = "unknown_message";
inline constexpr std::string_view step_limit = "step_limit";
} // namespace halt

struct Trace {
    std::uint64_t seed = 0;
    std::vector<Event> events;

    const Event& halt() const { return events.back(); }
    std::string_view halt_reason() const { return events.empty() ? std::string_view() : events.back().reason; }

    friend bool operator==(const Trace&, const Trace&) = default;
};

class Engine;

/// Argument views of one user-function invocation. Only messages listed in
/// the call with '?' may be read and only those listed with '!' written.
class CallContext {
public:
    const Payload& read(std::string_view port, std::string_view message) const
    {
        return *find(port, message, ArgMode::Read);
    }
    Payload& write(std::string_view port, std::string_view message)
    {
        return *find(port, message, ArgMode::Write);
    }
    Payload& vars() { return *vars_; }
    const std::string& process() const { return *process_; }
    const RegularAction& action() const { return *action_; }

private:
    friend class Engine;

    struct View {
        std::string port;
        std::string message;
        ArgMode mode;
        Payload* payload;
    };

    Payload* find(std::string_view port, std::string_view message, ArgMode mode) const
    {
        for (const auto& v : views_)
            if (v.port == port && v.message == message && v.mode == mode) return v.payload;
        throw Error("AccessViolation", std::string(mode == ArgMode::Read ? "read of " : "write of ") +
                                           std::string(port) + (mode == ArgMode::Read ? "?" : "!") +
                                           std::string(message) + " is not declared by call '" + action_->call.name +
                                           "'");
    }

    std::vector<View> views_;
    Payload* vars_ = nullptr;
    const std::string* process_ = nullptr;
    const RegularAction* action_ = nullptr;
};

/// What a port procedure sees when its port receives a channel.
struct PortContext {
    const std::string& process;
    const std::string& port;
    const std::string& channel;
    const std::string& message;
    Payload& vars;
};

using ActionCallback = std::function<bool(CallContext&)>;
using PortProcedure = std::function<void(PortContext&)>;

/// Callbacks are looked up by (process instance, action id), then
/// (process instance, function name), then the same two keys registered for
/// the whole process class.
class UserFunctionRegistry {
public:
    void on_action(ProcessHandle p, std::string action_id, ActionCallback cb)
    {
        by_instance_[{p.index, std::move(action_id)}] = std::move(cb);
    }
    void on_function(ProcessHandle p, std::string function, ActionCallback cb)
    {
        fn_by_instance_[{p.index, std::move(function)}] = std::move(cb);
    }
    void on_class_action(std::string process_class, std::string action_id, ActionCallback cb)
    {
        by_class_[{std::move(process_class), std::move(action_id)}] = std::move(cb);
    }
    void on_class_function(std::string process_class, std::string function, ActionCallback cb)
    {
        fn_by_class_[{std::move(process_class), std::move(function)}] = std::move(cb);
    }
    void on_port(ProcessHandle p, std::string port, PortProcedure proc)
    {
        ports_[{p.index, std::move(port)}] = std::move(proc);
    }

    const ActionCallback* find(std::size_t process, const std::string& process_class, const RegularAction& a) const
    {
        if (auto it = by_instance_.find({process, a.id}); it != by_instance_.end()) return &it->second;
        if (auto it = fn_by_instance_.find({process, a.call.name}); it != fn_by_instance_.end()) return &it->second;
        if (auto it = by_class_.find({process_class, a.id}); it != by_class_.end()) return &it->second;
        if (auto it = fn_by_class_.find({process_class, a.call.name}); it != fn_by_class_.end()) return &it->second;
        return nullptr;
    }
    const PortProcedure* find_port(std::size_t process, const std::string& port) const
    {
        auto it = ports_.find({process, port});
        return it == ports_.end() ? nullptr : &it->second;
    }

private:
    std::map<std::pair<std::size_t, std::string>, ActionCallback> by_instance_, fn_by_instance_;
    std::map<std::pair<std::string, std::string>, ActionCallback> by_class_, fn_by_class_;
    std::map<std::pair<std::size_t, std::string>, PortProcedure> ports_;
};

struct EngineOptions {
    std::size_t max_deliveries = 1'000'000;
    std::size_t max_chain_steps = 100'000;
};

class Engine {
public:
    explicit Engine(ResolvedScheme scheme, EngineOptions options = {})
        : scheme_(std::move(scheme)), options_(options)
    {
    }

    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;
    Engine(Engine&&) = default;
    Engine& operator=(Engine&&) = default;

    const ResolvedScheme& scheme() const { return scheme_; }
    UserFunctionRegistry& callbacks() { return registry_; }

    ChannelHandle add_channel(std::string_view channel_class, std::string instance)
    {
        const ResolvedChannel* def = scheme_.find_channel(channel_class);
        if (!def) throw Error("UnknownClass", "no channel class '" + std::string(channel_class) + "'");
        ChannelInstance c;
        c.name = std::move(instance);
        c.def = def;
        c.state = def->initial_state;
        channels_.push_back(std::move(c));
        return {channels_.size() - 1};
    }

    ProcessHandle add_process(std::string_view process_class, std::string instance)
    {
        const ResolvedProcess* def = scheme_.find_process(process_class);
        if (!def) throw Error("UnknownClass", "no process class '" + std::string(process_class) + "'");
        ProcessInstance p;
        p.name = std::move(instance);
        p.def = def;
        processes_.push_back(std::move(p));
        return {processes_.size() - 1};
    }

    /// Throws Error with code UnknownPort, TypeMismatch, SideMismatch or AlreadyBound.
    void bind_client(ChannelHandle c, ProcessHandle p, std::string_view port) { bind(c, p, port, Side::Client); }
    void bind_server(ChannelHandle c, ProcessHandle p, std::string_view port) { bind(c, p, port, Side::Server); }

    const ChannelInstance& channel(ChannelHandle h) const { return channels_.at(h.index); }
    const ProcessInstance& process(ProcessHandle h) const { return processes_.at(h.index); }
    ProcessInstance& process(ProcessHandle h) { return processes_.at(h.index); }
    Payload& payload(ChannelHandle h, const std::string& message) { return channels_.at(h.index).payloads[message]; }
    const std::vector<ChannelInstance>& channels() const { return channels_; }
    const std::vector<ProcessInstance>& processes() const { return processes_; }

    /// Execute the network once. Throws Error("UnboundChannel"),
    /// Error("MissingCallback") or Error("EngineAlreadyRun") before any
    /// event is produced; protocol failures end the trace with a Halt event.
    Trace run(std::uint64_t seed)
    {
        if (ran_) throw Error("EngineAlreadyRun", "an engine runs its network only once");
        preflight();
        ran_ = true;
        trace_ = Trace{seed, {}};
        halted_ = false;
        Lcg rng(seed);

        for (std::size_t p = 0; p < processes_.size() && !halted_; ++p) {
            for (const auto& id : processes_[p].def->initial_actions) {
                Event e;
                e.kind = EventKind::InitialAction;
                e.process = processes_[p].name;
                e.action = id;
                trace_.events.push_back(std::move(e));
                evaluate_chain(p, id);
                if (halted_) break;
            }
        }

        std::size_t deliveries = 0;
        while (!halted_ && !ready_.empty()) {
            if (deliveries++ == options_.max_deliveries) {
                stop(halt::step_limit, "delivery limit reached");
                break;
            }
            std::size_t n = rng.next() % ready_.size();
            std::size_t c = ready_[n];
            ready_.erase(ready_.begin() + static_cast<std::ptrdiff_t>(n));
            channels_[c].sending = false;
            dispatch(c);
        }
        if (!halted_) stop(halt::queue_empty, "");
        return trace_;
    }

private:
    void bind(ChannelHandle ch, ProcessHandle ph, std::string_view port_name, Side side)
    {
        ChannelInstance& c = channels_.at(ch.index);
        ProcessInstance& p = processes_.at(ph.index);
        const ResolvedPort* port = p.def->find_port(port_name);
        if (!port)
            throw Error("UnknownPort", "process '" + p.name + "' has no port '" + std::string(port_name) + "'");
        if (port->def.channel != c.def->name)
            throw Error("TypeMismatch", "port '" + p.name + "." + port->name() + "' expects channel type '" +
                                            port->def.channel + "', got '" + c.def->name + "'");
        if (side_of(port->side()) != side)
            throw Error("SideMismatch", "port '" + p.name + "." + port->name() + "' is a " +
                                            std::string(to_string(side_of(port->side()))) + " port");
        auto& slot = side == Side::Client ? c.client : c.server;
        if (slot)
            throw Error("AlreadyBound",
                        "the " + std::string(to_string(side)) + " side of channel '" + c.name + "' is already bound");
        slot = Binding{ph.index, port->name()};
        p.port_bindings[port->name()] = ch.index;
    }

    void preflight() const
    {
        for (const auto& c : channels_)
            if (!c.client || !c.server)
                throw Error("UnboundChannel", "channel '" + c.name + "' has no " + (c.client ? "server" : "client"));
        for (std::size_t p = 0; p < processes_.size(); ++p) {
            const ProcessInstance& pi = processes_[p];
            for (const auto& id : reachable_actions(*pi.def)) {
                const RegularAction* a = pi.def->find_action(id);
                if (a && !registry_.find(p, pi.def->name, *a))
                    throw Error("MissingCallback", "no callback for action '" + id + "' of process '" + pi.name + "'");
            }
        }
    }

    void stop(std::string_view reason, std::string detail)
    {
        Event e;
        e.kind = EventKind::Halt;
        e.reason = std::string(reason);
        e.detail = std::move(detail);
        trace_.events.push_back(std::move(e));
        halted_ = true;
    }

    void dispatch(std::size_t c)
    {
        ChannelInstance& ch = channels_[c];
        const Binding& b = ch.access == Side::Client ? *ch.client : *ch.server;
        ProcessInstance& p = processes_[b.process];
        const std::string message = ch.pending.value_or("");

        Event e;
        e.kind = EventKind::Deliver;
        e.channel = ch.name;
        e.process = p.name;
        e.port = b.port;
        e.message = message;
        e.side = std::string(to_string(ch.access));
        trace_.events.push_back(std::move(e));

        if (const PortProcedure* proc = registry_.find_port(b.process, b.port)) {
            PortContext ctx{p.name, b.port, ch.name, message, p.vars};
            (*proc)(ctx);
        }
        p.port_bindings[b.port] = c;

        const ResolvedPort* port = p.def->find_port(b.port);
        std::optional<std::string> entry;
        for (const auto& [m, action] : port->dispatch)
            if (m == message) {
                entry = action;
                break;
            }
        if (!entry) entry = port->def.default_action;
        if (!entry) {
            stop(halt::unknown_message,
                 "port '" + p.name + "." + b.port + "' has no rule for message '" + message + "'");
            return;
        }
        evaluate_chain(b.process, *entry);
    }

    bool activated(const ProcessInstance& p, const RegularAction& a) const
    {
        for (const auto& arg : a.call.args) {
            const ResolvedPort* port = p.def->find_port(arg.port);
            auto bound = p.port_bindings.find(arg.port);
            if (!port || bound == p.port_bindings.end()) return false;
            const ChannelInstance& ch = channels_[bound->second];
            // in flight: not readable before its delivery
            if (ch.sending || ch.access != side_of(port->side())) return false;
            if (arg.mode == ArgMode::Read && ch.pending != arg.message) return false;
        }
        return true;
    }

    void evaluate_chain(std::size_t p, const std::string& first)
    {
        std::optional<std::string> current = first;
        std::size_t steps = 0;
        while (current && !halted_) {
            if (steps++ == options_.max_chain_steps) {
                stop(halt::step_limit, "action chain limit reached in process '" + processes_[p].name + "'");
                return;
            }
            ProcessInstance& proc = processes_[p];
            const RegularAction& a = *proc.def->find_action(*current);
            if (!activated(proc, a)) {
                Event e;
                e.kind = EventKind::Skip;
                e.process = proc.name;
                e.action = a.id;
                e.function = a.call.name;
                e.reason = "access";
                trace_.events.push_back(std::move(e));
                current = a.on_failure;
                continue;
            }

            CallContext ctx;
            ctx.vars_ = &proc.vars;
            ctx.process_ = &proc.name;
            ctx.action_ = &a;
            for (const auto& arg : a.call.args) {
                std::size_t c = proc.port_bindings.at(arg.port);
                ctx.views_.push_back({arg.port, arg.message, arg.mode, &channels_[c].payloads[arg.message]});
            }
            const ActionCallback* cb = registry_.find(p, proc.def->name, a);
            if (!cb) throw Error("MissingCallback", "no callback for action '" + a.id + "' of process '" + proc.name + "'");
            bool ok = (*cb)(ctx);

            Event call;
            call.kind = EventKind::Call;
            call.process = proc.name;
            call.action = a.id;
            call.function = a.call.name;
            call.result = ok;
            trace_.events.push_back(std::move(call));

            if (!ok) {
                Event e;
                e.kind = EventKind::Skip;
                e.process = proc.name;
                e.action = a.id;
                e.function = a.call.name;
                e.reason = "callback_false";
                trace_.events.push_back(std::move(e));
                current = a.on_failure;
                continue;
            }
            for (const auto& arg : a.call.args) {
                if (arg.mode != ArgMode::Read) continue;
                ChannelInstance& ch = channels_[proc.port_bindings.at(arg.port)];
                if (ch.pending == arg.message) ch.pending.reset();
            }
            for (const auto& arg : a.call.args) {
                if (arg.mode != ArgMode::Write) continue;
                const ResolvedPort* port = proc.def->find_port(arg.port);
                send(proc.port_bindings.at(arg.port), arg.message, side_of(port->side()));
                if (halted_) return;
            }
            current = a.on_success;
        }
    }

    void send(std::size_t c, const std::string& message, Side from)
    {
        ChannelInstance& ch = channels_[c];
        auto violation = [&](const std::string& why) {
            stop(halt::protocol_violation, "channel '" + ch.name + "': " + why);
        };
        if (ch.access != from) {
            violation("the " + std::string(to_string(from)) + " sent '" + message + "' without holding access");
            return;
        }
        const ResolvedState* st = ch.def->find_state(ch.state);
        std::optional<std::string> target = ch.def->transition(ch.state, message);
        if (!st || !target) {
            violation("message '" + message + "' is not allowed in state '" + ch.state + "'");
            return;
        }
        const Side owner = st->kind == StateKind::Answer ? Side::Server : Side::Client;
        if (owner != from) {
            violation("state '" + ch.state + "' expects the " + std::string(to_string(owner)) + " to send, not the " +
                      std::string(to_string(from)));
            return;
        }

        Event e;
        e.kind = EventKind::Send;
        e.channel = ch.name;
        e.message = message;
        e.side = std::string(to_string(from));
        trace_.events.push_back(std::move(e));

        ch.state = *target;
        ch.pending = message;
        ch.access = other(from);
        ch.sending = true;
        ready_.push_back(c);
    }

    ResolvedScheme scheme_;
    EngineOptions options_;
    UserFunctionRegistry registry_;
    std::vector<ChannelInstance> channels_;
    std::vector<ProcessInstance> processes_;
    std::vector<std::size_t> ready_;
    Trace trace_;
    bool halted_ = false;
    bool ran_ = false;
};

} // namespace templet
