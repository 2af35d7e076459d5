#pragma once

#include "templet/runtime.hpp"

#include <nlohmann/json.hpp>

#include <sstream>
#include <string>

namespace templet {

namespace detail {

inline void kv(std::string& out, std::string_view key, std::string_view value)
{
    out += ' ';
    out += key;
    out += '=';
    bool quote = value.empty() || value.find_first_of(" \t\n\"=\\") != std::string_view::npos;
    if (!quote) {
        out += value;
        return;
    }
    out += '"';
    for (char c : value) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    out += '"';
}

} // namespace detail

/// One `EVENT key=value ...` line per event, keys in a fixed order.
inline std::string to_text(const Trace& t)
{
    std::string out;
    for (const Event& e : t.events) {
        out += to_string(e.kind);
        switch (e.kind) {
        case EventKind::InitialAction:
            detail::kv(out, "process", e.process);
            detail::kv(out, "action", e.action);
            break;
        case EventKind::Deliver:
            detail::kv(out, "channel", e.channel);
            detail::kv(out, "process", e.process);
            detail::kv(out, "port", e.port);
            detail::kv(out, "message", e.message);
            detail::kv(out, "side", e.side);
            break;
        case EventKind::Call:
            detail::kv(out, "process", e.process);
            detail::kv(out, "action", e.action);
            detail::kv(out, "function", e.function);
            detail::kv(out, "result", e.result.value_or(false) ? "true" : "false");
            break;
        case EventKind::Send:
            detail::kv(out, "channel", e.channel);
            detail::kv(out, "message", e.message);
            detail::kv(out, "from", e.side);
            break;
        case EventKind::Skip:
            detail::kv(out, "process", e.process);
            detail::kv(out, "action", e.action);
            detail::kv(out, "reason", e.reason);
            break;
        case EventKind::Halt:
            detail::kv(out, "reason", e.reason);
            if (!e.detail.empty()) detail::kv(out, "detail", e.detail);
            break;
        }
        out += '\n';
    }
    return out;
}

inline nlohmann::json to_json(const Event& e)
{
    nlohmann::json j;
    j["event"] = to_string(e.kind);
    auto put = [&](const char* key, const std::string& v) {
        if (!v.empty()) j[key] = v;
    };
    put("process", e.process);
    put("channel", e.channel);
    put("port", e.port);
    put("message", e.message);
    put("action", e.action);
    put("function", e.function);
    put("side", e.side);
    put("reason", e.reason);
    put("detail", e.detail);
    if (e.result) j["result"] = *e.result;
    return j;
}

inline nlohmann::json to_json(const Trace& t)
{
    nlohmann::json events = nlohmann::json::array();
    for (const auto& e : t.events) events.push_back(to_json(e));
    return {{"seed", t.seed}, {"events", std::move(events)}};
}

inline EventKind event_kind_from(std::string_view s)
{
    for (auto k : {EventKind::InitialAction, EventKind::Deliver, EventKind::Call, EventKind::Send, EventKind::Skip,
                   EventKind::Halt})
        if (to_string(k) == s) return k;
    throw Error("BadTrace", "unknown trace event '" + std::string(s) + "'");
}

inline Trace trace_from_json(const nlohmann::json& j)
{
    Trace t;
    t.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& je : j.at("events")) {
        Event e;
        e.kind = event_kind_from(je.at("event").get<std::string>());
        auto get = [&](const char* key, std::string& dst) {
            if (je.contains(key)) dst = je[key].get<std::string>();
        };
        get("process", e.process);
        get("channel", e.channel);
        get("port", e.port);
        get("message", e.message);
        get("action", e.action);
        get("function", e.function);
        get("side", e.side);
        get("reason", e.reason);
        get("detail", e.detail);
        if (je.contains("result")) e.result = je["result"].get<bool>();
        t.events.push_back(std::move(e));
    }
    return t;
}

inline nlohmann::json to_json(const Value& v)
{
    return std::visit([](const auto& x) { return nlohmann::json(x); }, v);
}

inline std::string to_display(const Value& v)
{
    if (auto d = std::get_if<double>(&v)) {
        std::ostringstream os;
        os << *d;
        return os.str();
    }
    if (auto b = std::get_if<bool>(&v)) return *b ? "true" : "false";
    return std::get<std::string>(v);
}

} // namespace templet
