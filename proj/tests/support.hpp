#pragma once

// Fixtures and independent oracles shared by the unit tests and the
// acceptance runner. Nothing here calls into the code under test except to
// read its public data types.

#include "templet/templet.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fixtures {

inline std::filesystem::path source_dir() { return TEMPLET_SOURCE_DIR; }

inline std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Collapse every whitespace run to one space.
inline std::string squash(std::string_view s)
{
    std::string out;
    bool space = false;
    for (char c : s) {
        if (c == ' ' || c == '\n' || c == '\t' || c == '\r') {
            space = true;
            continue;
        }
        if (space && !out.empty()) out += ' ';
        space = false;
        out += c;
    }
    return out;
}

/// The marked-code listing as printed, annotations on the right removed.
inline constexpr std::string_view kHelloListing = R"(#include <runtime.h>

/*templet$$include*/
#include <iostream>
/*end*/

/*templet*
 *hello<function>.
*end*/

void hello(){
/*templet$hello$*/
std::cout << "hello world!!!";
/*end*/
}
)";

inline constexpr std::string_view kHello = "*hello<function>.";
inline constexpr std::string_view kLinkPattern = "~Link <request-response>.";
inline constexpr std::string_view kIdentityPattern = "*Pythagorean-identity-test <master-worker, shared-memory>.";
inline constexpr std::string_view kRequestResponse = R"(~Link = +BEGIN? Request -> PROCESSING;
        PROCESSING! Response -> BEGIN.)";
inline constexpr std::string_view kTrigLink = R"(~Link = +BEGIN ? ArgCos -> CALCCOS | ArgSin -> CALCSIN;
        CALCCOS ! Cos2 -> END; CALCSIN ! Sin2 -> END.)";
inline constexpr std::string_view kMaster = R"(*Master =
    p1:Link ! Sin2 -> join; p2:Link ! Cos2 -> join;
    +fork(p1!ArgSin,p2!ArgCos); join(p1?Sin2,p2?Cos2) .)";
inline constexpr std::string_view kWorker1 = R"(*Worker =
    p : Link ? ArgSin -> sin2 | ArgCos -> cos2;
    sin2(p?ArgSin,p!Sin2); cos2(p?ArgCos,p!Cos2) .)";
inline constexpr std::string_view kWorker2 = R"(*Worker =
    p : Link ? -> DO;
    DO:sin2(p?ArgSin,p!Sin2)->|cos2; cos2(p?ArgCos,p!Cos2) .)";
inline constexpr std::string_view kWorker3 = R"(*Worker =
    p : Link ? -> DO;
    DO:sin2(p?ArgSin,p!Sin2) |cos2(p?ArgCos,p!Cos2) .)";

inline std::vector<std::string_view> reference_schemes()
{
    return {kHello, kLinkPattern, kIdentityPattern, kRequestResponse, kTrigLink, kMaster, kWorker1, kWorker2, kWorker3};
}

inline std::string trig(std::string_view worker = kWorker1)
{
    return std::string(kTrigLink) + "\n" + std::string(kMaster) + "\n" + std::string(worker) + "\n";
}

inline constexpr std::string_view kOrphanState = "~C = +A? m -> B; B! r -> A; X? q -> A.";

} // namespace fixtures

namespace oracle {

using templet::ArgMode;
using templet::Event;
using templet::EventKind;

/// Reference short-circuit evaluation of `body -> C|D`: the (call, outcome)
/// pairs in invocation order, and whether control leaves by success.
struct Evaluation {
    std::vector<std::pair<std::string, bool>> calls;
    bool success = false;

    friend bool operator==(const Evaluation&, const Evaluation&) = default;
};

inline Evaluation short_circuit(const templet::Disjunction& body, const std::map<std::string, bool>& outcome)
{
    Evaluation e;
    for (const auto& conj : body) {
        bool all = true;
        for (const auto& call : conj) {
            bool r = outcome.at(call.name);
            e.calls.emplace_back(call.name, r);
            if (!r) {
                all = false;
                break;
            }
        }
        if (all) {
            e.success = true;
            return e;
        }
    }
    return e;
}

/// Walk regular-form actions from `entry` until control reaches a label that
/// is not one of them. `success_label` / `failure_label` identify the exits.
inline std::optional<Evaluation> walk_regular(const std::vector<templet::RegularAction>& actions,
                                              const std::string& entry, const std::map<std::string, bool>& outcome,
                                              const std::optional<std::string>& success_label,
                                              const std::optional<std::string>& failure_label)
{
    std::map<std::string, const templet::RegularAction*> by_id;
    for (const auto& a : actions) by_id[a.id] = &a;
    Evaluation e;
    std::optional<std::string> at = entry;
    for (std::size_t guard = 0; guard <= actions.size(); ++guard) {
        auto it = at ? by_id.find(*at) : by_id.end();
        if (it == by_id.end()) {
            if (at == success_label) {
                e.success = true;
                return e;
            }
            if (at == failure_label) return e;
            return std::nullopt;
        }
        bool r = outcome.at(it->second->call.name);
        e.calls.emplace_back(it->second->call.name, r);
        at = r ? it->second->on_success : it->second->on_failure;
    }
    return std::nullopt; // cycle
}

/// Independent replay of a trace against the channel definitions (AST level).
/// Checks access alternation, protocol paths, and single delivery per send.
struct TraceReport {
    std::vector<std::string> violations;
    std::size_t sends = 0;
    std::size_t delivers = 0;
    std::map<std::string, std::string> final_state;
};

inline TraceReport check_trace(const templet::Trace& t, const templet::Scheme& scheme,
                               const std::map<std::string, std::string>& channel_class)
{
    struct Ch {
        const templet::ChannelDef* def = nullptr;
        std::string state;
        std::string access = "client";
        bool in_flight = false;
    };
    std::map<std::string, Ch> chans;
    for (const auto& [inst, cls] : channel_class) {
        Ch c;
        for (const auto& k : scheme.classes)
            if (auto d = std::get_if<templet::ChannelDef>(&k); d && d->name == cls) c.def = d;
        for (const auto& s : c.def->states)
            if (s.initial) c.state = s.name;
        chans[inst] = c;
    }
    auto target = [](const templet::ChannelDef& d, const std::string& state, const std::string& msg)
        -> std::optional<std::pair<std::string, templet::StateMark>> {
        for (const auto& s : d.states)
            if (s.name == state)
                for (const auto& r : s.rules)
                    for (const auto& m : r.messages)
                        if (m == msg) return std::make_pair(r.target, s.mark);
        return std::nullopt;
    };

    TraceReport rep;
    for (std::size_t i = 0; i < t.events.size(); ++i) {
        const Event& e = t.events[i];
        auto where = "event " + std::to_string(i) + ": ";
        if (e.kind == EventKind::Send) {
            ++rep.sends;
            auto& c = chans.at(e.channel);
            if (c.in_flight) rep.violations.push_back(where + e.channel + " sent twice without delivery");
            if (e.side != c.access) rep.violations.push_back(where + e.side + " sent without access on " + e.channel);
            auto tr = target(*c.def, c.state, e.message);
            if (!tr)
                rep.violations.push_back(where + e.message + " not allowed in state " + c.state);
            else {
                const char* owner = tr->second == templet::StateMark::Answer ? "server" : "client";
                if (e.side != owner) rep.violations.push_back(where + e.message + " sent by the wrong side");
                c.state = tr->first;
            }
            c.access = c.access == "client" ? "server" : "client";
            c.in_flight = true;
        } else if (e.kind == EventKind::Deliver) {
            ++rep.delivers;
            auto& c = chans.at(e.channel);
            if (!c.in_flight) rep.violations.push_back(where + e.channel + " delivered without a send");
            if (e.side != c.access) rep.violations.push_back(where + "delivered to the side without access");
            c.in_flight = false;
        } else if (e.kind == EventKind::Halt && i + 1 != t.events.size()) {
            rep.violations.push_back(where + "halt is not the last event");
        }
    }
    if (t.events.empty() || t.events.back().kind != EventKind::Halt) rep.violations.push_back("trace does not end in HALT");
    for (const auto& [n, c] : chans) rep.final_state[n] = c.state;
    return rep;
}

inline const std::map<std::string, std::string>& trig_channels()
{
    static const std::map<std::string, std::string> m{{"link1", "Link"}, {"link2", "Link"}};
    return m;
}

/// Call and Send events only, with the fields that are independent of how the
/// worker is written (action ids differ between formulations).
inline std::vector<std::string> observable(const templet::Trace& t)
{
    std::vector<std::string> out;
    for (const auto& e : t.events) {
        if (e.kind == EventKind::Call)
            out.push_back("CALL " + e.process + " " + e.function + " " + (e.result.value_or(false) ? "1" : "0"));
        else if (e.kind == EventKind::Send)
            out.push_back("SEND " + e.channel + " " + e.message + " " + e.side);
    }
    return out;
}

/// Order in which link1 / link2 deliveries occur, e.g. "12211".
inline std::string delivery_order(const templet::Trace& t)
{
    std::string s;
    for (const auto& e : t.events)
        if (e.kind == EventKind::Deliver) s += e.channel == "link1" ? '1' : '2';
    return s;
}

} // namespace oracle

namespace gen {

using Rng = std::mt19937_64;

inline std::size_t pick(Rng& r, std::size_t lo, std::size_t hi)
{
    return std::uniform_int_distribution<std::size_t>(lo, hi)(r);
}
inline bool coin(Rng& r) { return pick(r, 0, 1) == 1; }

inline std::string ident(Rng& r)
{
    static const std::string first = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz_";
    static const std::string rest = first + "0123456789-";
    std::string s(1, first[pick(r, 0, first.size() - 1)]);
    for (std::size_t n = pick(r, 0, 6); n; --n) s += rest[pick(r, 0, rest.size() - 1)];
    return s;
}

inline std::vector<std::string> idents(Rng& r, std::size_t lo, std::size_t hi)
{
    std::vector<std::string> v;
    for (std::size_t n = pick(r, lo, hi); n; --n) v.push_back(ident(r));
    return v;
}

inline std::vector<templet::Rule> rules(Rng& r, std::size_t lo, std::size_t hi)
{
    std::vector<templet::Rule> out;
    for (std::size_t n = pick(r, lo, hi); n; --n) out.push_back({idents(r, 1, 3), ident(r), {}});
    return out;
}

inline templet::Call call(Rng& r)
{
    templet::Call c{ident(r), {}, {}};
    for (std::size_t n = pick(r, 0, 3); n; --n)
        c.args.push_back({ident(r), coin(r) ? templet::ArgMode::Read : templet::ArgMode::Write, ident(r), {}});
    return c;
}

inline std::optional<std::string> maybe(Rng& r) { return coin(r) ? std::optional<std::string>(ident(r)) : std::nullopt; }

inline templet::ChannelDef channel(Rng& r)
{
    templet::ChannelDef c{ident(r), idents(r, 0, 2), {}, {}};
    if (coin(r)) return c; // bodyless
    for (std::size_t n = pick(r, 1, 4); n; --n) {
        templet::StateDef s{ident(r), coin(r), static_cast<templet::StateMark>(pick(r, 0, 2)), {}, {}};
        if (s.mark != templet::StateMark::Unmarked) s.rules = rules(r, 1, 3);
        c.states.push_back(std::move(s));
    }
    return c;
}

inline templet::ActionDef action(Rng& r)
{
    templet::ActionDef a;
    a.initial = coin(r);
    a.label = pick(r, 0, 3) == 0 ? std::optional<std::string>(ident(r)) : std::nullopt;
    for (std::size_t d = pick(r, 1, 3); d; --d) {
        templet::Conjunction conj;
        for (std::size_t k = pick(r, 1, 3); k; --k) conj.push_back(call(r));
        a.body.push_back(std::move(conj));
    }
    a.on_success = maybe(r);
    a.on_failure = maybe(r);
    return a;
}

inline templet::ProcessDef process(Rng& r)
{
    templet::ProcessDef p{ident(r), idents(r, 0, 2), {}, {}, {}};
    for (std::size_t n = pick(r, 0, 3); n; --n) {
        templet::PortDef port{ident(r), ident(r), coin(r) ? templet::PortSide::Server : templet::PortSide::Client,
                              {}, std::nullopt, {}};
        port.rules = rules(r, 0, 3);
        if (coin(r)) port.default_action = ident(r);
        p.ports.push_back(std::move(port));
    }
    for (std::size_t n = pick(r, 0, 3); n; --n) p.actions.push_back(action(r));
    return p;
}

inline templet::Scheme scheme(Rng& r)
{
    templet::Scheme s;
    for (std::size_t n = pick(r, 0, 4); n; --n) {
        if (coin(r))
            s.classes.emplace_back(channel(r));
        else
            s.classes.emplace_back(process(r));
    }
    return s;
}

/// Random `&`/`|` body over distinct argument-free calls `f0..f{k-1}`, k <= 6.
inline templet::Disjunction tree(Rng& r)
{
    templet::Disjunction d;
    std::size_t k = 0;
    const std::size_t budget = pick(r, 1, 6);
    while (k < budget) {
        templet::Conjunction conj;
        for (std::size_t n = pick(r, 1, budget - k); n; --n) conj.push_back({"f" + std::to_string(k++), {}, {}});
        d.push_back(std::move(conj));
    }
    return d;
}

inline std::string print_body(const templet::Disjunction& d)
{
    std::string s;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (i) s += " | ";
        for (std::size_t j = 0; j < d[i].size(); ++j) {
            if (j) s += " & ";
            s += d[i][j].name + "()";
        }
    }
    return s;
}

/// Random base text. No '*' in the alphabet, so no marker can form.
inline std::string base_text(Rng& r)
{
    static const std::string alphabet = "abc xyz\n\t;{}()#<>=+-/$";
    std::string s;
    for (std::size_t n = pick(r, 0, 40); n; --n) s += alphabet[pick(r, 0, alphabet.size() - 1)];
    return s;
}

} // namespace gen
