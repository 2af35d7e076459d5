#pragma once

// Executable example networks shipped with the toolchain. The CLI can only
// run these, since it has no way to compile user code from a mapped module.

#include "templet/parser.hpp"
#include "templet/runtime.hpp"
#include "templet/semantic.hpp"
#include "templet/source_model.hpp"
#include "templet/trace_io.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace templet::bundled {

inline constexpr std::string_view kTrigLink = R"(~Link = +BEGIN ? ArgCos -> CALCCOS | ArgSin -> CALCSIN;
        CALCCOS ! Cos2 -> END; CALCSIN ! Sin2 -> END.)";

inline constexpr std::string_view kTrigMaster = R"(*Master =
    p1:Link ! Sin2 -> join; p2:Link ! Cos2 -> join;
    +fork(p1!ArgSin,p2!ArgCos); join(p1?Sin2,p2?Cos2) .)";

/// The three equivalent ways of writing the worker.
enum class WorkerVariant { PortRules, Chain, Grouped };

inline std::string_view worker_text(WorkerVariant v)
{
    switch (v) {
    case WorkerVariant::PortRules:
        return R"(*Worker =
    p : Link ? ArgSin -> sin2 | ArgCos -> cos2;
    sin2(p?ArgSin,p!Sin2); cos2(p?ArgCos,p!Cos2) .)";
    case WorkerVariant::Chain:
        return R"(*Worker =
    p : Link ? -> DO;
    DO:sin2(p?ArgSin,p!Sin2)->|cos2; cos2(p?ArgCos,p!Cos2) .)";
    case WorkerVariant::Grouped:
        return R"(*Worker =
    p : Link ? -> DO;
    DO:sin2(p?ArgSin,p!Sin2) |cos2(p?ArgCos,p!Cos2) .)";
    }
    return {};
}

inline std::string trig_scheme(WorkerVariant v = WorkerVariant::PortRules)
{
    return std::string(kTrigLink) + "\n" + std::string(kTrigMaster) + "\n" + std::string(worker_text(v)) + "\n";
}

inline constexpr std::string_view kResultVar = "sin2x_plus_cos2x";

/// Master `m`, workers `w1`/`w2`, channels `link1`/`link2`, wired as
/// m.p1 -> link1 -> w1.p and m.p2 -> link2 -> w2.p.
struct TrigNetwork {
    Engine engine;
    ProcessHandle master, w1, w2;
    ChannelHandle link1, link2;

    double result() const { return std::get<double>(engine.process(master).vars.at(std::string(kResultVar))); }
};

inline double number(const Payload& p, const std::string& key) { return std::get<double>(p.at(key)); }

inline void register_trig_callbacks(UserFunctionRegistry& r)
{
    r.on_class_function("Master", "fork", [](CallContext& c) {
        double x = number(c.vars(), "x");
        c.write("p1", "ArgSin")["x"] = x;
        c.write("p2", "ArgCos")["x"] = x;
        return true;
    });
    r.on_class_function("Master", "join", [](CallContext& c) {
        c.vars()[std::string(kResultVar)] =
            number(c.read("p1", "Sin2"), "value") + number(c.read("p2", "Cos2"), "value");
        return true;
    });
    r.on_class_function("Worker", "sin2", [](CallContext& c) {
        double s = std::sin(number(c.read("p", "ArgSin"), "x"));
        c.write("p", "Sin2")["value"] = s * s;
        return true;
    });
    r.on_class_function("Worker", "cos2", [](CallContext& c) {
        double s = std::cos(number(c.read("p", "ArgCos"), "x"));
        c.write("p", "Cos2")["value"] = s * s;
        return true;
    });
}

/// `scheme` must declare Link, Master and Worker with the ports used above.
inline TrigNetwork make_trig_network(ResolvedScheme scheme, double x, EngineOptions options = {})
{
    TrigNetwork n{Engine(std::move(scheme), options), {}, {}, {}, {}, {}};
    Engine& e = n.engine;
    n.link1 = e.add_channel("Link", "link1");
    n.link2 = e.add_channel("Link", "link2");
    n.master = e.add_process("Master", "m");
    n.w1 = e.add_process("Worker", "w1");
    n.w2 = e.add_process("Worker", "w2");
    e.bind_client(n.link1, n.master, "p1");
    e.bind_client(n.link2, n.master, "p2");
    e.bind_server(n.link1, n.w1, "p");
    e.bind_server(n.link2, n.w2, "p");
    e.process(n.master).vars["x"] = x;
    register_trig_callbacks(e.callbacks());
    return n;
}

/// Parse and resolve scheme text that is expected to be clean.
inline ResolvedScheme resolve_text(std::string_view text)
{
    Resolution r = resolve(parse_scheme(text));
    if (has_errors(r.diagnostics)) {
        const Diagnostic* d = nullptr;
        for (const auto& x : r.diagnostics)
            if (x.severity == Severity::Error) {
                d = &x;
                break;
            }
        throw Error(d->code, d->message, d->pos);
    }
    return std::move(r.scheme);
}

struct RunOutcome {
    Trace trace;
    std::vector<std::string> report; // lines for standard output
};

struct Example {
    std::string name;
    std::string description;
    std::string scheme;
    std::function<RunOutcome(const std::map<std::string, std::string>& inputs, std::uint64_t seed)> run;
};

inline std::vector<Example> examples()
{
    std::vector<Example> out;
    auto trig = [](WorkerVariant v, std::string name, std::string description) {
        Example ex;
        ex.name = std::move(name);
        ex.description = std::move(description);
        ex.scheme = trig_scheme(v);
        ex.run = [v](const std::map<std::string, std::string>& inputs, std::uint64_t seed) {
            double x = 0.5;
            for (const auto& [key, value] : inputs) {
                if (key != "x") throw Error("UnknownInput", "the trig example takes only the input 'x'");
                try {
                    std::size_t used = 0;
                    x = std::stod(value, &used);
                    if (used != value.size()) throw std::invalid_argument(value);
                } catch (const std::exception&) {
                    throw Error("BadInput", "input x must be a number, got '" + value + "'");
                }
            }
            TrigNetwork n = make_trig_network(resolve_text(trig_scheme(v)), x);
            RunOutcome r;
            r.trace = n.engine.run(seed);
            if (r.trace.halt_reason() == halt::queue_empty)
                r.report.push_back("sin2(x) + cos2(x) = " + to_display(Value(n.result())));
            for (const auto& p : n.engine.processes())
                for (const auto& [key, value] : p.vars) r.report.push_back(p.name + "." + key + " = " + to_display(value));
            for (const auto& c : n.engine.channels()) r.report.push_back(c.name + ".state = " + c.state);
            return r;
        };
        return ex;
    };
    out.push_back(trig(WorkerVariant::PortRules, "trig", "sin^2 x + cos^2 x with port-rule dispatch in Worker"));
    out.push_back(trig(WorkerVariant::Chain, "trig-chain", "the same with a labelled failure chain in Worker"));
    out.push_back(trig(WorkerVariant::Grouped, "trig-grouped", "the same with a grouped '|' action in Worker"));
    return out;
}

inline const std::vector<Example>& all_examples()
{
    static const std::vector<Example> all = examples();
    return all;
}

inline const Example* find_example(std::string_view name)
{
    for (const auto& e : all_examples())
        if (e.name == name) return &e;
    return nullptr;
}

/// A marked module holding only the example's scheme.
inline std::string as_module(const Example& e, const SignatureSet& sig = {})
{
    return sig.scheme_prefix + "\n" + e.scheme + sig.scheme_postfix + "\n";
}

/// Bundled example whose scheme is structurally equal to `s`.
inline const Example* find_example(const Scheme& s)
{
    for (const auto& e : all_examples())
        if (parse_scheme(e.scheme) == s) return &e;
    return nullptr;
}

} // namespace templet::bundled
