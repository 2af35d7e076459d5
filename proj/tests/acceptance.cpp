// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include "support.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>

using namespace templet;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what)
    {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

ResolvedScheme clean(std::string_view text)
{
    Resolution r = analyze(parse_scheme(text));
    if (has_errors(r.diagnostics)) throw std::runtime_error("scheme has errors: " + std::string(text));
    return r.scheme;
}

const ChannelDef& channel_at(const Scheme& s, std::size_t i) { return std::get<ChannelDef>(s.classes.at(i)); }
const ProcessDef& process_at(const Scheme& s, std::size_t i) { return std::get<ProcessDef>(s.classes.at(i)); }

const std::vector<double> kInputs{0.0, 0.5, 1.0, -2.3, 3.14159};
const std::vector<std::string_view> kWorkers{fixtures::kWorker1, fixtures::kWorker2, fixtures::kWorker3};

struct TrigRun {
    double x;
    std::uint64_t seed;
    std::size_t worker;
    Trace trace;
    double result = 0;
    std::string link1, link2;
};

// Every trig run used by the end-to-end, equivalence and determinism checks.
std::vector<TrigRun>& trig_runs()
{
    static std::vector<TrigRun> runs;
    return runs;
}

TrigRun run_trig(double x, std::uint64_t seed, std::size_t worker)
{
    auto n = bundled::make_trig_network(clean(fixtures::trig(kWorkers[worker])), x);
    TrigRun r{x, seed, worker, n.engine.run(seed), 0, {}, {}};
    if (r.trace.halt_reason() == halt::queue_empty) r.result = n.result();
    r.link1 = n.engine.channel(n.link1).state;
    r.link2 = n.engine.channel(n.link2).state;
    trig_runs().push_back(r);
    return r;
}

Outcome grammar_coverage()
{
    Outcome o;
    auto t0 = Clock::now();
    Scheme hello = parse_scheme(fixtures::kHello);
    o.require(hello.classes.size() == 1 && process_at(hello, 0).params == std::vector<std::string>{"function"},
              "hello shape");
    Scheme link = parse_scheme(fixtures::kLinkPattern);
    o.require(channel_at(link, 0).params.size() == 1 && channel_at(link, 0).states.empty(), "Link pattern shape");
    Scheme ident = parse_scheme(fixtures::kIdentityPattern);
    o.require(process_at(ident, 0).params.size() == 2, "identity pattern shape");
    Scheme rr = parse_scheme(fixtures::kRequestResponse);
    o.require(channel_at(rr, 0).states.size() == 2, "request-response: 2 states");
    Scheme tl = parse_scheme(fixtures::kTrigLink);
    o.require(channel_at(tl, 0).states.size() == 3 && channel_at(tl, 0).states[0].rules.size() == 2,
              "trig Link: 3 states, 2 rules from BEGIN");
    Scheme master = parse_scheme(fixtures::kMaster);
    o.require(process_at(master, 0).ports.size() == 2 && process_at(master, 0).actions.size() == 2,
              "Master: 2 ports, 2 actions");
    Scheme w1 = parse_scheme(fixtures::kWorker1), w2 = parse_scheme(fixtures::kWorker2),
           w3 = parse_scheme(fixtures::kWorker3);
    o.require(process_at(w1, 0).ports[0].rules.size() == 2 && process_at(w1, 0).actions.size() == 2,
              "Worker (port rules): 2 rules, 2 actions");
    o.require(process_at(w2, 0).actions.size() == 2 && process_at(w2, 0).actions[0].on_failure == "cos2",
              "Worker (chain): 2 actions, DO fails to cos2");
    o.require(process_at(w3, 0).actions.size() == 1 && process_at(w3, 0).actions[0].body.size() == 2,
              "Worker (grouped): 1 action with 2 alternatives");
    const std::string reference = fixtures::squash(fixtures::slurp(fixtures::source_dir() / "paper.md"));
    for (auto s : fixtures::reference_schemes())
        o.require(reference.find(fixtures::squash(s)) != std::string::npos, "scheme text not found in reference text");
    double dt = seconds_since(t0);
    o.require(dt < 1.0, "took " + std::to_string(dt) + " s");
    if (o.ok) o.detail = "9 schemes parsed, shapes match";
    return o;
}

Outcome round_trips()
{
    Outcome o;
    o.require(render(scan(fixtures::kHelloListing)) == fixtures::kHelloListing, "render(scan(listing)) differs");
    for (auto s : fixtures::reference_schemes()) {
        Scheme ast = parse_scheme(s);
        o.require(parse_scheme(pretty_print(ast)) == ast, "pretty-print round trip: " + std::string(s));
    }
    if (o.ok) o.detail = "listing bytes and 9 ASTs reproduced exactly";
    return o;
}

ActionDef only_action(std::string_view text) { return process_at(parse_scheme(text), 0).actions.at(0); }

// (call, success target, failure target) with targets named by the call they reach
std::vector<std::string> arrows(const std::vector<RegularAction>& as)
{
    std::map<std::string, std::string> call_of;
    for (const auto& a : as) call_of[a.id] = a.call.name;
    auto name = [&](const std::optional<std::string>& t) {
        if (!t) return std::string("-");
        auto it = call_of.find(*t);
        return it == call_of.end() ? *t : it->second;
    };
    std::vector<std::string> out;
    for (const auto& a : as) out.push_back(a.call.name + ">" + name(a.on_success) + "|" + name(a.on_failure));
    return out;
}

Outcome desugaring()
{
    Outcome o;
    o.require(arrows(desugar(only_action("*P = A()&B()->C|D."))) == std::vector<std::string>{"A>B|D", "B>C|D"},
              "A()&B()->C|D");
    o.require(arrows(desugar(only_action("*P = A()|B()->C|D."))) == std::vector<std::string>{"A>C|B", "B>C|D"},
              "A()|B()->C|D");
    gen::Rng r(20240601);
    std::size_t cases = 0, assignments = 0;
    for (; cases < 1500 && o.ok; ++cases) {
        Disjunction body = gen::tree(r);
        std::size_t k = 0;
        for (const auto& c : body) k += c.size();
        std::string text = "*P = " + gen::print_body(body) + " -> C | D.";
        ActionDef a = only_action(text);
        auto regular = desugar(a);
        for (std::uint32_t mask = 0; mask < (1u << k); ++mask, ++assignments) {
            std::map<std::string, bool> outcome;
            for (std::size_t i = 0; i < k; ++i) outcome["f" + std::to_string(i)] = (mask >> i) & 1u;
            auto got = oracle::walk_regular(regular, a.id(), outcome, "C", "D");
            if (!got || !(*got == oracle::short_circuit(body, outcome))) {
                o.require(false, "mismatch on " + text + " mask " + std::to_string(mask));
                break;
            }
        }
    }
    if (o.ok) o.detail = std::to_string(cases) + " trees, " + std::to_string(assignments) + " assignments, 0 mismatches";
    return o;
}

Outcome trig_identity()
{
    Outcome o;
    auto t0 = Clock::now();
    std::size_t n = 0;
    double worst = 0;
    for (double x : kInputs)
        for (std::uint64_t seed = 1; seed <= 10; ++seed, ++n) {
            TrigRun r = run_trig(x, seed, 0);
            worst = std::max(worst, std::abs(r.result - 1.0));
            o.require(r.trace.halt_reason() == halt::queue_empty, "halt " + std::string(r.trace.halt_reason()));
            o.require(std::abs(r.result - 1.0) <= 1e-12, "x=" + std::to_string(x) + " gives " + std::to_string(r.result));
            o.require(r.link1 == "END" && r.link2 == "END", "links end in " + r.link1 + "/" + r.link2);
        }
    double dt = seconds_since(t0);
    o.require(dt < 1.0, "took " + std::to_string(dt) + " s");
    if (o.ok) {
        std::ostringstream s;
        s << n << " runs, max |result-1| = " << worst << ", " << dt << " s";
        o.detail = s.str();
    }
    return o;
}

Outcome worker_equivalence()
{
    Outcome o;
    std::size_t n = 0;
    for (double x : kInputs)
        for (std::uint64_t seed = 1; seed <= 10; ++seed, ++n) {
            auto base = oracle::observable(run_trig(x, seed, 0).trace);
            for (std::size_t w : {1u, 2u})
                o.require(oracle::observable(run_trig(x, seed, w).trace) == base,
                          "variant " + std::to_string(w + 1) + " differs at x=" + std::to_string(x) +
                              " seed=" + std::to_string(seed));
        }
    if (o.ok) o.detail = std::to_string(n) + " (input, seed) pairs, 3 variants each";
    return o;
}

Outcome determinism()
{
    Outcome o;
    std::set<std::string> orders;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        TrigRun a = run_trig(0.5, seed, 0), b = run_trig(0.5, seed, 0);
        o.require(to_text(a.trace) == to_text(b.trace), "text traces differ for seed " + std::to_string(seed));
        o.require(to_json(a.trace).dump() == to_json(b.trace).dump(), "json traces differ for seed " + std::to_string(seed));
        orders.insert(oracle::delivery_order(a.trace));
    }
    o.require(orders.size() >= 2, "only one delivery order across seeds 1..10");
    if (o.ok) o.detail = std::to_string(orders.size()) + " distinct delivery orders over seeds 1..10";
    return o;
}

Outcome invariants()
{
    Outcome o;
    std::size_t checked = 0;
    for (const auto& r : trig_runs()) {
        auto rep = oracle::check_trace(r.trace, parse_scheme(fixtures::trig(kWorkers[r.worker])), oracle::trig_channels());
        ++checked;
        o.require(rep.violations.empty(), rep.violations.empty() ? "" : rep.violations.front());
        if (r.trace.halt_reason() == halt::queue_empty)
            o.require(rep.sends == rep.delivers, "#Send != #Deliver at seed " + std::to_string(r.seed));
    }
    o.require(checked > 0, "no traces to check");
    if (o.ok) o.detail = std::to_string(checked) + " traces, 0 violations";
    return o;
}

Outcome protocol_enforcement()
{
    Outcome o;
    std::string wrong_answer = std::string(fixtures::kTrigLink) + "\n" + std::string(fixtures::kMaster) +
                               "\n*Worker = p : Link ? ArgSin -> sin2 | ArgCos -> cos2; sin2(p?ArgSin,p!Sin2); "
                               "cos2(p?ArgCos,p!Sin2) .";
    auto n = bundled::make_trig_network(clean(wrong_answer), 0.5);
    n.engine.callbacks().on_class_function("Worker", "cos2", [](CallContext& c) {
        double v = std::cos(bundled::number(c.read("p", "ArgCos"), "x"));
        c.write("p", "Sin2")["value"] = v * v;
        return true;
    });
    auto t1 = n.engine.run(1);
    o.require(t1.halt_reason() == halt::protocol_violation, "wrong payload halts with " + std::string(t1.halt_reason()));

    std::string missing_rule = std::string(fixtures::kTrigLink) +
                               "\n*Master = p1:Link ! Sin2 -> join; p2:Link ! Sin2 -> join;"
                               " +fork(p1!ArgSin,p2!ArgCos); join(p1?Sin2,p2?Cos2) .\n" +
                               std::string(fixtures::kWorker1);
    auto t2 = bundled::make_trig_network(clean(missing_rule), 0.5).engine.run(1);
    o.require(t2.halt_reason() == halt::unknown_message, "missing rule halts with " + std::string(t2.halt_reason()));
    if (o.ok) o.detail = "protocol_violation and unknown_message raised";
    return o;
}

Outcome reachability()
{
    Outcome o;
    Resolution trig = analyze(parse_scheme(fixtures::trig()));
    std::size_t warnings = 0;
    for (const auto& d : trig.diagnostics) warnings += d.severity == Severity::Warning;
    o.require(warnings == 0, "trig network has " + std::to_string(warnings) + " warnings");
    Resolution orphan = analyze(parse_scheme(fixtures::kOrphanState));
    std::size_t unreachable = 0;
    for (const auto& d : orphan.diagnostics) unreachable += d.code == "UnreachableState";
    o.require(unreachable == 1 && orphan.diagnostics.size() == 1,
              "orphan channel gives " + std::to_string(orphan.diagnostics.size()) + " diagnostics");
    if (o.ok) o.detail = "0 warnings on trig, 1 UnreachableState on orphan X";
    return o;
}

Outcome mapping()
{
    Outcome o;
    const std::string fresh = "/*templet*\n" + fixtures::trig() + "*end*/\n";
    auto map_once = [](const std::string& text) {
        SourceModule m = scan(text);
        Resolution r = analyze(parse_scheme(m.scheme_block().text));
        return render(map_module(m, r.scheme, default_templates()));
    };
    std::string once = map_once(fresh);
    std::set<std::string> keys;
    for (const auto& [k, where] : user_blocks(scan(once))) keys.insert(join_key(k));
    const std::set<std::string> expected{"Link$ArgCos", "Link$ArgSin", "Link$Cos2",   "Link$Sin2",
                                         "Master$p1",   "Master$p2",   "Master$fork", "Master$join",
                                         "Worker$p",    "Worker$sin2", "Worker$cos2"};
    o.require(keys == expected, "user block key set differs");
    o.require(map_once(once) == once, "second mapping changed bytes");

    const std::string body = "\n    result = p1_Sin2->value + p2_Cos2->value;\n";
    const std::string marker = "/*templet$Master$join*/";
    std::string filled = once;
    filled.insert(filled.find(marker) + marker.size(), body);
    std::string again = map_once(filled);
    auto blocks = scan(again);
    auto idx = user_blocks(blocks);
    o.require(idx.count({"Master", "join"}) && blocks.blocks[idx.at({"Master", "join"}).front()].text == body,
              "Master$join body changed");
    o.require(again == filled, "remapping a filled module changed bytes");

    SourceModule mapped = scan(once);
    o.require(extract_scheme(mapped) == parse_scheme(mapped.scheme_block().text), "extract_scheme differs");
    auto link = once.find("class Link "), master = once.find("class Master "), worker = once.find("class Worker ");
    o.require(link != std::string::npos && link < master && master < worker, "class regions out of scheme order");
    if (o.ok) o.detail = "11 keys, idempotent, join body kept, extract matches, order Link<Master<Worker";
    return o;
}

struct DotCounts {
    std::size_t vertices = 0, edges = 0, initial = 0;
};

DotCounts count_dot(const std::string& dot)
{
    DotCounts c;
    std::istringstream in(dot);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("  \"", 0) != 0) continue;
        if (line.find("\" -> \"") != std::string::npos)
            ++c.edges;
        else
            ++c.vertices;
        if (line.find("shape=doublecircle") != std::string::npos) ++c.initial;
    }
    return c;
}

Outcome graphs()
{
    Outcome o;
    ResolvedScheme s = clean(fixtures::trig());
    std::string link = channel_graph(*s.find_channel("Link")).dot;
    DotCounts lc = count_dot(link);
    o.require(lc.vertices == 4 && lc.edges == 4 && lc.initial == 1, "Link graph counts");
    std::string master = process_graph(*s.find_process("Master")).dot;
    DotCounts mc = count_dot(master);
    o.require(mc.initial == 1 && master.find("\"action:fork\" [label=\"fork()\", shape=doublecircle]") != std::string::npos,
              "Master initial action");
    ResolvedScheme s2 = clean(fixtures::trig());
    o.require(channel_graph(*s2.find_channel("Link")).dot == link && process_graph(*s2.find_process("Master")).dot == master,
              "graph output not deterministic");
    if (o.ok) o.detail = "Link 4/4 with 1 initial; Master 1 initial action; stable output";
    return o;
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"grammar coverage", grammar_coverage},
        {"round trips", round_trips},
        {"desugaring oracle", desugaring},
        {"trig identity end-to-end", trig_identity},
        {"worker-variant equivalence", worker_equivalence},
        {"determinism and nondeterminism", determinism},
        {"access alternation and delivery accounting", invariants},
        {"protocol enforcement", protocol_enforcement},
        {"reachability", reachability},
        {"mapping", mapping},
        {"graph export", graphs},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.ok = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failed += !o.ok;
        std::cout << (o.ok ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first << " ("
                  << o.detail << ")\n";
    }
    return failed == 0 ? 0 : 1;
}
