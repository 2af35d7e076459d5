#pragma once

// Rewriting a module so that its code and its scheme are isomorphic.
//
// All generated code lives in one section placed right after the scheme
// block and delimited by its own markers. Inside it, every class region is
// introduced by a one-line class marker that carries the canonical text of
// the class definition; extract_scheme() reads the scheme back from those.
// User blocks bound to generation points are relocated into the section,
// stale ones are turned into line comments, and module-level blocks (keys
// whose first segment is empty, such as `$$include`) are left in place.

#include "templet/parser.hpp"
#include "templet/printer.hpp"
#include "templet/semantic.hpp"
#include "templet/source_model.hpp"
#include "templet/templates.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace templet {

struct MapOptions {
    std::string section_begin = "/*templet@generated*/";
    std::string section_end = "/*templet@end*/";
    std::string class_marker_open = "/*templet@class ";
    std::string class_marker_close = "*/";
    std::string line_comment = "//";
    std::string orphan_tag = "templet-orphan";
};

struct GenerationPoint {
    std::string kind;
    std::string class_name;
    std::string member; // message, port or action; empty for class-level points
    const std::string* tpl = nullptr;
    TemplateContext context;
    std::optional<UserKey> key;
    std::string canonical; // channel_open / process_open only

    std::string id() const { return member.empty() ? kind + ":" + class_name : kind + ":" + class_name + "." + member; }
};

struct GenerationPlan {
    std::vector<GenerationPoint> points;
    Diagnostics diagnostics;

    std::vector<UserKey> keys() const
    {
        std::vector<UserKey> out;
        for (const auto& p : points)
            if (p.key) out.push_back(*p.key);
        return out;
    }
};

namespace detail {

inline std::string c_ident(std::string_view s)
{
    std::string out(s);
    for (char& c : out)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) c = '_';
    return out;
}

inline std::string suffix(PortSide side) { return side == PortSide::Server ? "_server" : "_client"; }

inline std::string label_of(const std::optional<std::string>& action)
{
    return action ? c_ident(*action) + "_label" : "END";
}

class Planner {
public:
    Planner(const ResolvedScheme& r, const TemplateSet& t) : r_(r), t_(t) {}

    GenerationPlan run()
    {
        for (auto kind : kPointKinds)
            if (!t_.base.count(std::string(kind)))
                throw Error("MissingTemplate", "no template for generation point '" + std::string(kind) + "'");

        add("module_header", "", "", {}, {});
        for (std::size_t i = 0; i < r_.classes.size(); ++i) {
            std::string canonical = print_class(r_.source.classes[i]);
            if (auto c = std::get_if<ResolvedChannel>(&r_.classes[i]))
                channel(*c, canonical);
            else
                process(std::get<ResolvedProcess>(r_.classes[i]), canonical);
        }

        TemplateContext net;
        for (const auto& c : r_.classes) {
            bool is_channel = std::holds_alternative<ResolvedChannel>(c);
            const std::string& name = is_channel ? std::get<ResolvedChannel>(c).name : std::get<ResolvedProcess>(c).name;
            net.lists[is_channel ? "channels" : "processes"].push_back({{"class", name}, {"class_ident", c_ident(name)}});
        }
        net.lists.try_emplace("channels");
        net.lists.try_emplace("processes");
        add("network_main", "", "", {}, std::move(net));
        return std::move(plan_);
    }

private:
    void check_params(const std::string& cls, const std::vector<std::string>& params, Position pos)
    {
        for (const auto& p : params)
            if (!t_.knows_param(p))
                plan_.diagnostics.push_back({Severity::Warning, "UnknownParam",
                                             "no templates for parameter '" + p + "' of class '" + cls +
                                                 "'; using the default mapping",
                                             pos});
    }

    TemplateContext class_context(const std::string& cls)
    {
        TemplateContext ctx;
        ctx.values["class"] = cls;
        ctx.values["class_ident"] = c_ident(cls);
        return ctx;
    }

    void add(std::string kind, const std::string& cls, std::string member, const std::vector<std::string>& params,
             TemplateContext ctx, UserKey key = {}, std::string canonical = {})
    {
        GenerationPoint p;
        p.kind = std::move(kind);
        p.class_name = cls;
        p.member = std::move(member);
        p.tpl = t_.select(p.kind, params);
        p.context = std::move(ctx);
        if (mentions_user_block(*p.tpl)) p.key = std::move(key);
        p.canonical = std::move(canonical);
        plan_.points.push_back(std::move(p));
    }

    void channel(const ResolvedChannel& c, const std::string& canonical)
    {
        check_params(c.name, c.params, c.pos);
        auto ctx = class_context(c.name);
        for (const auto& p : c.params) ctx.lists["params"].push_back({{"param", p}});
        ctx.lists.try_emplace("params");
        add("channel_open", c.name, "", c.params, ctx, {c.name, ""}, canonical);
        for (const auto& [m, info] : c.messages) {
            auto mctx = class_context(c.name);
            mctx.values["message"] = m;
            mctx.values["direction"] = std::string(to_string(info.direction));
            mctx.values["sender_suffix"] = info.direction == Direction::Question ? "_client" : "_server";
            add("message_group", c.name, m, c.params, std::move(mctx), {c.name, m});
        }
        add("channel_close", c.name, "", c.params, class_context(c.name));
    }

    std::vector<Bindings> arg_list(const ResolvedProcess& p, const Call& call, std::optional<ArgMode> only)
    {
        std::vector<Bindings> out;
        for (const auto& a : call.args) {
            if (only && a.mode != *only) continue;
            const ResolvedPort* port = p.find_port(a.port);
            out.push_back({{"port", a.port},
                           {"message", a.message},
                           {"mode", a.mode == ArgMode::Read ? "read" : "write"},
                           {"channel_type", port ? c_ident(port->def.channel) : ""},
                           {"side_suffix", port ? suffix(port->side()) : ""}});
        }
        return out;
    }

    void process(const ResolvedProcess& p, const std::string& canonical)
    {
        check_params(p.name, p.params, p.pos);
        add("process_open", p.name, "", p.params, class_context(p.name), {p.name, ""}, canonical);

        auto port_context = [&](const ResolvedPort& port) {
            auto ctx = class_context(p.name);
            ctx.values["port"] = port.name();
            ctx.values["channel_type"] = c_ident(port.def.channel);
            ctx.values["side_suffix"] = suffix(port.side());
            ctx.values["default_label"] = port.def.default_action ? label_of(port.def.default_action) : "UNKNOWN";
            auto& rules = ctx.lists["rules"];
            for (const auto& [m, action] : port.dispatch)
                rules.push_back({{"message", m}, {"action", action}, {"action_ident", c_ident(action)}});
            return ctx;
        };
        auto action_context = [&](const RegularAction& a) {
            auto ctx = class_context(p.name);
            ctx.values["action"] = a.id;
            ctx.values["action_ident"] = c_ident(a.id);
            ctx.values["function"] = a.call.name;
            ctx.values["success_label"] = label_of(a.on_success);
            ctx.values["failure_label"] = label_of(a.on_failure);
            ctx.lists["args"] = arg_list(p, a.call, std::nullopt);
            ctx.lists["reads"] = arg_list(p, a.call, ArgMode::Read);
            ctx.lists["writes"] = arg_list(p, a.call, ArgMode::Write);
            return ctx;
        };

        for (const auto& port : p.ports) add("port_group", p.name, port.name(), p.params, port_context(port), {p.name, port.name()});
        for (const auto& a : p.regular_actions) add("action_group", p.name, a.id, p.params, action_context(a), {p.name, a.id});
        if (!p.ports.empty() || !p.regular_actions.empty()) {
            add("recv_open", p.name, "", p.params, class_context(p.name));
            for (const auto& port : p.ports) add("recv_port_case", p.name, port.name(), p.params, port_context(port));
            for (const auto& a : p.regular_actions) add("recv_action_case", p.name, a.id, p.params, action_context(a));
            add("recv_close", p.name, "", p.params, class_context(p.name));
        }
        add("process_close", p.name, "", p.params, class_context(p.name));
    }

    const ResolvedScheme& r_;
    const TemplateSet& t_;
    GenerationPlan plan_;
};

/// A module flattened into text and user-block pieces, with generated
/// sections cut out.
struct Piece {
    bool user = false;
    std::string text;
    UserKey key;
    Span span;
};

struct Split {
    std::vector<Piece> before; // pieces preceding the scheme block
    Block scheme;
    std::vector<Piece> after;
    std::vector<Piece> from_sections; // user blocks that lived inside generated sections
    std::size_t sections = 0;
    std::vector<std::string> section_text; // base text inside sections, per section
};

inline Split split_sections(const SourceModule& m, const MapOptions& opt)
{
    Split out;
    bool seen_scheme = false;
    bool inside = false;
    Position where;
    auto sink = [&]() -> std::vector<Piece>& { return seen_scheme ? out.after : out.before; };
    auto add_text = [&](std::string_view t) {
        if (t.empty()) return;
        auto& dst = sink();
        if (!dst.empty() && !dst.back().user)
            dst.back().text += t;
        else
            dst.push_back({false, std::string(t), {}, {}});
    };

    for (const auto& b : m.blocks) {
        if (b.kind == BlockKind::SchemeBlock) {
            if (inside) throw Error("InconsistentModule", "scheme block inside a generated section");
            out.scheme = b;
            seen_scheme = true;
            continue;
        }
        if (b.kind == BlockKind::UserBlock) {
            Piece p{true, b.text, b.key, b.span};
            (inside ? out.from_sections : sink()).push_back(std::move(p));
            continue;
        }
        std::string_view t = b.text;
        while (!t.empty()) {
            if (!inside) {
                auto at = t.find(opt.section_begin);
                if (at == std::string_view::npos) {
                    add_text(t);
                    break;
                }
                add_text(t.substr(0, at));
                t.remove_prefix(at + opt.section_begin.size());
                inside = true;
                ++out.sections;
                out.section_text.emplace_back();
            } else {
                auto at = t.find(opt.section_end);
                if (at == std::string_view::npos) {
                    out.section_text.back() += t;
                    break;
                }
                out.section_text.back() += t.substr(0, at);
                t.remove_prefix(at + opt.section_end.size());
                inside = false;
            }
        }
    }
    if (inside) throw Error("InconsistentModule", "generated section is not closed by '" + opt.section_end + "'");
    return out;
}

inline bool module_level(const UserKey& key) { return !key.empty() && key.front().empty(); }

inline std::string orphan_comment(const Piece& p, const MapOptions& opt)
{
    std::string out = opt.line_comment + opt.orphan_tag + " " + join_key(p.key);
    std::vector<std::string_view> lines;
    std::string_view t = p.text;
    std::size_t start = 0;
    for (;;) {
        auto nl = t.find('\n', start);
        lines.push_back(t.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    if (!lines.empty() && lines.front().empty()) lines.erase(lines.begin());
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    for (auto line : lines) {
        out += '\n';
        out += opt.line_comment;
        if (!line.empty()) {
            out += ' ';
            out += line;
        }
    }
    return out;
}

class ModuleBuilder {
public:
    explicit ModuleBuilder(const SignatureSet& sig) { m_.signatures = sig; }

    void text(std::string_view t)
    {
        if (t.empty()) return;
        if (!m_.blocks.empty() && m_.blocks.back().kind == BlockKind::BaseText)
            m_.blocks.back().text += t;
        else
            m_.blocks.push_back({BlockKind::BaseText, std::string(t), {}, {}});
    }
    void block(Block b) { m_.blocks.push_back(std::move(b)); }
    void user(const UserKey& key, std::string content)
    {
        m_.blocks.push_back({BlockKind::UserBlock, std::move(content), key, {}});
    }

    SourceModule finish()
    {
        reflow_spans(m_);
        return std::move(m_);
    }

private:
    SourceModule m_;
};

inline void check_markers(std::string_view generated, const SignatureSet& sig, const std::string& where)
{
    for (const std::string* marker : {&sig.scheme_prefix, &sig.scheme_postfix, &sig.user_prefix_open, &sig.user_postfix})
        if (generated.find(*marker) != std::string_view::npos)
            throw Error("MarkerCollision", "generated text for " + where + " contains the marker '" + *marker + "'");
}

} // namespace detail

/// Ordered generation points. Throws Error("MissingTemplate").
inline GenerationPlan plan(const ResolvedScheme& r, const TemplateSet& t)
{
    return detail::Planner(r, t).run();
}

/// Throws Error with code DuplicateUserBlockKey, InconsistentModule,
/// MissingTemplate or MarkerCollision.
inline SourceModule map_module(const SourceModule& m, const ResolvedScheme& r, const TemplateSet& t,
                               const MapOptions& opt = {})
{
    GenerationPlan gp = plan(r, t);
    detail::Split split = detail::split_sections(m, opt);

    std::set<UserKey> planned;
    for (const auto& k : gp.keys()) planned.insert(k);

    std::map<UserKey, std::string> contents;
    auto claim = [&](const detail::Piece& p) {
        if (!contents.emplace(p.key, p.text).second)
            throw Error("DuplicateUserBlockKey", "two user blocks claim '" + join_key(p.key) + "'",
                        detail::position_at(render(m), p.span.begin));
    };
    for (const auto* pieces : {&split.before, &split.after, &split.from_sections})
        for (const auto& p : *pieces)
            if (p.user && planned.count(p.key)) claim(p);

    const SignatureSet& sig = m.signatures;
    detail::ModuleBuilder out(sig);
    auto emit_pieces = [&](const std::vector<detail::Piece>& pieces) {
        for (const auto& p : pieces) {
            if (!p.user)
                out.text(p.text);
            else if (planned.count(p.key))
                continue;
            else if (detail::module_level(p.key))
                out.user(p.key, p.text);
            else
                out.text(detail::orphan_comment(p, opt));
        }
    };

    emit_pieces(split.before);
    out.block(split.scheme);

    out.text("\n" + opt.section_begin + "\n");
    for (const auto& point : gp.points) {
        if (!point.canonical.empty()) {
            std::string marker = opt.class_marker_open + point.canonical + opt.class_marker_close + "\n";
            detail::check_markers(marker, sig, point.id());
            out.text(marker);
        }
        Expansion e = expand(*point.tpl, point.context);
        std::string_view head = std::string_view(e.text).substr(0, e.slot.value_or(e.text.size()));
        detail::check_markers(e.text, sig, point.id());
        out.text(head);
        if (e.slot) {
            auto it = contents.find(*point.key);
            out.user(*point.key, it == contents.end() ? std::string() : it->second);
            out.text(std::string_view(e.text).substr(*e.slot));
        }
    }
    out.text(opt.section_end);

    for (const auto& p : split.from_sections) {
        if (planned.count(p.key)) continue;
        if (detail::module_level(p.key)) {
            out.text("\n");
            out.user(p.key, p.text);
        } else {
            out.text("\n" + detail::orphan_comment(p, opt));
        }
    }

    // a previous mapping put a line break before its section; drop it so remapping is stable
    std::vector<detail::Piece> after = std::move(split.after);
    if (split.sections > 0 && !after.empty() && !after.front().user && after.front().text.starts_with('\n')) after.front().text.erase(0, 1);
    emit_pieces(after);
    return out.finish();
}

/// Rebuild the scheme from the class markers of the generated section and
/// check it against the scheme block. Throws Error("InconsistentModule").
inline Scheme extract_scheme(const SourceModule& m, const MapOptions& opt = {})
{
    detail::Split split = detail::split_sections(m, opt);
    if (split.sections != 1)
        throw Error("InconsistentModule", split.sections == 0 ? "module has no generated section"
                                                              : "module has more than one generated section");
    Scheme extracted;
    std::string_view text = split.section_text.front();
    std::size_t at = 0;
    while ((at = text.find(opt.class_marker_open, at)) != std::string_view::npos) {
        std::size_t start = at + opt.class_marker_open.size();
        std::size_t eol = text.find('\n', start);
        std::string_view line = text.substr(start, eol == std::string_view::npos ? std::string_view::npos : eol - start);
        if (!line.ends_with(opt.class_marker_close))
            throw Error("InconsistentModule", "malformed class marker in generated section");
        line.remove_suffix(opt.class_marker_close.size());
        Scheme one;
        try {
            one = parse_scheme(line);
        } catch (const SyntaxError& e) {
            throw Error("InconsistentModule", std::string("class marker does not parse: ") + e.what());
        }
        if (one.classes.size() != 1) throw Error("InconsistentModule", "class marker must hold exactly one class");
        extracted.classes.push_back(std::move(one.classes.front()));
        at = start;
    }

    Scheme declared;
    try {
        declared = parse_scheme(split.scheme.text);
    } catch (const SyntaxError& e) {
        throw Error("InconsistentModule", std::string("scheme block does not parse: ") + e.what());
    }
    if (!(declared == extracted))
        throw Error("InconsistentModule", "generated code does not match the module scheme");
    return extracted;
}

} // namespace templet
