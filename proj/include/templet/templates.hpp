#pragma once

// Text templates for skeleton generation.
//
// Syntax: `{{name}}` substitutes a binding, `{{#each list}}...{{/each}}`
// repeats its body per list item (item bindings shadow outer ones; `sep`
// and `and` expand to "" on the first item and ", " / " && " afterwards),
// and `{{user_block}}` marks where the point's user block is placed.

#include "templet/diagnostics.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace templet {

inline constexpr std::string_view kPointKinds[] = {
    "module_header", "channel_open",     "message_group", "channel_close",    "process_open",
    "port_group",    "action_group",     "recv_open",     "recv_port_case",   "recv_action_case",
    "recv_close",    "process_close",    "network_main",
};

inline bool is_point_kind(std::string_view kind)
{
    for (auto k : kPointKinds)
        if (k == kind) return true;
    return false;
}

inline constexpr std::string_view kUserBlockPlaceholder = "user_block";

using Bindings = std::map<std::string, std::string>;

struct TemplateContext {
    Bindings values;
    std::map<std::string, std::vector<Bindings>> lists;
};

/// Expanded template text; `slot` is the byte offset of `{{user_block}}`.
struct Expansion {
    std::string text;
    std::optional<std::size_t> slot;
};

struct TemplateSet {
    std::map<std::string, std::string> base;                                 // kind -> text
    std::map<std::pair<std::string, std::string>, std::string> variants;   // (kind, param) -> text

    /// Variant for the first param that has one, else the base template.
    const std::string* select(std::string_view kind, const std::vector<std::string>& params) const
    {
        for (const auto& p : params) {
            auto it = variants.find({std::string(kind), p});
            if (it != variants.end()) return &it->second;
        }
        auto it = base.find(std::string(kind));
        return it == base.end() ? nullptr : &it->second;
    }

    bool knows_param(std::string_view param) const
    {
        for (const auto& [key, text] : variants)
            if (key.second == param) return true;
        return false;
    }

    friend bool operator==(const TemplateSet&, const TemplateSet&) = default;
};

namespace detail {

inline void expand_into(std::string_view tpl, const TemplateContext& ctx, const Bindings* item, Expansion& out,
                        bool in_loop)
{
    std::size_t i = 0;
    while (i < tpl.size()) {
        auto open = tpl.find("{{", i);
        if (open == std::string_view::npos) {
            out.text.append(tpl.substr(i));
            return;
        }
        out.text.append(tpl.substr(i, open - i));
        auto close = tpl.find("}}", open + 2);
        if (close == std::string_view::npos) throw Error("TemplateSyntax", "unterminated '{{' in template");
        std::string_view tag = tpl.substr(open + 2, close - open - 2);
        i = close + 2;

        if (tag.starts_with("#each ")) {
            std::string list(tag.substr(6));
            auto end = tpl.find("{{/each}}", i);
            if (end == std::string_view::npos) throw Error("TemplateSyntax", "'{{#each " + list + "}}' without '{{/each}}'");
            if (in_loop) throw Error("TemplateSyntax", "nested '{{#each}}' is not supported");
            auto it = ctx.lists.find(list);
            if (it == ctx.lists.end()) throw Error("UnknownPlaceholder", "unknown list '" + list + "' in template");
            std::string_view body = tpl.substr(i, end - i);
            for (std::size_t n = 0; n < it->second.size(); ++n) {
                Bindings b = it->second[n];
                b.emplace("sep", n ? ", " : "");
                b.emplace("and", n ? " && " : "");
                expand_into(body, ctx, &b, out, true);
            }
            i = end + std::string_view("{{/each}}").size();
            continue;
        }
        if (tag == "/each") throw Error("TemplateSyntax", "'{{/each}}' without '{{#each}}'");
        if (tag == kUserBlockPlaceholder) {
            if (in_loop) throw Error("TemplateSyntax", "'{{user_block}}' inside '{{#each}}'");
            if (out.slot) throw Error("TemplateSyntax", "template has more than one '{{user_block}}'");
            out.slot = out.text.size();
            continue;
        }
        std::string name(tag);
        if (item) {
            if (auto it = item->find(name); it != item->end()) {
                out.text += it->second;
                continue;
            }
        }
        auto it = ctx.values.find(name);
        if (it == ctx.values.end()) throw Error("UnknownPlaceholder", "unknown placeholder '{{" + name + "}}'");
        out.text += it->second;
    }
}

} // namespace detail

inline Expansion expand(std::string_view tpl, const TemplateContext& ctx)
{
    Expansion out;
    detail::expand_into(tpl, ctx, nullptr, out, false);
    return out;
}

inline bool mentions_user_block(std::string_view tpl)
{
    return tpl.find("{{user_block}}") != std::string_view::npos;
}

/// Load `<kind>.tpl` and `<kind>.<param>.tpl` files from `dir`.
inline TemplateSet load_templates(const std::filesystem::path& dir)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw Error("TemplateDirectory", "not a template directory: " + dir.string());
    TemplateSet t;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".tpl") continue;
        std::string stem = entry.path().stem().string();
        std::string kind = stem, param;
        if (auto dot = stem.find('.'); dot != std::string::npos) {
            kind = stem.substr(0, dot);
            param = stem.substr(dot + 1);
        }
        if (!is_point_kind(kind)) throw Error("UnknownTemplate", "unknown generation point '" + kind + "' in " + entry.path().string());
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream text;
        text << in.rdbuf();
        if (param.empty())
            t.base[kind] = text.str();
        else
            t.variants[{kind, param}] = text.str();
    }
    return t;
}

/// Built-in template set, shaped after the classic marked-C++ runtime layout.
inline TemplateSet default_templates()
{
    TemplateSet t;
    t.base["module_header"] = "#include <templet.hpp>\n";
    t.base["channel_open"] = R"(
class {{class_ident}} : public BaseChannel {
public:
    {{class_ident}}(TempletProgram& p) : BaseChannel(p) {}
)";
    t.base["message_group"] = R"(
    struct {{message}} {
{{user_block}}
    };
    {{message}} {{message}}_get;
    bool {{message}}_read_client();
    bool {{message}}_write_client();
    bool {{message}}_read_server();
    bool {{message}}_write_server();
    void {{message}}_send{{sender_suffix}}();
)";
    t.base["channel_close"] = "};\n";
    t.base["process_open"] = R"(
class {{class_ident}} : public BaseProcess {
public:
)";
    t.variants[{"process_open", "function"}] = R"(
void {{class_ident}}(){
{{user_block}}
}
)";
    t.variants[{"process_close", "function"}] = "";
    t.base["port_group"] = R"(
    bool {{port}}_bind{{side_suffix}}({{channel_type}}* c);
    void {{port}}_call({{channel_type}}* c){
{{user_block}}
    }
    {{channel_type}}* {{port}}_port;
)";
    t.base["action_group"] = R"(
    bool {{action_ident}}_call({{#each args}}{{sep}}{{channel_type}}::{{message}}* {{port}}_{{message}}{{/each}}){
{{user_block}}
    }
)";
    t.base["recv_open"] = R"(
    void recv(BaseChannel* c){
        int sel = c->selector;
        bool res;
        for(;;) switch(sel){
)";
    t.base["recv_port_case"] = R"(            case {{port}}_label:
            {
                {{channel_type}}* _c = static_cast<{{channel_type}}*>(c);
                {{port}}_call(_c);
                {{port}}_port = _c;
                sel = UNKNOWN;
{{#each rules}}                if(_c->{{message}}_read{{side_suffix}}()) sel = {{action_ident}}_label; else
{{/each}}                sel = {{default_label}};
                assert(sel != UNKNOWN);
                break;
            }
)";
    t.base["recv_action_case"] = R"(            case {{action_ident}}_label:
            {
                res = {{#each args}}{{and}}{{port}}_port->{{message}}_{{mode}}{{side_suffix}}(){{/each}};
                if(res) res = {{action_ident}}_call({{#each args}}{{sep}}&{{port}}_port->{{message}}_get{{/each}});
                if(res){ {{#each writes}}{{port}}_port->{{message}}_send{{side_suffix}}(); {{/each}}}
                if(res) sel = {{success_label}}; else sel = {{failure_label}};
                break;
            }
)";
    t.base["recv_close"] = R"(            default: return;
        }
    }
)";
    t.base["process_close"] = "};\n";
    t.base["network_main"] = R"(
{{#each channels}}// channel {{class}}
{{/each}}{{#each processes}}// process {{class}}
{{/each}})";
    return t;
}

} // namespace templet
