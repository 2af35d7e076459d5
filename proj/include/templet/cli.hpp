#pragma once

// `templet` command line: check, map, graph, run.
//
// Exit codes: 0 success, 1 language-level failure (scheme, syntax, semantic,
// mapping or run failure), 2 environment failure (I/O, configuration).
// Diagnostics go to the error stream only.

#include "templet/bundled.hpp"
#include "templet/graph_export.hpp"
#include "templet/mapper.hpp"
#include "templet/parser.hpp"
#include "templet/semantic.hpp"
#include "templet/source_model.hpp"
#include "templet/templates.hpp"
#include "templet/trace_io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace templet::cli {

inline constexpr int kOk = 0;
inline constexpr int kLanguageError = 1;
inline constexpr int kEnvironmentError = 2;

inline constexpr std::string_view kConfigFile = ".templetrc";
inline constexpr std::string_view kTemplatesEnv = "TEMPLET_TEMPLATES";

/// Settings from `.templetrc` (key=value lines, '#' starts a comment).
struct Config {
    SignatureSet signatures;
    std::optional<std::string> templates;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> trace;
};

/// Environment-level failure (exit code 2).
class EnvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline Config parse_config(std::string_view text, const std::string& origin = std::string(kConfigFile))
{
    Config c;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos) throw EnvError(origin + ":" + std::to_string(n) + ": expected key=value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key == "scheme_prefix") c.signatures.scheme_prefix = value;
        else if (key == "scheme_postfix") c.signatures.scheme_postfix = value;
        else if (key == "user_prefix_open") c.signatures.user_prefix_open = value;
        else if (key == "user_prefix_close") c.signatures.user_prefix_close = value;
        else if (key == "user_postfix") c.signatures.user_postfix = value;
        else if (key == "templates") c.templates = value;
        else if (key == "out") c.out = value;
        else if (key == "trace") c.trace = value;
        else if (key == "seed") {
            try {
                if (value.empty() || value.front() == '-' || value.front() == '+') throw std::invalid_argument(value);
                std::size_t used = 0;
                c.seed = std::stoull(value, &used);
                if (used != value.size()) throw std::invalid_argument(value);
            } catch (const std::exception&) {
                throw EnvError(origin + ":" + std::to_string(n) + ": seed must be an unsigned integer");
            }
        } else {
            throw EnvError(origin + ":" + std::to_string(n) + ": unknown key '" + key + "'");
        }
    }
    try {
        validate(c.signatures);
    } catch (const Error& e) {
        throw EnvError(origin + ": " + e.what());
    }
    return c;
}

inline std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) throw EnvError("cannot read '" + p.string() + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void write_file(const std::filesystem::path& p, std::string_view text)
{
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw EnvError("cannot write '" + p.string() + "'");
    out << text;
    if (!out) throw EnvError("cannot write '" + p.string() + "'");
}

/// `.templetrc` next to `input`, if present. Relative paths in it are
/// taken relative to the directory holding it.
inline Config load_config(const std::filesystem::path& input)
{
    auto rc = input.parent_path() / kConfigFile;
    std::error_code ec;
    if (!std::filesystem::is_regular_file(rc, ec)) return {};
    Config c = parse_config(read_file(rc), rc.string());
    for (auto* p : {&c.templates, &c.out, &c.trace})
        if (*p && std::filesystem::path(**p).is_relative()) **p = (input.parent_path() / **p).string();
    return c;
}

/// A scanned, parsed and analysed input file.
struct Loaded {
    std::string text;
    SourceModule module;
    Resolution resolution;
};

class App {
public:
    App(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

    int check(const std::string& file, bool strict)
    {
        return guard([&] {
            auto loaded = load(file);
            if (!loaded) return kLanguageError;
            bool warned = false;
            for (const auto& d : loaded->resolution.diagnostics) warned |= d.severity == Severity::Warning;
            return has_errors(loaded->resolution.diagnostics) || (strict && warned) ? kLanguageError : kOk;
        });
    }

    int map(const std::string& file, const std::string& templates, bool in_place, const std::string& out_path)
    {
        return guard([&] {
            auto loaded = load(file);
            if (!loaded || has_errors(loaded->resolution.diagnostics)) return kLanguageError;
            TemplateSet t = template_set(templates);
            GenerationPlan gp = plan(loaded->resolution.scheme, t);
            print(gp.diagnostics);
            SourceModule mapped = map_module(loaded->module, loaded->resolution.scheme, t);
            std::string text = render(mapped);
            std::string dest = in_place ? file : !out_path.empty() ? out_path : config_.out.value_or("");
            if (dest.empty())
                out_ << text;
            else
                write_file(dest, text);
            return kOk;
        });
    }

    int graph(const std::string& file, const std::string& cls, const std::string& out_path)
    {
        return guard([&] {
            auto loaded = load(file);
            if (!loaded || has_errors(loaded->resolution.diagnostics)) return kLanguageError;
            std::string text;
            bool found = cls.empty();
            for (const auto& c : loaded->resolution.scheme.classes) {
                const bool is_channel = std::holds_alternative<ResolvedChannel>(c);
                const std::string& name =
                    is_channel ? std::get<ResolvedChannel>(c).name : std::get<ResolvedProcess>(c).name;
                if (!cls.empty() && name != cls) continue;
                found = true;
                text += is_channel ? channel_graph(std::get<ResolvedChannel>(c)).dot
                                   : process_graph(std::get<ResolvedProcess>(c)).dot;
            }
            if (!found) {
                err_ << file << ": error UnknownClass no class named '" << cls << "'\n";
                return kLanguageError;
            }
            if (out_path.empty())
                out_ << text;
            else
                write_file(out_path, text);
            return kOk;
        });
    }

    int run(const std::string& target, std::optional<std::uint64_t> seed, const std::vector<std::string>& inputs,
            const std::string& trace_path, const std::string& trace_format)
    {
        return guard([&]() -> int {
            const bundled::Example* ex = bundled::find_example(target);
            if (!ex) {
                std::error_code ec;
                if (!std::filesystem::exists(target, ec)) {
                    err_ << target << ": error UnknownExample no bundled example or file named '" << target << "'\n";
                    return kLanguageError;
                }
                auto loaded = load(target);
                if (!loaded || has_errors(loaded->resolution.diagnostics)) return kLanguageError;
                ex = bundled::find_example(loaded->resolution.scheme.source);
                if (!ex) {
                    err_ << target
                         << ": error UnboundNetwork the scheme matches no bundled example; register callbacks "
                            "through the library to run it\n";
                    return kLanguageError;
                }
            }
            std::map<std::string, std::string> values;
            for (const auto& kv : inputs) {
                auto eq = kv.find('=');
                if (eq == std::string::npos) {
                    err_ << "error BadInput expected key=value, got '" << kv << "'\n";
                    return kLanguageError;
                }
                values[kv.substr(0, eq)] = kv.substr(eq + 1);
            }
            bundled::RunOutcome r = ex->run(values, seed.value_or(config_.seed.value_or(1)));
            for (const auto& line : r.report) out_ << line << '\n';
            out_ << "halt: " << r.trace.halt_reason() << '\n';

            std::string path = !trace_path.empty() ? trace_path : config_.trace.value_or("");
            if (!path.empty()) {
                bool json = trace_format == "json" ||
                            (trace_format.empty() && std::filesystem::path(path).extension() == ".json");
                write_file(path, json ? to_json(r.trace).dump(2) + "\n" : to_text(r.trace));
            }
            if (r.trace.halt_reason() != halt::queue_empty) {
                err_ << target << ": error RunHalted " << r.trace.halt_reason();
                if (!r.trace.halt().detail.empty()) err_ << ": " << r.trace.halt().detail;
                err_ << '\n';
                return kLanguageError;
            }
            return kOk;
        });
    }

private:
    template <class F>
    int guard(F&& body)
    {
        try {
            return body();
        } catch (const EnvError& e) {
            err_ << "error: " << e.what() << '\n';
            return kEnvironmentError;
        } catch (const Error& e) {
            err_ << format(e.diagnostic(), file_) << '\n';
            return e.code() == "TemplateDirectory" ? kEnvironmentError : kLanguageError;
        }
    }

    void print(const Diagnostics& ds)
    {
        for (const auto& d : ds) err_ << format(d, file_) << '\n';
    }

    std::optional<Loaded> load(const std::string& file)
    {
        file_ = file;
        Loaded l;
        std::error_code ec;
        const bundled::Example* ex = std::filesystem::exists(file, ec) ? nullptr : bundled::find_example(file);
        if (ex) {
            config_ = {};
            l.text = bundled::as_module(*ex, config_.signatures);
        } else {
            config_ = load_config(file);
            l.text = read_file(file);
        }
        try {
            l.module = scan(l.text, config_.signatures);
            Position origin = scheme_origin(l.module, l.text);
            l.resolution = analyze(parse_scheme(l.module.scheme_block().text, origin));
        } catch (const Error& e) {
            print({e.diagnostic()});
            return std::nullopt;
        }
        print(l.resolution.diagnostics);
        return l;
    }

    TemplateSet template_set(const std::string& flag)
    {
        std::string dir = flag;
        if (dir.empty())
            if (const char* env = std::getenv(std::string(kTemplatesEnv).c_str()); env && *env) dir = env;
        if (dir.empty()) dir = config_.templates.value_or("");
        if (dir.empty()) return default_templates();
        try {
            TemplateSet t = default_templates();
            TemplateSet loaded = load_templates(dir);
            for (auto& [k, v] : loaded.base) t.base[k] = std::move(v);
            for (auto& [k, v] : loaded.variants) t.variants[k] = std::move(v);
            return t;
        } catch (const Error& e) {
            if (e.code() == "TemplateDirectory") throw EnvError(e.what());
            throw;
        }
    }

    std::ostream& out_;
    std::ostream& err_;
    std::string file_;
    Config config_;
};

/// Parses `args` (without the program name) and dispatches.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"templet: check, map, graph and run marked concurrent-program modules", "templet"};
    app.require_subcommand(1);

    std::string file, templates, out_path, cls, trace_path, trace_format;
    bool strict = false, in_place = false;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> inputs;

    auto* check = app.add_subcommand("check", "scan, parse and validate a module");
    check->add_option("file", file, "marked source file")->required();
    check->add_flag("--strict", strict, "treat warnings as errors");

    auto* map = app.add_subcommand("map", "rewrite a module into skeleton form");
    map->add_option("file", file, "marked source file")->required();
    map->add_option("--templates", templates, "template directory");
    auto* in_place_flag = map->add_flag("--in-place", in_place, "rewrite the input file");
    map->add_option("--out", out_path, "output file")->excludes(in_place_flag);

    auto* graph = app.add_subcommand("graph", "emit DOT graphs for classes");
    graph->add_option("file", file, "marked source file")->required();
    graph->add_option("--class", cls, "only this class");
    graph->add_option("--out", out_path, "output file");

    auto* run = app.add_subcommand("run", "execute a bundled example network");
    run->add_option("target", file, "bundled example name or a file with a matching scheme")->required();
    run->add_option("--seed", seed, "scheduler seed (unsigned 64-bit)");
    run->add_option("--input", inputs, "input value key=value")->allow_extra_args(false);
    run->add_option("--trace", trace_path, "write the trace to this file");
    run->add_option("--trace-format", trace_format, "text or json")->check(CLI::IsMember({"text", "json"}));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kEnvironmentError;
    }

    App a(out, err);
    if (*check) return a.check(file, strict);
    if (*map) return a.map(file, templates, in_place, out_path);
    if (*graph) return a.graph(file, cls, out_path);
    return a.run(file, seed, inputs, trace_path, trace_format);
}

} // namespace templet::cli
