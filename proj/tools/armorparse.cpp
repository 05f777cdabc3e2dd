// Command-line front end: grammar checking, parsing, unparsing, template
// rendering, round-trip fuzzing, and payload testing.
//
// Exit codes: 0 clean, 1 findings (validation errors, parse failures, fuzz
// violations, payload failures), 2 usage or load errors.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <armorparse/armorparse.hpp>

namespace ap = armorparse;

namespace {

struct Common {
    std::vector<std::string> grammars;
    std::string manifest;
    std::vector<std::string> mutations;
};

void add_common(CLI::App* cmd, Common& c, bool with_mutate = true) {
    cmd->add_option("-g,--grammar", c.grammars,
                    "grammar file; repeatable, first one is the root")
        ->required()
        ->type_size(1)->allow_extra_args(false);
    cmd->add_option("-m,--manifest", c.manifest,
                    "composition manifest binding subparser tokens");
    if (with_mutate)
        cmd->add_option(
               "--mutate", c.mutations,
               "table mutation (drop-rule:TOKEN:C, swap-escapes:TOKEN:A:B, "
               "break-lead:TOKEN:C); repeatable, disables validation")
            ->type_size(1)->allow_extra_args(false);
}

int load_failure(const ap::Diagnostic& d) {
    std::cerr << "error: " << d.to_string() << "\n";
    return 2;
}

// Loads sources, applies mutations, compiles. Mutated grammars compile
// without validation so the defect survives into the toolchain.
ap::Result<ap::CompositionSet> build(const Common& c,
                                     ap::Diagnostics* diags = nullptr) {
    auto src = ap::load_sources(c.grammars, c.manifest);
    if (!src) return src.forward<ap::CompositionSet>();
    auto sources = src.take();
    for (const auto& spec : c.mutations) {
        auto m = ap::parse_mutation(spec);
        if (!m) return m.forward<ap::CompositionSet>();
        ap::Grammar* owner = nullptr;
        for (auto& g : sources.grammars)
            if (g.table(m.value().token)) owner = &g;
        if (!owner)
            return ap::Result<ap::CompositionSet>::fail(
                "mutation-unknown",
                "no loaded grammar has an encode table for token " +
                    m.value().token);
        auto mutated = ap::apply_mutation(*owner, m.value());
        if (!mutated) return mutated.forward<ap::CompositionSet>();
        *owner = mutated.take();
    }
    return ap::build_set(std::move(sources), c.mutations.empty(), diags);
}

ap::Result<std::string> read_input(const std::string& path) {
    if (path == "-") {
        std::ostringstream buf;
        buf << std::cin.rdbuf();
        return buf.str();
    }
    return ap::read_file(path);
}

int write_output(const std::string& path, const std::string& data) {
    if (path.empty() || path == "-") {
        std::cout << data;
        return 0;
    }
    std::ofstream out(path, std::ios::binary);
    out << data;
    if (!out) {
        std::cerr << "error: cannot write " << path << "\n";
        return 2;
    }
    return 0;
}

int parse_depth_env(int fallback) {
    const char* v = std::getenv("ARMORPARSE_MAX_DEPTH");
    if (!v || !*v) return fallback;
    char* end = nullptr;
    long n = std::strtol(v, &end, 10);
    if (end && *end == '\0' && n > 0 && n < 1'000'000)
        return static_cast<int>(n);
    std::cerr << "warning: ignoring ARMORPARSE_MAX_DEPTH='" << v << "'\n";
    return fallback;
}

ap::Result<std::map<std::string, std::string>>
collect_bindings(const std::vector<std::string>& binds,
                 const std::string& bind_file) {
    using R = ap::Result<std::map<std::string, std::string>>;
    std::map<std::string, std::string> out;
    auto add = [&](std::string_view item) -> ap::Result<bool> {
        auto eq = item.find('=');
        if (eq == std::string_view::npos || eq == 0)
            return ap::Result<bool>::fail(
                "binding-syntax",
                "expected NAME=VALUE, got '" + std::string(item) + "'");
        auto value = ap::unescape_payload(item.substr(eq + 1));
        if (!value) return value.forward<bool>();
        out[std::string(item.substr(0, eq))] = value.take();
        return true;
    };
    for (const auto& b : binds) {
        auto ok = add(b);
        if (!ok) return ok.forward<std::map<std::string, std::string>>();
    }
    if (!bind_file.empty()) {
        auto text = ap::read_file(bind_file);
        if (!text) return text.forward<std::map<std::string, std::string>>();
        std::istringstream in(text.value());
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            auto ok = add(line);
            if (!ok) return ok.forward<std::map<std::string, std::string>>();
        }
    }
    return out;
}

int cmd_check(const Common& c, bool strict) {
    auto src = ap::load_sources(c.grammars, c.manifest);
    if (!src) return load_failure(src.error());
    auto sources = src.take();
    for (const auto& spec : c.mutations) {
        auto m = ap::parse_mutation(spec);
        if (!m) return load_failure(m.error());
        ap::Grammar* owner = nullptr;
        for (auto& g : sources.grammars)
            if (g.table(m.value().token)) owner = &g;
        if (!owner) {
            std::cerr << "error: no loaded grammar has an encode table for "
                      << "token " << m.value().token << "\n";
            return 2;
        }
        auto mutated = ap::apply_mutation(*owner, m.value());
        if (!mutated) return load_failure(mutated.error());
        *owner = mutated.take();
    }

    ap::Diagnostics all;
    for (const auto& g : sources.grammars) {
        ap::Diagnostics d = ap::validate_grammar(g);
        for (auto item : d.items()) {
            item.message = g.name + ": " + item.message;
            all.add(item);
        }
        if (strict) {
            for (const auto& t : g.tables) {
                ap::Diagnostics d2 =
                    ap::check_table_completeness(g, t.token, {});
                for (auto item : d2.items()) {
                    item.message = g.name + ": " + item.message;
                    all.add(item);
                }
            }
        }
    }
    if (!sources.manifest_text.empty()) {
        std::vector<const ap::Grammar*> raw;
        for (const auto& g : sources.grammars) raw.push_back(&g);
        auto m = ap::parse_manifest(sources.manifest_text, raw);
        if (!m) all.add(m.error());
    }

    for (const auto& d : all.items()) std::cout << d.to_string() << "\n";
    std::cout << (all.has_errors() ? "CHECK FAIL" : "CHECK OK") << " errors="
              << all.error_count() << " warnings="
              << (all.items().size() - all.error_count()) << "\n";
    return all.has_errors() ? 1 : 0;
}

int cmd_parse(const Common& c, const std::string& input,
              const std::string& out_path) {
    auto set = build(c);
    if (!set) return load_failure(set.error());
    auto text = read_input(input);
    if (!text) return load_failure(text.error());
    ap::ParseOptions opts;
    opts.max_depth = parse_depth_env(opts.max_depth);
    const std::string& root = set.value().all().front()->name();
    auto ast = ap::parse_document(set.value(), root, text.value(), opts);
    if (!ast) {
        std::cerr << "error: " << ast.error().to_string() << "\n";
        return 1;
    }
    return write_output(out_path, ap::ast_to_json(ast.value()).dump(2) + "\n");
}

int cmd_unparse(const Common& c, const std::string& input,
                const std::string& out_path) {
    auto set = build(c);
    if (!set) return load_failure(set.error());
    auto text = read_input(input);
    if (!text) return load_failure(text.error());
    nlohmann::json j = nlohmann::json::parse(text.value(), nullptr, false);
    if (j.is_discarded()) {
        std::cerr << "error: input is not valid JSON\n";
        return 2;
    }
    auto ast = ap::ast_from_json(j);
    if (!ast) return load_failure(ast.error());
    ap::UnparseOptions opts;
    opts.max_depth = parse_depth_env(opts.max_depth);
    const std::string& root = set.value().all().front()->name();
    auto doc = ap::unparse_document(set.value(), root, ast.value(), opts);
    if (!doc) {
        std::cerr << "error: " << doc.error().to_string() << "\n";
        return 1;
    }
    return write_output(out_path, doc.value());
}

int cmd_render(const Common& c, const std::string& template_path,
               const std::vector<std::string>& binds,
               const std::string& bind_file, const std::string& out_path) {
    auto set = build(c);
    if (!set) return load_failure(set.error());
    auto text = ap::read_file(template_path);
    if (!text) return load_failure(text.error());
    ap::ParseOptions popts;
    popts.max_depth = parse_depth_env(popts.max_depth);
    const std::string& root = set.value().all().front()->name();
    auto tpl = ap::load_template(set.value(), root, text.value(), popts);
    if (!tpl) return load_failure(tpl.error());
    auto bindings = collect_bindings(binds, bind_file);
    if (!bindings) return load_failure(bindings.error());
    ap::UnparseOptions uopts;
    uopts.max_depth = parse_depth_env(uopts.max_depth);
    auto doc =
        ap::render(set.value(), tpl.value(), bindings.value(), uopts);
    if (!doc) {
        std::cerr << "error: " << doc.error().to_string() << "\n";
        return 1;
    }
    return write_output(out_path, doc.value());
}

int cmd_fuzz(const Common& c, int cases, std::uint64_t seed, int max_depth,
             bool quiet) {
    auto set = build(c);
    if (!set) return load_failure(set.error());
    ap::FuzzOptions opts;
    opts.cases = cases;
    opts.seed = seed;
    opts.max_depth = max_depth;
    opts.verbose = !quiet;
    const std::string& root = set.value().all().front()->name();
    auto report = ap::fuzz_roundtrip(set.value(), root, opts, std::cout);
    return report.violations ? 1 : 0;
}

int cmd_attack(const Common& c, const std::string& template_path,
               const std::vector<std::string>& payload_paths) {
    auto set = build(c);
    if (!set) return load_failure(set.error());
    auto text = ap::read_file(template_path);
    if (!text) return load_failure(text.error());
    const std::string& root = set.value().all().front()->name();
    auto tpl = ap::load_template(set.value(), root, text.value());
    if (!tpl) return load_failure(tpl.error());
    std::vector<std::string> payloads;
    for (const auto& p : payload_paths) {
        auto file = ap::read_file(p);
        if (!file) return load_failure(file.error());
        auto lines = ap::load_payloads(file.value());
        if (!lines) return load_failure(lines.error());
        for (auto& l : lines.value()) payloads.push_back(std::move(l));
    }
    auto report =
        ap::attack_run(set.value(), tpl.value(), payloads, std::cout);
    return report.failures ? 1 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"grammar-driven encoding, parsing and unparsing"};
    app.require_subcommand(1);

    Common check_c;
    bool strict = false;
    auto* check = app.add_subcommand(
        "check", "validate grammars, tables and composition");
    add_common(check, check_c);
    check->add_flag("--strict", strict,
                    "also require every table to cover the working alphabet");

    Common parse_c;
    std::string parse_in = "-", parse_out;
    auto* parse =
        app.add_subcommand("parse", "parse a document to its AST (JSON)");
    add_common(parse, parse_c);
    parse->add_option("input", parse_in, "document file, or - for stdin");
    parse->add_option("-o,--out", parse_out, "output file (default stdout)");

    Common unparse_c;
    std::string unparse_in = "-", unparse_out;
    auto* unparse = app.add_subcommand(
        "unparse", "turn an AST (JSON) back into a document");
    add_common(unparse, unparse_c);
    unparse->add_option("input", unparse_in, "AST file, or - for stdin");
    unparse->add_option("-o,--out", unparse_out,
                        "output file (default stdout)");

    Common render_c;
    std::string tpl_path, bind_file, render_out;
    std::vector<std::string> binds;
    auto* render = app.add_subcommand(
        "render", "fill a template's markers and emit the document");
    add_common(render, render_c);
    render->add_option("-t,--template", tpl_path, "template file")->required();
    render->add_option("--bind", binds,
                       "NAME=VALUE marker binding (\\uHHHH escapes allowed); "
                       "repeatable")
        ->type_size(1)->allow_extra_args(false);
    render->add_option("--bind-file", bind_file,
                       "file with one NAME=VALUE binding per line");
    render->add_option("-o,--out", render_out, "output file (default stdout)");

    Common fuzz_c;
    int fuzz_cases = 200, fuzz_depth = 8;
    std::uint64_t fuzz_seed = 1;
    bool fuzz_quiet = false;
    auto* fuzz = app.add_subcommand(
        "fuzz", "random AST round-trip testing (unparse then parse)");
    add_common(fuzz, fuzz_c);
    fuzz->add_option("--cases", fuzz_cases, "number of cases (default 200)");
    fuzz->add_option("--seed", fuzz_seed, "RNG seed (default 1)");
    fuzz->add_option("--max-depth", fuzz_depth,
                     "production nesting budget (default 8)");
    fuzz->add_flag("--quiet", fuzz_quiet, "only print failures");

    Common attack_c;
    std::string attack_tpl;
    std::vector<std::string> payload_paths;
    auto* attack = app.add_subcommand(
        "attack-test",
        "drive payload corpora through every template marker");
    add_common(attack, attack_c, false);
    attack->add_option("-t,--template", attack_tpl, "template file")
        ->required();
    attack->add_option("-p,--payloads", payload_paths,
                       "payload file, one per line; repeatable")
        ->required()
        ->type_size(1)->allow_extra_args(false);

    std::string corpus_dir;
    auto* selftest =
        app.add_subcommand("selftest", "exercise the bundled corpus");
    selftest->add_option("--corpus", corpus_dir,
                         "corpus directory (default $ARMORPARSE_CORPUS or "
                         "./corpus)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    if (check->parsed()) return cmd_check(check_c, strict);
    if (parse->parsed()) return cmd_parse(parse_c, parse_in, parse_out);
    if (unparse->parsed())
        return cmd_unparse(unparse_c, unparse_in, unparse_out);
    if (render->parsed())
        return cmd_render(render_c, tpl_path, binds, bind_file, render_out);
    if (fuzz->parsed())
        return cmd_fuzz(fuzz_c, fuzz_cases, fuzz_seed, fuzz_depth, fuzz_quiet);
    if (attack->parsed()) return cmd_attack(attack_c, attack_tpl, payload_paths);
    if (selftest->parsed()) {
        if (corpus_dir.empty()) {
            const char* env = std::getenv("ARMORPARSE_CORPUS");
            corpus_dir = env && *env ? env : "corpus";
        }
        return ap::selftest(corpus_dir, std::cout) ? 1 : 0;
    }
    return 2;
}
