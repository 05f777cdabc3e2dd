#ifndef ARMORPARSE_CORPUS_HPP
#define ARMORPARSE_CORPUS_HPP

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "attack.hpp"
#include "compiled.hpp"
#include "fuzz.hpp"
#include "meta_parser.hpp"
#include "template_engine.hpp"

namespace armorparse {

inline Result<std::string> read_file(const std::string& path) {
    using R = Result<std::string>;
    std::ifstream in(path, std::ios::binary);
    if (!in) return R::fail("io-open", "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) return R::fail("io-read", "cannot read " + path);
    return buf.str();
}

inline Result<Grammar> load_grammar_file(const std::string& path) {
    auto text = read_file(path);
    if (!text) return text.forward<Grammar>();
    auto g = parse_grammar(text.value());
    if (!g) {
        Diagnostic d = g.error();
        d.message = path + ": " + d.message;
        return Result<Grammar>(d);
    }
    return g;
}

// Grammar names a manifest refers to (owners and targets), in order of first
// mention. Pure scan; the bindings themselves are checked by parse_manifest.
inline Result<std::vector<std::string>>
manifest_grammar_refs(std::string_view src) {
    using R = Result<std::vector<std::string>>;
    if (!utf8_valid(src))
        return R::fail("meta-encoding", "manifest is not valid UTF-8");
    detail::MetaCursor c(src);
    if (!c.eat_word("compose"))
        return R(c.err("meta-syntax", "expected compose"));
    if (!c.eat("{")) return R(c.err("meta-syntax", "expected {"));
    std::vector<std::string> names;
    auto note = [&](const std::string& n) {
        if (std::find(names.begin(), names.end(), n) == names.end())
            names.push_back(n);
    };
    while (!c.eat("}")) {
        if (c.eof()) return R(c.err("meta-syntax", "unterminated manifest"));
        if (!c.at_ident())
            return R(c.err("meta-syntax", "expected grammar name"));
        note(c.ident());
        if (!c.eat(".")) return R(c.err("meta-syntax", "expected ."));
        if (!c.at_ident())
            return R(c.err("meta-syntax", "expected token name"));
        c.ident();
        if (!c.eat("->")) return R(c.err("meta-syntax", "expected ->"));
        if (!c.at_ident())
            return R(c.err("meta-syntax", "expected target grammar"));
        note(c.ident());
        if (!c.eat(";")) return R(c.err("meta-syntax", "expected ;"));
    }
    return names;
}

struct LoadedSources {
    std::vector<Grammar> grammars; // first one is the root
    std::string manifest_text;     // empty when no manifest was given
};

// Reads explicitly listed grammar files plus an optional manifest. When the
// manifest mentions grammars that were not listed, their .grm files are
// looked up next to the manifest, next to the root grammar, and in
// <manifest dir>/../grammars.
inline Result<LoadedSources>
load_sources(const std::vector<std::string>& grammar_paths,
             const std::string& manifest_path = "") {
    using R = Result<LoadedSources>;
    namespace fs = std::filesystem;

    LoadedSources src;
    for (const auto& p : grammar_paths) {
        auto g = load_grammar_file(p);
        if (!g) return g.forward<LoadedSources>();
        src.grammars.push_back(g.take());
    }
    if (manifest_path.empty()) return src;

    auto text = read_file(manifest_path);
    if (!text) return text.forward<LoadedSources>();
    src.manifest_text = text.take();

    auto refs = manifest_grammar_refs(src.manifest_text);
    if (!refs) return refs.forward<LoadedSources>();

    std::vector<fs::path> dirs;
    auto add_dir = [&](fs::path d) {
        if (d.empty()) d = ".";
        std::error_code ec;
        if (!fs::is_directory(d, ec)) return;
        if (std::find(dirs.begin(), dirs.end(), d) == dirs.end())
            dirs.push_back(d);
    };
    add_dir(fs::path(manifest_path).parent_path());
    if (!grammar_paths.empty())
        add_dir(fs::path(grammar_paths[0]).parent_path());
    add_dir(fs::path(manifest_path).parent_path() / ".." / "grammars");

    for (const auto& name : refs.value()) {
        bool have = false;
        for (const auto& g : src.grammars)
            if (g.name == name) have = true;
        if (have) continue;
        bool found = false;
        for (const auto& dir : dirs) {
            std::vector<fs::path> files;
            std::error_code ec;
            for (const auto& entry : fs::directory_iterator(dir, ec))
                if (entry.path().extension() == ".grm")
                    files.push_back(entry.path());
            std::sort(files.begin(), files.end());
            for (const auto& f : files) {
                auto g = load_grammar_file(f.string());
                if (!g) continue; // unrelated or broken file
                if (g.value().name != name) continue;
                src.grammars.push_back(g.take());
                found = true;
                break;
            }
            if (found) break;
        }
        if (!found)
            return R::fail("compose-missing-grammar",
                           "manifest needs grammar " + name +
                               " and no .grm file defines it");
    }
    return src;
}

// Compiles loaded sources into a composition set. `checked` runs full
// validation; turn it off only for deliberately broken grammars.
inline Result<CompositionSet> build_set(LoadedSources src, bool checked = true,
                                        Diagnostics* diags = nullptr) {
    std::vector<CompiledGrammarPtr> compiled;
    std::vector<const Grammar*> raw;
    for (auto& g : src.grammars) raw.push_back(&g);
    for (auto& g : src.grammars) {
        auto cg = checked ? CompiledGrammar::compile(g, diags)
                          : CompiledGrammar::compile_unchecked(g, diags);
        if (!cg) return cg.forward<CompositionSet>();
        compiled.push_back(cg.take());
    }
    CompositionManifest manifest;
    if (!src.manifest_text.empty()) {
        auto m = parse_manifest(src.manifest_text, raw);
        if (!m) return m.forward<CompositionSet>();
        manifest = m.take();
    }
    return CompositionSet::build(std::move(compiled), std::move(manifest));
}

inline Result<CompositionSet>
load_set(const std::vector<std::string>& grammar_paths,
         const std::string& manifest_path = "",
         Diagnostics* diags = nullptr) {
    auto src = load_sources(grammar_paths, manifest_path);
    if (!src) return src.forward<CompositionSet>();
    return build_set(src.take(), true, diags);
}

// End-to-end exercise of the bundled corpus. Returns the number of failed
// checks; prints one PASS/FAIL line per check plus the reports of the fuzz
// and payload runs.
inline int selftest(const std::string& corpus_root, std::ostream& out) {
    namespace fs = std::filesystem;
    int failures = 0;
    auto check = [&](bool ok, const std::string& id,
                     const std::string& detail) {
        if (!ok) ++failures;
        out << (ok ? "PASS " : "FAIL ") << id
            << (detail.empty() ? "" : " " + detail) << "\n";
        return ok;
    };
    auto gp = [&](const char* f) {
        return (fs::path(corpus_root) / "grammars" / f).string();
    };
    auto mp = [&](const char* f) {
        return (fs::path(corpus_root) / "manifests" / f).string();
    };

    auto tag = load_set({gp("tag.grm")});
    check(tag.ok(), "selftest-load-tag",
          tag.ok() ? "" : tag.error().message);
    auto container =
        load_set({gp("container.grm")}, mp("container_tag.compose"));
    check(container.ok(), "selftest-load-container",
          container.ok() ? "" : container.error().message);
    auto html = load_set({gp("html.grm")}, mp("html_js.compose"));
    check(html.ok(), "selftest-load-html",
          html.ok() ? "" : html.error().message);
    if (failures) {
        out << "SELFTEST failures=" << failures << "\n";
        return failures;
    }

    auto tpl_text =
        read_file((fs::path(corpus_root) / "templates" / "page.tpl").string());
    check(tpl_text.ok(), "selftest-read-template",
          tpl_text.ok() ? "" : tpl_text.error().message);
    if (tpl_text.ok()) {
        auto tpl = load_template(html.value(), "Html", tpl_text.value());
        if (check(tpl.ok(), "selftest-template",
                  tpl.ok() ? "" : tpl.error().message)) {
            std::map<std::string, std::string> benign;
            for (const auto& [name, n] : template_markers(tpl.value()))
                benign[name] = "ok";
            auto doc = render(html.value(), tpl.value(), benign);
            check(doc.ok(), "selftest-render",
                  doc.ok() ? "" : doc.error().message);
            if (doc.ok()) {
                auto back = parse_document(html.value(), "Html", doc.value());
                check(back.ok() && tpl.ok(), "selftest-reparse",
                      back.ok() ? "" : back.error().message);
            }

            auto payloads_text = read_file(
                (fs::path(corpus_root) / "attacks" / "xss.txt").string());
            if (check(payloads_text.ok(), "selftest-read-payloads",
                      payloads_text.ok() ? "" : payloads_text.error().message)) {
                auto payloads = load_payloads(payloads_text.value());
                check(payloads.ok(), "selftest-payloads",
                      payloads.ok() ? "" : payloads.error().message);
                if (payloads.ok()) {
                    std::ostringstream sink;
                    auto rep = attack_run(html.value(), tpl.value(),
                                          payloads.value(), sink);
                    if (rep.failures) out << sink.str();
                    check(rep.failures == 0, "selftest-attack",
                          "cases=" + std::to_string(rep.cases) +
                              " failures=" + std::to_string(rep.failures));
                }
            }
        }
    }

    struct Round {
        const char* id;
        const Result<CompositionSet>* set;
        const char* root;
    } rounds[] = {
        {"selftest-fuzz-tag", &tag, "Tag"},
        {"selftest-fuzz-container", &container, "Container"},
        {"selftest-fuzz-html", &html, "Html"},
    };
    for (const auto& r : rounds) {
        FuzzOptions fopts;
        fopts.cases = 50;
        fopts.seed = 7;
        fopts.verbose = false;
        std::ostringstream sink;
        auto rep = fuzz_roundtrip(r.set->value(), r.root, fopts, sink);
        if (rep.violations) out << sink.str();
        check(rep.violations == 0, r.id,
              "cases=" + std::to_string(rep.cases) +
                  " violations=" + std::to_string(rep.violations));
    }

    out << "SELFTEST failures=" << failures << "\n";
    return failures;
}

} // namespace armorparse

#endif
