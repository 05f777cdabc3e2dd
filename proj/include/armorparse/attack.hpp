#ifndef ARMORPARSE_ATTACK_HPP
#define ARMORPARSE_ATTACK_HPP

#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ast.hpp"
#include "parse_engine.hpp"
#include "template_engine.hpp"
#include "text.hpp"
#include "unparse_engine.hpp"

namespace armorparse {

struct AttackOptions {
    std::string benign = "ok"; // filler for the markers not under test
    const CodecRegistry* codecs = nullptr;
};

struct AttackReport {
    int cases = 0;
    int failures = 0;
};

// Parses a payload file: one payload per line, \uHHHH and \\ escapes
// resolved, trailing CR stripped. Blank lines are kept out of the corpus.
inline Result<std::vector<std::string>>
load_payloads(std::string_view file_text) {
    using R = Result<std::vector<std::string>>;
    std::vector<std::string> out;
    std::size_t start = 0;
    int lineno = 0;
    while (start <= file_text.size()) {
        std::size_t end = file_text.find('\n', start);
        if (end == std::string_view::npos) end = file_text.size();
        std::string_view line = file_text.substr(start, end - start);
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) {
            auto p = unescape_payload(line);
            if (!p)
                return R::fail(p.error().code,
                               "line " + std::to_string(lineno) + ": " +
                                   p.error().message);
            out.push_back(p.take());
        }
        if (end == file_text.size()) break;
        start = end + 1;
    }
    return out;
}

// Drives every payload through every marker of the template, one marker at a
// time. A case passes when the rendered document parses back to exactly the
// filled tree: same shape, payload recovered verbatim in its slot.
inline AttackReport attack_run(const CompositionSet& set, const Template& tpl,
                               const std::vector<std::string>& payloads,
                               std::ostream& out,
                               const AttackOptions& opts = {}) {
    AttackReport report;
    ParseOptions popts;
    popts.codecs = opts.codecs;
    UnparseOptions uopts;
    uopts.codecs = opts.codecs;

    std::vector<std::string> markers;
    for (const auto& [name, n] : template_markers(tpl)) markers.push_back(name);

    for (std::size_t pi = 0; pi < payloads.size(); ++pi) {
        for (const auto& marker : markers) {
            ++report.cases;
            std::string id =
                "attack-" + std::to_string(pi) + "-" + marker;
            auto fail = [&](const std::string& what) {
                ++report.failures;
                out << "FAIL " << id << " " << what
                    << " payload=" << display(payloads[pi].substr(0, 60))
                    << "\n";
            };
            std::map<std::string, std::string> bindings;
            for (const auto& m : markers) bindings[m] = opts.benign;
            bindings[marker] = payloads[pi];

            auto filled = render_tree(tpl, bindings);
            if (!filled) {
                fail("fill: " + filled.error().message);
                continue;
            }
            auto doc =
                unparse_document(set, tpl.root_grammar, filled.value(), uopts);
            if (!doc) {
                fail("render: [" + doc.error().code + "] " +
                     doc.error().message);
                continue;
            }
            auto back =
                parse_document(set, tpl.root_grammar, doc.value(), popts);
            if (!back) {
                fail("reparse: [" + back.error().code + "] " +
                     back.error().message);
                continue;
            }
            if (!skeleton_equal(filled.value(), back.value())) {
                fail("document structure changed");
                continue;
            }
            if (!ast_equal(filled.value(), back.value())) {
                fail("payload not recovered verbatim");
                continue;
            }
            out << "PASS " << id << "\n";
        }
    }
    out << "SUMMARY cases=" << report.cases << " failures=" << report.failures
        << "\n";
    return report;
}

} // namespace armorparse

#endif
