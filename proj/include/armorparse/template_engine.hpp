#ifndef ARMORPARSE_TEMPLATE_ENGINE_HPP
#define ARMORPARSE_TEMPLATE_ENGINE_HPP

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ast.hpp"
#include "parse_engine.hpp"
#include "unparse_engine.hpp"

namespace armorparse {

// One piece of a slotted leaf: either literal text or a marker reference.
struct TemplateSegment {
    bool is_marker = false;
    std::string text; // literal text, or the marker name
};

struct TemplateSlot {
    AstPath path;
    std::vector<TemplateSegment> segments;
};

// A parsed template: the document's AST with every leaf's marker structure
// extracted. Markers live in decoded leaf text, so a slot can sit arbitrarily
// deep inside embedded documents.
struct Template {
    std::string root_grammar;
    AstNode ast; // literal leaves already #-unescaped
    std::vector<TemplateSlot> slots;
};

namespace detail {

inline bool marker_name_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9') || c == '_';
}

// Splits decoded leaf text into literal and marker segments. `##` is a
// literal hash; a lone or malformed marker is an error.
inline Result<std::vector<TemplateSegment>>
scan_segments(std::string_view text) {
    using R = Result<std::vector<TemplateSegment>>;
    std::vector<TemplateSegment> segs;
    std::string lit;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c != '#') {
            lit += c;
            ++i;
            continue;
        }
        if (i + 1 < text.size() && text[i + 1] == '#') {
            lit += '#';
            i += 2;
            continue;
        }
        std::size_t j = i + 1;
        std::string name;
        while (j < text.size() && marker_name_char(text[j])) {
            name += text[j];
            ++j;
        }
        if (name.empty() || j >= text.size() || text[j] != '#')
            return R::fail("template-marker",
                           "stray '#' in template text '" + display(text) +
                               "' (write ## for a literal hash)");
        if (!lit.empty()) {
            segs.push_back({false, lit});
            lit.clear();
        }
        segs.push_back({true, name});
        i = j + 1;
    }
    if (!lit.empty()) segs.push_back({false, lit});
    return segs;
}

} // namespace detail

// Parses template text under a grammar and extracts marker slots from the
// decoded leaves.
inline Result<Template> load_template(const CompositionSet& set,
                                      const std::string& grammar_name,
                                      std::string_view text,
                                      const ParseOptions& opts = {}) {
    using R = Result<Template>;
    auto parsed = parse_document(set, grammar_name, text, opts);
    if (!parsed) return parsed.forward<Template>();
    Template tpl;
    tpl.root_grammar = grammar_name;
    tpl.ast = parsed.take();

    Result<Template> failure = R::fail("template-internal", "");
    bool failed = false;
    std::vector<std::pair<AstPath, std::string>> rewrites;
    walk(tpl.ast, [&](const AstNode& n, const AstPath& path) {
        if (failed || n.kind != AstNode::Kind::Token) return;
        auto segs = detail::scan_segments(n.text);
        if (!segs) {
            failure = segs.forward<Template>();
            failed = true;
            return;
        }
        bool has_marker = false;
        std::string unescaped;
        for (const auto& s : segs.value()) {
            if (s.is_marker)
                has_marker = true;
            else
                unescaped += s.text;
        }
        if (has_marker) {
            tpl.slots.push_back({path, segs.take()});
        } else if (unescaped != n.text) {
            rewrites.push_back({path, unescaped});
        }
    });
    if (failed) return failure;
    for (auto& [path, txt] : rewrites) set_leaf(tpl.ast, path, std::move(txt));
    return tpl;
}

// Marker name -> number of occurrences across all slots.
inline std::map<std::string, int> template_markers(const Template& tpl) {
    std::map<std::string, int> out;
    for (const auto& slot : tpl.slots)
        for (const auto& seg : slot.segments)
            if (seg.is_marker) ++out[seg.text];
    return out;
}

// Fills every slot from the bindings and returns the resulting AST. Every
// marker must be bound and every binding must name a marker.
inline Result<AstNode>
render_tree(const Template& tpl,
            const std::map<std::string, std::string>& bindings) {
    using R = Result<AstNode>;
    auto markers = template_markers(tpl);
    for (const auto& [name, n] : markers) {
        if (!bindings.count(name))
            return R::fail("render-unbound-marker",
                           "marker " + name + " has no binding");
    }
    for (const auto& [name, value] : bindings) {
        if (!markers.count(name))
            return R::fail("render-unknown-binding",
                           "binding " + name + " matches no marker");
    }
    AstNode filled = tpl.ast;
    for (const auto& slot : tpl.slots) {
        std::string text;
        for (const auto& seg : slot.segments)
            text += seg.is_marker ? bindings.at(seg.text) : seg.text;
        auto ok = set_leaf(filled, slot.path, std::move(text));
        if (!ok) return ok.forward<AstNode>();
    }
    return filled;
}

// Renders to document text: fill slots, then unparse (which encodes every
// leaf and validates it against its token).
inline Result<std::string>
render(const CompositionSet& set, const Template& tpl,
       const std::map<std::string, std::string>& bindings,
       const UnparseOptions& opts = {}) {
    auto tree = render_tree(tpl, bindings);
    if (!tree) return tree.forward<std::string>();
    return unparse_document(set, tpl.root_grammar, tree.value(), opts);
}

} // namespace armorparse

#endif
