#include <map>

#include "helpers.hpp"
#include "oracles.hpp"

using namespace armorparse;
using testutil::compile_inline;
using testutil::expect_error;
using testutil::slurp;

namespace {

const CompositionSet& html() {
    static CompositionSet set = testutil::html_set();
    return set;
}

const Template& page() {
    static Template tpl = [] {
        auto t = load_template(html(), "Html", slurp("templates/page.tpl"));
        if (!t.ok()) throw std::runtime_error(t.error().to_string());
        return t.take();
    }();
    return tpl;
}

std::map<std::string, std::string> bound(const std::string& action,
                                        const std::string& name) {
    return {{"actionURL", action}, {"name", name}};
}

} // namespace

TEST(Template, PageSlotsAndMarkers) {
    const Template& tpl = page();
    EXPECT_EQ(tpl.root_grammar, "Html");
    EXPECT_EQ(tpl.slots.size(), 8u);
    auto markers = template_markers(tpl);
    std::map<std::string, int> want{{"actionURL", 1}, {"name", 7}};
    EXPECT_EQ(markers, want);
    // every slot path points at a real leaf
    for (const auto& slot : tpl.slots) {
        const AstNode* n = get_node(tpl.ast, slot.path);
        ASSERT_NE(n, nullptr);
        EXPECT_EQ(n->kind, AstNode::Kind::Token);
    }
}

TEST(Template, RenderedDocumentsMatchIndependentOracle) {
    const Template& tpl = page();
    auto doc = render(html(), tpl, bound("/register", "alice"));
    ASSERT_OK(doc);
    EXPECT_EQ(doc.value(), oracles::k_benign_doc);

    doc = render(html(), tpl, bound("/register", ";alert(1)"));
    ASSERT_OK(doc);
    EXPECT_EQ(doc.value(), oracles::k_alert_doc);

    doc = render(html(), tpl, bound("x", "';alert(1);// \"><script>"));
    ASSERT_OK(doc);
    EXPECT_EQ(doc.value(), oracles::k_evil_doc);

    doc = render(html(), tpl, bound("/register", "a\r\nb"));
    ASSERT_OK(doc);
    EXPECT_EQ(doc.value(), oracles::k_crlf_doc);
}

TEST(Template, RenderReparsePreservesStructureAndPayload) {
    const Template& tpl = page();
    const std::string payload = "';alert(1);// \"><script>";
    auto tree = render_tree(tpl, bound("x", payload));
    ASSERT_OK(tree);
    auto doc = render(html(), tpl, bound("x", payload));
    ASSERT_OK(doc);
    auto back = parse_document(html(), "Html", doc.value());
    ASSERT_OK(back);
    EXPECT_TRUE(ast_equal(back.value(), tree.value()));
    EXPECT_TRUE(skeleton_equal(back.value(), tpl.ast));
    // the payload sits verbatim in every name slot of the re-parsed tree
    for (const auto& slot : page().slots) {
        bool is_name = false;
        for (const auto& seg : slot.segments)
            if (seg.is_marker && seg.text == "name") is_name = true;
        if (!is_name) continue;
        const AstNode* leaf = get_node(back.value(), slot.path);
        ASSERT_NE(leaf, nullptr);
        EXPECT_NE(leaf->text.find(payload), std::string::npos) << leaf->text;
    }
}

TEST(Template, MarkersInsideEmbeddedDocuments) {
    // Markers reach through subparser boundaries: the script-body slot lives
    // inside JsScript, two onclick slots inside JsAttr string literals.
    const Template& tpl = page();
    int inside_sub = 0;
    for (const auto& slot : tpl.slots) {
        const AstNode* cur = &tpl.ast;
        bool crossed = false;
        for (std::size_t idx : slot.path) {
            if (cur->kind == AstNode::Kind::Sub) crossed = true;
            cur = &cur->children[idx];
        }
        if (crossed) ++inside_sub;
    }
    EXPECT_EQ(inside_sub, 4); // 2 onclick args, script DQ, script SQ
}

TEST(Template, HashEscapes) {
    auto set = testutil::tag_set();
    auto tpl = load_template(set, "Tag", "<a##b>,<#x#>");
    ASSERT_OK(tpl);
    ASSERT_EQ(tpl.value().slots.size(), 1u);
    // the non-slot leaf was rewritten to a literal hash
    EXPECT_EQ(tpl.value().ast.children[0].children[0].text, "a#b");

    // the rendered document carries the unescaped hash: ## was template
    // syntax, not content
    auto doc = render(set, tpl.value(), {{"x", "v"}});
    ASSERT_OK(doc);
    EXPECT_EQ(doc.value(), "<a#b>,<v>");

    // ## inside a slotted leaf unescapes next to the marker
    auto mixed = load_template(set, "Tag", "<##x## #m#>");
    ASSERT_OK(mixed);
    auto out = render(set, mixed.value(), {{"m", "q"}});
    ASSERT_OK(out);
    EXPECT_EQ(out.value(), "<#x# q>");
}

TEST(Template, StrayHashRejected) {
    auto set = testutil::tag_set();
    expect_error(load_template(set, "Tag", "<a#b>"), "template-marker");
    expect_error(load_template(set, "Tag", "<#>"), "template-marker");
    expect_error(load_template(set, "Tag", "<#x>"), "template-marker");
    expect_error(load_template(set, "Tag", "<a#b#c#>"), "template-marker");
}

TEST(Template, BindingErrors) {
    const Template& tpl = page();
    expect_error(render_tree(tpl, {{"actionURL", "x"}}),
                 "render-unbound-marker");
    auto b = bound("x", "y");
    b["ghost"] = "z";
    expect_error(render_tree(tpl, b), "render-unknown-binding");
}

TEST(Template, RenderRefusesUncarriableBinding) {
    // A binding that lands in a leaf whose token cannot carry it (even
    // encoded) must fail loudly, not silently alter the document. Tag's
    // table covers every character, so the only uncarriable text is the
    // empty string in a one-or-more token.
    auto set = testutil::tag_set();
    auto tpl = load_template(set, "Tag", "<ok>,<#v#>");
    ASSERT_OK(tpl);
    auto doc = render(set, tpl.value(), {{"v", "x,y"}});
    ASSERT_OK(doc);
    EXPECT_EQ(doc.value(), "<ok>,<x\\,y>");
    expect_error(render(set, tpl.value(), {{"v", ""}}),
                 "unparse-invalid-leaf");
}

TEST(Template, MarkersMustFitTheGrammar) {
    // The reduced grammar's TEXT cannot even tokenize '#': marker syntax has
    // to be expressible in the template's own grammar.
    auto reduced = testutil::tag_reduced_set();
    expect_error(load_template(reduced, "TagReduced", "<#v#>"),
                 "tokenize-stuck");
}
