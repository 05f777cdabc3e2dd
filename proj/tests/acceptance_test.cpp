// Acceptance gate: nine end-to-end checks, each printing one verdict line
// with its measured values and time budget. Run via ctest or directly; the
// binary exits nonzero if any check fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "oracles.hpp"

using namespace armorparse;

namespace {

namespace fs = std::filesystem;

using Clock = std::chrono::steady_clock;

long long ms_since(Clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               Clock::now() - start)
        .count();
}

void verdict(const char* id, bool pass, const std::string& detail) {
    std::printf("ACCEPTANCE %s %s %s\n", id, pass ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
}

// All strings over `alphabet` of length <= max_len, generated level by level.
std::vector<std::string> strings_up_to(const std::string& alphabet,
                                       int max_len) {
    std::vector<std::string> out{""};
    std::size_t level_start = 0;
    for (int len = 1; len <= max_len; ++len) {
        std::size_t level_end = out.size();
        for (std::size_t i = level_start; i < level_end; ++i)
            for (char c : alphabet) out.push_back(out[i] + c);
        level_start = level_end;
    }
    return out;
}

int inverse_violations(const EncodeTable& table,
                       const std::vector<std::string>& inputs,
                       std::string* first = nullptr) {
    int violations = 0;
    for (const auto& s : inputs) {
        auto back = decode(encode(s, table), table);
        if (back.ok() && back.value() == s) continue;
        ++violations;
        if (first && first->empty())
            *first = back.ok() ? "decoded to " + display(back.value())
                               : back.error().to_string();
    }
    return violations;
}

const EncodeTable& corpus_table(const char* grammar_file, const char* token) {
    static std::map<std::string, Grammar> cache;
    std::string key = grammar_file;
    auto it = cache.find(key);
    if (it == cache.end()) {
        auto g = parse_grammar(
            testutil::slurp(std::string("grammars/") + grammar_file));
        if (!g.ok()) throw std::runtime_error(g.error().to_string());
        it = cache.emplace(key, g.take()).first;
    }
    const EncodeTable* t = it->second.table(token);
    if (!t) throw std::runtime_error(std::string("no table ") + token);
    return *t;
}

Grammar mutated_tag_grammar(const std::string& spec) {
    auto g = parse_grammar(testutil::slurp("grammars/tag.grm"));
    if (!g.ok()) throw std::runtime_error(g.error().to_string());
    auto m = parse_mutation(spec);
    if (!m.ok()) throw std::runtime_error(m.error().to_string());
    auto bad = apply_mutation(g.take(), m.value());
    if (!bad.ok()) throw std::runtime_error(bad.error().to_string());
    return bad.take();
}

} // namespace

// Check 1: the tag-body table's encoder and decoder are exact inverses over
// every string of length <= 4 built from the table's own controls plus a
// plain letter (781 strings). Budget: 1 second.
TEST(Acceptance, C1_CodecInverseExhaustive) {
    auto start = Clock::now();
    const EncodeTable& table = corpus_table("tag.grm", "TEXT");
    auto inputs = strings_up_to("a<>,\\", 4);
    std::string first;
    int violations = inverse_violations(table, inputs, &first);
    long long elapsed = ms_since(start);

    bool pass = inputs.size() == 781 && violations == 0 && elapsed < 1000;
    verdict("C1", pass,
            "strings=" + std::to_string(inputs.size()) +
                " violations=" + std::to_string(violations) +
                " elapsed_ms=" + std::to_string(elapsed) + " budget_ms=1000");
    EXPECT_EQ(inputs.size(), 781u);
    EXPECT_EQ(violations, 0) << first;
    EXPECT_LT(elapsed, 1000);
}

// Check 2: every bundled encode table survives 100000 random round trips
// (length <= 64 over printable ASCII plus every control any bundled table
// names). Budget: 30 seconds for all six tables.
TEST(Acceptance, C2_CodecInverseRandomized) {
    auto start = Clock::now();

    std::vector<std::pair<std::string, const EncodeTable*>> tables;
    std::vector<Grammar> grammars;
    for (const auto& entry :
         fs::directory_iterator(testutil::corpus_path("grammars"))) {
        if (entry.path().extension() != ".grm") continue;
        auto g = parse_grammar(testutil::slurp(
            "grammars/" + entry.path().filename().string()));
        ASSERT_OK(g);
        grammars.push_back(g.take());
    }
    std::set<std::string> controls;
    for (const auto& g : grammars)
        for (const auto& t : g.tables)
            for (const auto& r : t.rules) controls.insert(r.control);
    for (const auto& g : grammars)
        for (const auto& t : g.tables)
            tables.emplace_back(g.name + "." + t.token, &t);
    ASSERT_EQ(tables.size(), 6u);

    std::vector<std::string> alphabet;
    for (char c = 0x20; c < 0x7F; ++c) alphabet.emplace_back(1, c);
    for (const auto& c : controls)
        if (c.size() != 1 || c[0] < 0x20 || c[0] >= 0x7F)
            alphabet.push_back(c);

    const int kCases = 100000;
    std::mt19937_64 rng(20260819);
    std::uniform_int_distribution<int> len_dist(0, 64);
    std::uniform_int_distribution<std::size_t> char_dist(0,
                                                         alphabet.size() - 1);
    long long total = 0;
    int violations = 0;
    std::string first;
    for (const auto& [label, table] : tables) {
        for (int i = 0; i < kCases; ++i) {
            std::string s;
            int len = len_dist(rng);
            for (int k = 0; k < len; ++k) s += alphabet[char_dist(rng)];
            ++total;
            auto back = decode(encode(s, *table), *table);
            if (back.ok() && back.value() == s) continue;
            ++violations;
            if (first.empty())
                first = label + ": " + display(s) + " -> " +
                        (back.ok() ? display(back.value())
                                   : back.error().to_string());
        }
    }
    long long elapsed = ms_since(start);

    bool pass = violations == 0 && elapsed < 30000;
    verdict("C2", pass,
            "tables=" + std::to_string(tables.size()) +
                " strings=" + std::to_string(total) +
                " violations=" + std::to_string(violations) +
                " elapsed_ms=" + std::to_string(elapsed) + " budget_ms=30000");
    EXPECT_EQ(violations, 0) << first;
    EXPECT_LT(elapsed, 30000);
}

// Check 3: 10000 random ASTs with hostile leaf text round-trip through
// unparse and parse on each bundled composition. Budget: 2 minutes total.
TEST(Acceptance, C3_RoundTripWithMaliciousLeaves) {
    auto start = Clock::now();
    struct Target {
        CompositionSet set;
        const char* root;
    };
    std::vector<Target> targets;
    targets.push_back({testutil::tag_set(), "Tag"});
    targets.push_back({testutil::container_set(), "Container"});
    targets.push_back({testutil::html_set(), "Html"});

    FuzzOptions opts;
    opts.cases = 10000;
    opts.seed = 42;
    opts.max_depth = 8;
    opts.verbose = false;

    long long cases = 0;
    long long violations = 0;
    std::string log;
    for (auto& t : targets) {
        std::ostringstream out;
        FuzzReport r = fuzz_roundtrip(t.set, t.root, opts, out);
        cases += r.cases;
        violations += r.violations;
        if (r.violations) log += out.str();
    }
    long long elapsed = ms_since(start);

    bool pass = violations == 0 && elapsed < 120000;
    verdict("C3", pass,
            "cases=" + std::to_string(cases) +
                " violations=" + std::to_string(violations) +
                " elapsed_ms=" + std::to_string(elapsed) +
                " budget_ms=120000");
    EXPECT_EQ(violations, 0) << log.substr(0, 4000);
    EXPECT_LT(elapsed, 120000);
}

// Check 4: rendering the bundled page template with name = ";alert(1)"
// reproduces the expected document byte for byte, including the doubly
// encoded Test1 onclick attribute.
TEST(Acceptance, C4_TemplateRenderByteExact) {
    auto set = testutil::html_set();
    auto tpl = load_template(set, "Html", testutil::slurp("templates/page.tpl"));
    ASSERT_OK(tpl);
    auto doc = render(set, tpl.value(),
                      {{"actionURL", "/register"}, {"name", ";alert(1)"}});
    ASSERT_OK(doc);

    std::string anchored =
        "onclick=\"" + oracles::k_alert_onclick + "\">Test1";
    bool byte_exact = doc.value() == oracles::k_alert_doc;
    bool onclick_ok = doc.value().find(anchored) != std::string::npos;

    bool pass = byte_exact && onclick_ok;
    verdict("C4", pass,
            std::string("byte_exact=") + (byte_exact ? "yes" : "no") +
                " onclick_attr=" + (onclick_ok ? "exact" : "MISSING") +
                " bytes=" + std::to_string(doc.value().size()));
    EXPECT_TRUE(onclick_ok) << doc.value();
    EXPECT_EQ(doc.value(), oracles::k_alert_doc);
}

// Check 5: every bundled attack payload, bound into every marker of the page
// template, renders to a document that parses back to the same skeleton with
// the payload recovered verbatim in each targeted leaf. Budget: 1 minute.
TEST(Acceptance, C5_StructuralInjectionSafety) {
    auto start = Clock::now();
    auto set = testutil::html_set();
    auto tpl = load_template(set, "Html", testutil::slurp("templates/page.tpl"));
    ASSERT_OK(tpl);
    ASSERT_EQ(tpl.value().slots.size(), 8u);
    auto markers = template_markers(tpl.value());
    ASSERT_EQ(markers.size(), 2u);
    ASSERT_EQ(markers["actionURL"], 1);
    ASSERT_EQ(markers["name"], 7);

    std::vector<std::string> payloads;
    for (const char* file : {"attacks/xss.txt", "attacks/fuzzdb_subset.txt"}) {
        auto lines = load_payloads(testutil::slurp(file));
        ASSERT_OK(lines);
        for (auto& l : lines.value()) payloads.push_back(std::move(l));
    }
    ASSERT_GE(payloads.size(), 100u);

    std::ostringstream log;
    AttackReport report = attack_run(set, tpl.value(), payloads, log);

    // Independently confirm the per-slot property the report summarizes:
    // the re-parsed leaf under each targeted slot carries the payload bytes.
    long long slot_checks = 0;
    int slot_failures = 0;
    std::string first;
    for (const auto& payload : payloads) {
        for (const auto& [marker, n] : markers) {
            std::map<std::string, std::string> bindings;
            for (const auto& kv : markers) bindings[kv.first] = "ok";
            bindings[marker] = payload;
            auto filled = render_tree(tpl.value(), bindings);
            ASSERT_OK(filled);
            auto doc = unparse_document(set, "Html", filled.value());
            ASSERT_OK(doc);
            auto back = parse_document(set, "Html", doc.value());
            ASSERT_OK(back);
            bool skeleton_ok =
                skeleton_equal(back.value(), tpl.value().ast) &&
                skeleton_equal(back.value(), filled.value());
            for (const auto& slot : tpl.value().slots) {
                bool targeted = false;
                for (const auto& seg : slot.segments)
                    if (seg.is_marker && seg.text == marker) targeted = true;
                if (!targeted) continue;
                ++slot_checks;
                const AstNode* leaf = get_node(back.value(), slot.path);
                bool verbatim = leaf && leaf->kind == AstNode::Kind::Token &&
                                leaf->text.find(payload) != std::string::npos;
                if (skeleton_ok && verbatim) continue;
                ++slot_failures;
                if (first.empty())
                    first = "marker " + marker + " payload " +
                            display(payload.substr(0, 40));
            }
        }
    }
    long long elapsed = ms_since(start);

    bool pass = report.failures == 0 && slot_failures == 0 &&
                report.cases == static_cast<int>(payloads.size()) * 2 &&
                elapsed < 60000;
    verdict("C5", pass,
            "payloads=" + std::to_string(payloads.size()) +
                " cases=" + std::to_string(report.cases) +
                " failures=" + std::to_string(report.failures) +
                " slot_checks=" + std::to_string(slot_checks) +
                " slot_failures=" + std::to_string(slot_failures) +
                " elapsed_ms=" + std::to_string(elapsed) + " budget_ms=60000");
    EXPECT_EQ(report.failures, 0) << log.str().substr(0, 4000);
    EXPECT_EQ(slot_failures, 0) << first;
    EXPECT_LT(elapsed, 60000);
}

// Check 6: one grammar embedded in another keeps both encoding layers in the
// right order: inner escapes stay intact through the outer layer, and outer
// controls appearing in inner leaf text are carried by the outer table.
TEST(Acceptance, C6_CompositionOrdering) {
    auto set = testutil::container_set();
    const std::string doc = "{tags{<x\\,y>}}";

    auto ast = parse_document(set, "Container", doc);
    ASSERT_OK(ast);
    const AstNode* sub = get_node(ast.value(), AstPath{0, 0});
    ASSERT_NE(sub, nullptr);
    ASSERT_EQ(sub->kind, AstNode::Kind::Sub);

    const AstNode* leaf = nullptr;
    walk(ast.value(), [&](const AstNode& n, const AstPath&) {
        if (!leaf && n.kind == AstNode::Kind::Token) leaf = &n;
    });
    ASSERT_NE(leaf, nullptr);
    bool inner_decoded = leaf->text == "x,y";

    auto back = unparse_document(set, "Container", ast.value());
    ASSERT_OK(back);
    bool reproduced = back.value() == doc;

    AstNode edited = ast.value();
    AstPath leaf_path;
    walk(edited, [&](const AstNode& n, const AstPath& p) {
        if (leaf_path.empty() && n.kind == AstNode::Kind::Token) leaf_path = p;
    });
    ASSERT_OK(set_leaf(edited, leaf_path, "x{y"));
    auto outer = unparse_document(set, "Container", edited);
    ASSERT_OK(outer);
    bool outer_carried = outer.value() == "{tags{<x&#x007B;y>}}";

    auto reparsed = parse_document(set, "Container", outer.value());
    ASSERT_OK(reparsed);
    bool round = ast_equal(reparsed.value(), edited);

    bool pass = inner_decoded && reproduced && outer_carried && round;
    verdict("C6", pass,
            std::string("inner_leaf=") + display(leaf->text) +
                " reproduced=" + (reproduced ? "yes" : "no") + " outer_doc=" +
                display(outer.value()) + " round=" + (round ? "yes" : "no"));
    EXPECT_TRUE(inner_decoded) << display(leaf->text);
    EXPECT_TRUE(reproduced) << display(back.value());
    EXPECT_TRUE(outer_carried) << display(outer.value());
    EXPECT_TRUE(round);
}

// Check 7: with the '<' rule dropped from the tag-body table, unparsing an
// AST whose body text contains '<' must fail post-encode validation and
// produce no document at all.
TEST(Acceptance, C7_StopOnViolation) {
    Grammar broken = mutated_tag_grammar("drop-rule:TEXT:<");
    auto cg = CompiledGrammar::compile_unchecked(std::move(broken));
    ASSERT_OK(cg);
    auto set = CompositionSet::single(cg.take());

    AstNode tag = AstNode::make_rule("Tag", 0);
    tag.children.push_back(AstNode::make_token("TEXT", "a<b"));

    auto doc = unparse_document(set, "Tag", tag);
    bool refused = !doc.ok();
    bool right_error = refused && doc.error().code == "unparse-invalid-leaf";

    bool pass = refused && right_error;
    verdict("C7", pass,
            std::string("document_produced=") + (refused ? "no" : "YES") +
                " error=" + (refused ? doc.error().code : "none"));
    ASSERT_FALSE(doc.ok());
    EXPECT_EQ(doc.error().code, "unparse-invalid-leaf")
        << doc.error().to_string();
}

// Check 8: each table mutation (dropping a rule, colliding two escapes,
// breaking a self-protecting lead) turns at least one of the earlier checks
// red. Collisions and broken leads already fail the exhaustive codec inverse
// of check 1; a dropped rule keeps the bare codec invertible (the character
// stops being a control at all) and is caught by the round-trip fuzzing of
// check 3, where the unencodable leaf fails post-encode validation.
TEST(Acceptance, C8_MutationSensitivity) {
    auto inputs = strings_up_to("a<>,\\", 4);
    struct Case {
        const char* spec;
        std::string detector;
        int violations = 0;
    };
    std::vector<Case> cases = {{"drop-rule:TEXT:<"},
                               {"swap-escapes:TEXT:<:>"},
                               {"break-lead:TEXT:<"}};
    bool pass = true;
    std::string detail;
    for (auto& c : cases) {
        Grammar g = mutated_tag_grammar(c.spec);
        c.violations = inverse_violations(*g.table("TEXT"), inputs);
        c.detector = "codec";
        if (c.violations == 0) {
            auto cg = CompiledGrammar::compile_unchecked(std::move(g));
            ASSERT_OK(cg);
            auto set = CompositionSet::single(cg.take());
            FuzzOptions opts;
            opts.cases = 300;
            opts.seed = 11;
            opts.verbose = false;
            std::ostringstream sink;
            c.violations = fuzz_roundtrip(set, "Tag", opts, sink).violations;
            c.detector = "roundtrip";
        }
        if (c.violations == 0) pass = false;
        if (!detail.empty()) detail += " ";
        detail += std::string(c.spec) + "=" + c.detector + "(" +
                  std::to_string(c.violations) + ")";
    }
    verdict("C8", pass, detail + " (each mutation must trip a check)");
    for (const auto& c : cases)
        EXPECT_GT(c.violations, 0) << c.spec << " went undetected";
}

// Check 9: the reduced tag grammar admits a benign fragment and rejects an
// escape-bearing one; the accepted fragment passes through a composed
// document round trip unchanged.
TEST(Acceptance, C9_ReductionEmbedding) {
    auto reduced = testutil::tag_reduced_set();
    auto good = validate_input(reduced, "TagReduced", "<abc>,<def>");
    bool accepts_benign = good.ok();
    bool rejects_escape =
        !validate_input(reduced, "TagReduced", "<a\\,b>").ok();

    auto set = testutil::container_set();
    auto host = parse_document(set, "Container", "{tags{<z>}}");
    ASSERT_OK(host);
    ASSERT_OK(good);
    auto grafted = embed_validated(set, "Container", host.value(),
                                   AstPath{0, 0}, reduced, "TagReduced",
                                   good.value());
    ASSERT_OK(grafted);
    auto doc = unparse_document(set, "Container", grafted.value());
    ASSERT_OK(doc);
    bool composed = doc.value() == "{tags{<abc>,<def>}}";

    auto back = parse_document(set, "Container", doc.value());
    ASSERT_OK(back);
    const AstNode* inner = get_node(back.value(), AstPath{0, 0, 0});
    bool unchanged = inner && ast_equal(*inner, good.value());

    bool pass = accepts_benign && rejects_escape && composed && unchanged;
    verdict("C9", pass,
            std::string("accepts_benign=") + (accepts_benign ? "yes" : "no") +
                " rejects_escape=" + (rejects_escape ? "yes" : "no") +
                " composed_doc=" + display(doc.value()) +
                " fragment_unchanged=" + (unchanged ? "yes" : "no"));
    EXPECT_TRUE(accepts_benign);
    EXPECT_TRUE(rejects_escape);
    EXPECT_TRUE(composed) << display(doc.value());
    EXPECT_TRUE(unchanged);
}
