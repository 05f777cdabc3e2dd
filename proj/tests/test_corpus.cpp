#include <sstream>

#include "helpers.hpp"

using namespace armorparse;
using testutil::corpus_path;
using testutil::expect_error;
using testutil::slurp;

TEST(Corpus, SelftestIsGreen) {
    std::ostringstream out;
    int failures = selftest(corpus_path(""), out);
    EXPECT_EQ(failures, 0) << out.str();
    EXPECT_NE(out.str().find("SELFTEST failures=0"), std::string::npos);
    // one PASS line per check, no FAIL lines
    EXPECT_EQ(out.str().find("FAIL"), std::string::npos) << out.str();
}

TEST(Corpus, ManifestResolvesGrammarFilesByName) {
    // html.grm alone plus the manifest: the five JavaScript grammars are
    // found on disk next to the root grammar.
    auto set = load_set({corpus_path("grammars/html.grm")},
                        corpus_path("manifests/html_js.compose"));
    ASSERT_OK(set);
    EXPECT_EQ(set.value().all().size(), 6u);
    EXPECT_NE(set.value().grammar("JsSqStr"), nullptr);
    EXPECT_NE(set.value().grammar("OnclickAttr"), nullptr);
    EXPECT_EQ(set.value().all().front()->name(), "Html");
}

TEST(Corpus, ManifestRefsInOrderOfFirstMention) {
    auto refs = manifest_grammar_refs(slurp("manifests/html_js.compose"));
    ASSERT_OK(refs);
    std::vector<std::string> want{"Html",     "OnclickAttr", "JsScript",
                                  "JsAttr",   "JsSqStr",     "JsDqStr"};
    EXPECT_EQ(refs.value(), want);

    expect_error(manifest_grammar_refs("compose { Html.X -> }"),
                 "meta-syntax");
    expect_error(manifest_grammar_refs("nonsense"), "meta-syntax");
}

TEST(Corpus, MissingGrammarIsReported) {
    std::string dir = "/tmp/armorparse-missing-grammar";
    std::filesystem::create_directories(dir);
    std::ofstream(dir + "/m.compose")
        << "compose { Tag.TEXT -> Phantom; }";
    auto set = load_set({corpus_path("grammars/tag.grm")}, dir + "/m.compose");
    expect_error(set, "compose-missing-grammar");
}

TEST(Corpus, IoErrors) {
    expect_error(read_file("/nonexistent/armorparse.grm"), "io-open");
    auto g = load_grammar_file(corpus_path("manifests/html_js.compose"));
    ASSERT_FALSE(g.ok());
    // the offending path is carried in the message
    EXPECT_NE(g.error().message.find("html_js.compose"), std::string::npos);
}

TEST(Corpus, PayloadFiles) {
    auto xss = load_payloads(slurp("attacks/xss.txt"));
    ASSERT_OK(xss);
    EXPECT_EQ(xss.value().size(), 122u);
    auto fuzzdb = load_payloads(slurp("attacks/fuzzdb_subset.txt"));
    ASSERT_OK(fuzzdb);
    EXPECT_EQ(fuzzdb.value().size(), 11u);

    // escape forms resolve to raw bytes
    auto esc = load_payloads("a\\u0041b\nc\\\\d\n\nplain\n");
    ASSERT_OK(esc);
    ASSERT_EQ(esc.value().size(), 3u);
    EXPECT_EQ(esc.value()[0], "aAb");
    EXPECT_EQ(esc.value()[1], "c\\d");
    EXPECT_EQ(esc.value()[2], "plain");

    // a payload in the corpus exercises the escape path
    bool has_null_escape = false;
    for (const auto& p : xss.value())
        if (p.find('\0') != std::string::npos) has_null_escape = true;
    EXPECT_TRUE(has_null_escape);
}

TEST(Corpus, AttackRunsAreClean) {
    auto set = testutil::html_set();
    auto tpl = load_template(set, "Html", slurp("templates/page.tpl"));
    ASSERT_OK(tpl);

    for (const char* file : {"attacks/xss.txt", "attacks/fuzzdb_subset.txt"}) {
        auto payloads = load_payloads(slurp(file));
        ASSERT_OK(payloads);
        std::ostringstream out;
        auto rep = attack_run(set, tpl.value(), payloads.value(), out);
        EXPECT_EQ(rep.failures, 0) << file << "\n" << out.str();
        EXPECT_EQ(rep.cases,
                  static_cast<int>(payloads.value().size()) * 2)
            << file;
    }
}

TEST(Corpus, AttackRunCatchesABrokenTable) {
    // Same run against a deliberately broken HTMLTEXT table: the attack
    // payloads must break structure and be reported.
    auto src = load_sources({corpus_path("grammars/html.grm")},
                            corpus_path("manifests/html_js.compose"));
    ASSERT_OK(src);
    auto m = parse_mutation("drop-rule:HTMLTEXT:<");
    ASSERT_OK(m);
    for (auto& g : src.value().grammars) {
        if (g.name != "Html") continue;
        auto bad = apply_mutation(std::move(g), m.value());
        ASSERT_OK(bad);
        g = bad.take();
    }
    auto set = build_set(src.take(), false);
    ASSERT_OK(set);
    auto tpl =
        load_template(set.value(), "Html", slurp("templates/page.tpl"));
    ASSERT_OK(tpl);
    auto payloads = load_payloads(slurp("attacks/xss.txt"));
    ASSERT_OK(payloads);
    std::ostringstream out;
    auto rep = attack_run(set.value(), tpl.value(), payloads.value(), out);
    EXPECT_GT(rep.failures, 0);
}

TEST(Corpus, PayloadLineErrorsNameTheLine) {
    // malformed \u sequences pass through as literal text...
    auto lenient = load_payloads("\\u12 \\uQQQQ");
    ASSERT_OK(lenient);
    EXPECT_EQ(lenient.value()[0], "\\u12 \\uQQQQ");
    // ...but an unpaired surrogate cannot become UTF-8 and names its line
    auto bad = load_payloads("fine\n\\ud800oops");
    ASSERT_FALSE(bad.ok());
    EXPECT_EQ(bad.error().code, "payload-surrogate");
    EXPECT_NE(bad.error().message.find("line 2"), std::string::npos)
        << bad.error().message;
}
