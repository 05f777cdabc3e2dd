#include <sstream>

#include "helpers.hpp"

using namespace armorparse;

namespace {

FuzzReport run(const CompositionSet& set, const std::string& root, int cases,
               std::uint64_t seed, std::string* log = nullptr) {
    FuzzOptions opts;
    opts.cases = cases;
    opts.seed = seed;
    opts.verbose = true;
    std::ostringstream out;
    FuzzReport r = fuzz_roundtrip(set, root, opts, out);
    if (log) *log = out.str();
    return r;
}

CompositionSet mutated_tag_set(const std::string& spec) {
    auto g = parse_grammar(testutil::slurp("grammars/tag.grm"));
    if (!g.ok()) throw std::runtime_error(g.error().to_string());
    auto m = parse_mutation(spec);
    if (!m.ok()) throw std::runtime_error(m.error().to_string());
    auto bad = apply_mutation(g.take(), m.value());
    if (!bad.ok()) throw std::runtime_error(bad.error().to_string());
    auto cg = CompiledGrammar::compile_unchecked(bad.take());
    if (!cg.ok()) throw std::runtime_error(cg.error().to_string());
    return CompositionSet::single(cg.value());
}

} // namespace

TEST(Fuzz, TagGrammarRoundTrips) {
    std::string log;
    FuzzReport r = run(testutil::tag_set(), "Tag", 300, 11, &log);
    EXPECT_EQ(r.cases, 300);
    EXPECT_EQ(r.violations, 0) << log;
}

TEST(Fuzz, ContainerCompositionRoundTrips) {
    std::string log;
    FuzzReport r = run(testutil::container_set(), "Container", 200, 12, &log);
    EXPECT_EQ(r.cases, 200);
    EXPECT_EQ(r.violations, 0) << log;
}

TEST(Fuzz, HtmlCompositionRoundTrips) {
    std::string log;
    FuzzReport r = run(testutil::html_set(), "Html", 150, 13, &log);
    EXPECT_EQ(r.cases, 150);
    EXPECT_EQ(r.violations, 0) << log;
}

TEST(Fuzz, SameSeedSameReport) {
    std::string a, b;
    run(testutil::tag_set(), "Tag", 50, 99, &a);
    run(testutil::tag_set(), "Tag", 50, 99, &b);
    EXPECT_EQ(a, b);
    std::string c;
    run(testutil::tag_set(), "Tag", 50, 100, &c);
    EXPECT_NE(a, c);
}

TEST(Fuzz, ReportsMatchLogLines) {
    std::string log;
    FuzzReport r = run(testutil::tag_set(), "Tag", 40, 5, &log);
    int pass = 0;
    for (std::size_t at = log.find("PASS"); at != std::string::npos;
         at = log.find("PASS", at + 1))
        ++pass;
    EXPECT_EQ(pass, r.cases - r.violations);
    EXPECT_NE(log.find("SUMMARY cases=40 violations=0"), std::string::npos)
        << log;
}

TEST(Fuzz, DroppedRuleIsDetected) {
    std::string log;
    FuzzReport r =
        run(mutated_tag_set("drop-rule:TEXT:<"), "Tag", 200, 11, &log);
    EXPECT_GT(r.violations, 0);
    EXPECT_NE(log.find("unparse-invalid-leaf"), std::string::npos) << log;
}

TEST(Fuzz, SwappedEscapesAreDetected) {
    std::string log;
    FuzzReport r =
        run(mutated_tag_set("swap-escapes:TEXT:<:>"), "Tag", 200, 11, &log);
    EXPECT_GT(r.violations, 0) << log;
}

TEST(Fuzz, BrokenLeadIsDetected) {
    std::string log;
    FuzzReport r =
        run(mutated_tag_set("break-lead:TEXT:<"), "Tag", 200, 11, &log);
    EXPECT_GT(r.violations, 0) << log;
}
