#include "helpers.hpp"

using namespace armorparse;
using testutil::expect_error;
using testutil::slurp;

namespace {

const EncodeTable& tag_text_table() {
    static Grammar g = [] {
        auto r = parse_grammar(testutil::slurp("grammars/tag.grm"));
        if (!r.ok()) throw std::runtime_error(r.error().to_string());
        return r.take();
    }();
    return *g.table("TEXT");
}

const EncodeTable& container_table() {
    static Grammar g = [] {
        auto r = parse_grammar(testutil::slurp("grammars/container.grm"));
        if (!r.ok()) throw std::runtime_error(r.error().to_string());
        return r.take();
    }();
    return *g.table("TagsToken");
}

} // namespace

TEST(Codec, TagTableEncode) {
    const EncodeTable& t = tag_text_table();
    EXPECT_EQ(encode("a,b", t), "a\\,b");
    EXPECT_EQ(encode("<i>x", t), "\\<i\\>x");
    EXPECT_EQ(encode("\\", t), "\\\\");
    EXPECT_EQ(encode("", t), "");
    EXPECT_EQ(encode("plain", t), "plain");
    EXPECT_EQ(encode("caf\xC3\xA9", t), "caf\xC3\xA9");
}

TEST(Codec, TagTableDecode) {
    const EncodeTable& t = tag_text_table();
    auto d = decode("a\\,b", t);
    ASSERT_OK(d);
    EXPECT_EQ(d.value(), "a,b");
    d = decode("\\<i\\>x", t);
    ASSERT_OK(d);
    EXPECT_EQ(d.value(), "<i>x");
    d = decode("plain", t);
    ASSERT_OK(d);
    EXPECT_EQ(d.value(), "plain");
}

TEST(Codec, DecodeErrors) {
    const EncodeTable& t = tag_text_table();
    // a lead that does not start any complete escape
    expect_error(decode("a\\zb", t), "decode-dangling-lead");
    // a lead cut off by end of input
    expect_error(decode("a\\", t), "decode-dangling-lead");
    // a bare control that is not a lead
    expect_error(decode("a,b", t), "decode-raw-control");
    expect_error(decode("<x", t), "decode-raw-control");
}

// decode(encode(s)) = s for every string of length <= 4 over the alphabet
// {a, <, >, comma, backslash}: 1 + 5 + 25 + 125 + 625 = 781 strings. The
// encoded form must also be a valid TEXT token whenever it is nonempty.
TEST(Codec, ExhaustiveInverseLenLe4) {
    const EncodeTable& t = tag_text_table();
    auto set = testutil::tag_set();
    const CompiledGrammar* g = set.grammar("Tag");
    const char alphabet[] = {'a', '<', '>', ',', '\\'};
    long checked = 0;
    std::vector<std::string> level{""};
    for (int len = 0; len <= 4; ++len) {
        std::vector<std::string> next;
        for (const auto& s : level) {
            std::string enc = encode(s, t);
            auto dec = decode(enc, t);
            ASSERT_OK(dec) << "s=" << display(s) << " enc=" << display(enc);
            ASSERT_EQ(dec.value(), s) << "enc=" << display(enc);
            if (!s.empty())
                ASSERT_TRUE(g->token_accepts("TEXT", enc))
                    << "enc=" << display(enc);
            ++checked;
            if (len < 4)
                for (char c : alphabet) next.push_back(s + c);
        }
        level = std::move(next);
    }
    EXPECT_EQ(checked, 781);
}

TEST(Codec, MultiCharEscapeTable) {
    const EncodeTable& t = container_table();
    EXPECT_EQ(encode("{ }", t), "&#x007B;&#x0020;&#x007D;");
    EXPECT_EQ(encode("a&b", t), "a&#x0026;b");
    auto d = decode("&#x007B;&#x0020;&#x007D;", t);
    ASSERT_OK(d);
    EXPECT_EQ(d.value(), "{ }");
    // truncated escape: & is the lead of every escape in this table
    expect_error(decode("&#x007B", t), "decode-dangling-lead");
    expect_error(decode("abc&", t), "decode-dangling-lead");
    // { and } are controls but never escape leads
    expect_error(decode("{", t), "decode-raw-control");
    expect_error(decode("x}", t), "decode-raw-control");
}

TEST(Codec, DecodeTakesLongestEscape) {
    // Two escapes where one is a strict prefix of the other would be
    // rejected by validation; longest-match still matters when one escape's
    // tail begins like another escape. &#x0026; must decode as one unit.
    const EncodeTable& t = container_table();
    auto d = decode("&#x0026;#x007B;", t);
    ASSERT_OK(d);
    EXPECT_EQ(d.value(), "&#x007B;"); // the second "escape" was data
}

TEST(Codec, RegistryOverrides) {
    CodecRegistry reg;
    EXPECT_TRUE(reg.empty());
    EXPECT_EQ(reg.find("Tag", "TEXT"), nullptr);
    Codec toy;
    toy.encode = [](std::string_view s) { return "E" + std::string(s); };
    toy.decode = [](std::string_view s) -> Result<std::string> {
        if (s.empty() || s[0] != 'E')
            return Result<std::string>::fail("decode-raw-control",
                                             "missing marker");
        return std::string(s.substr(1));
    };
    reg.add("Tag", "TEXT", toy);
    EXPECT_FALSE(reg.empty());
    const Codec* found = reg.find("Tag", "TEXT");
    ASSERT_NE(found, nullptr);
    EXPECT_EQ(found->encode("x"), "Ex");
    EXPECT_EQ(reg.find("Tag", "OTHER"), nullptr);
    EXPECT_EQ(reg.find("Other", "TEXT"), nullptr);
}
