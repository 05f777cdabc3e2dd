#ifndef ARMORPARSE_TESTS_HELPERS_HPP
#define ARMORPARSE_TESTS_HELPERS_HPP

#include <gtest/gtest.h>

#include <string>
#include <vector>

#include <armorparse/armorparse.hpp>

#ifndef ARMORPARSE_CORPUS_DIR
#error "build must define ARMORPARSE_CORPUS_DIR"
#endif

namespace testutil {

using namespace armorparse;

inline std::string corpus_path(const std::string& rel) {
    return std::string(ARMORPARSE_CORPUS_DIR) + "/" + rel;
}

inline std::string slurp(const std::string& rel) {
    auto r = read_file(corpus_path(rel));
    if (!r.ok()) {
        ADD_FAILURE() << "cannot read " << rel << ": "
                      << r.error().to_string();
        return "";
    }
    return r.take();
}

inline CompositionSet tag_set() {
    auto s = load_set({corpus_path("grammars/tag.grm")});
    if (!s.ok()) throw std::runtime_error(s.error().to_string());
    return s.take();
}

inline CompositionSet tag_reduced_set() {
    auto s = load_set({corpus_path("grammars/tag_reduced.grm")});
    if (!s.ok()) throw std::runtime_error(s.error().to_string());
    return s.take();
}

inline CompositionSet container_set() {
    auto s = load_set({corpus_path("grammars/container.grm")},
                      corpus_path("manifests/container_tag.compose"));
    if (!s.ok()) throw std::runtime_error(s.error().to_string());
    return s.take();
}

inline CompositionSet html_set() {
    auto s = load_set({corpus_path("grammars/html.grm")},
                      corpus_path("manifests/html_js.compose"));
    if (!s.ok()) throw std::runtime_error(s.error().to_string());
    return s.take();
}

// Small grammars defined inline in tests.
inline CompositionSet compile_inline(const std::string& src) {
    auto g = parse_grammar(src);
    if (!g.ok()) throw std::runtime_error(g.error().to_string());
    auto cg = CompiledGrammar::compile(g.take());
    if (!cg.ok()) throw std::runtime_error(cg.error().to_string());
    return CompositionSet::single(cg.take());
}

template <typename T>
void expect_error(const Result<T>& r, const std::string& code) {
    ASSERT_FALSE(r.ok()) << "expected error " << code;
    EXPECT_EQ(r.error().code, code) << r.error().to_string();
}

inline bool has_error(const Diagnostics& d, const std::string& code) {
    for (const auto& item : d.items())
        if (item.severity == Severity::Error && item.code == code) return true;
    return false;
}

inline bool has_warning(const Diagnostics& d, const std::string& code) {
    for (const auto& item : d.items())
        if (item.severity == Severity::Warning && item.code == code)
            return true;
    return false;
}

} // namespace testutil

#define ASSERT_OK(r) ASSERT_TRUE((r).ok()) << (r).error().to_string()
#define EXPECT_OK(r) EXPECT_TRUE((r).ok()) << (r).error().to_string()

#endif
