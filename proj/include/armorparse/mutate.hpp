#ifndef ARMORPARSE_MUTATE_HPP
#define ARMORPARSE_MUTATE_HPP

#include <string>
#include <string_view>
#include <vector>

#include "grammar.hpp"
#include "text.hpp"

namespace armorparse {

// A deliberate defect injected into an encode table, used to demonstrate
// that the checks and round-trip tests actually catch broken tables.
//
//   drop-rule:TOKEN:C       remove the rule for control C
//   swap-escapes:TOKEN:A:B  give control A the escape of control B
//   break-lead:TOKEN:C      replace the first character of C's escape
//
// Control arguments accept \uHHHH and \\ escapes.
struct Mutation {
    enum class Kind { DropRule, SwapEscapes, BreakLead };
    Kind kind;
    std::string token;
    std::string a;
    std::string b;
};

namespace detail {

inline Result<std::string> mutation_arg(std::string_view raw) {
    return unescape_payload(raw);
}

} // namespace detail

inline Result<Mutation> parse_mutation(std::string_view spec) {
    using R = Result<Mutation>;
    std::vector<std::string> parts;
    std::string cur;
    for (char c : spec) {
        if (c == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);

    auto usage = [&](const char* form) {
        return R::fail("mutation-syntax",
                       std::string("expected ") + form + ", got '" +
                           std::string(spec) + "'");
    };
    if (parts.empty()) return usage("KIND:TOKEN:...");
    Mutation m;
    if (parts[0] == "drop-rule") {
        if (parts.size() != 3) return usage("drop-rule:TOKEN:CTRL");
        m.kind = Mutation::Kind::DropRule;
    } else if (parts[0] == "swap-escapes") {
        if (parts.size() != 4) return usage("swap-escapes:TOKEN:CTRL:CTRL");
        m.kind = Mutation::Kind::SwapEscapes;
    } else if (parts[0] == "break-lead") {
        if (parts.size() != 3) return usage("break-lead:TOKEN:CTRL");
        m.kind = Mutation::Kind::BreakLead;
    } else {
        return R::fail("mutation-syntax",
                       "unknown mutation kind '" + parts[0] + "'");
    }
    m.token = parts[1];
    auto a = detail::mutation_arg(parts[2]);
    if (!a) return a.forward<Mutation>();
    m.a = a.take();
    if (parts.size() > 3) {
        auto b = detail::mutation_arg(parts[3]);
        if (!b) return b.forward<Mutation>();
        m.b = b.take();
    }
    return m;
}

// Applies the mutation to a copy of the grammar. The result is intentionally
// invalid; compile it with CompiledGrammar::compile_unchecked.
inline Result<Grammar> apply_mutation(Grammar g, const Mutation& m) {
    using R = Result<Grammar>;
    EncodeTable* table = nullptr;
    for (auto& t : g.tables)
        if (t.token == m.token) table = &t;
    if (!table)
        return R::fail("mutation-unknown",
                       "no encode table for token " + m.token);

    auto rule_index = [&](const std::string& ctrl) -> int {
        for (std::size_t i = 0; i < table->rules.size(); ++i)
            if (table->rules[i].control == ctrl) return static_cast<int>(i);
        return -1;
    };

    switch (m.kind) {
    case Mutation::Kind::DropRule: {
        int i = rule_index(m.a);
        if (i < 0)
            return R::fail("mutation-unknown",
                           "table " + m.token + " has no rule for '" +
                               display(m.a) + "'");
        table->rules.erase(table->rules.begin() + i);
        return g;
    }
    case Mutation::Kind::SwapEscapes: {
        int i = rule_index(m.a);
        int j = rule_index(m.b);
        if (i < 0 || j < 0)
            return R::fail("mutation-unknown",
                           "table " + m.token + " lacks a rule for '" +
                               display(i < 0 ? m.a : m.b) + "'");
        table->rules[i].escape = table->rules[j].escape;
        return g;
    }
    case Mutation::Kind::BreakLead: {
        int i = rule_index(m.a);
        if (i < 0)
            return R::fail("mutation-unknown",
                           "table " + m.token + " has no rule for '" +
                               display(m.a) + "'");
        std::string& esc = table->rules[i].escape;
        // Swap the lead for a benign letter so the escape no longer starts
        // with a protected character.
        std::size_t n = 1;
        while (n < esc.size() && (esc[n] & 0xC0) == 0x80) ++n;
        esc = "a" + esc.substr(n);
        return g;
    }
    }
    return R::fail("mutation-syntax", "unreachable");
}

} // namespace armorparse

#endif
