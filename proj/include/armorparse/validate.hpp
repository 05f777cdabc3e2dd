#ifndef ARMORPARSE_VALIDATE_HPP
#define ARMORPARSE_VALIDATE_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "codec.hpp"
#include "diagnostics.hpp"
#include "grammar.hpp"
#include "lexer.hpp"
#include "text.hpp"

namespace armorparse {

namespace detail {

inline std::size_t scalar_count(std::string_view s) {
    std::size_t n = 0, pos = 0;
    while (pos < s.size()) {
        if (utf8_decode(s, pos) == 0xFFFFFFFF) return static_cast<std::size_t>(-1);
        ++n;
    }
    return n;
}

} // namespace detail

// Checks one encode table against the already-compiled matcher of its token.
//
// Beyond injectivity, the self-protecting lead and non-reintroduction, every
// escape must be free of other escapes' prefixes: with a lead that is itself
// a one-character control, prefix-freedom is exactly what makes the
// longest-match decode a two-sided inverse of encode. The per-rule encode and
// decode probes at the end re-verify that property mechanically.
inline Diagnostics validate_table(const EncodeTable& table,
                                  const TokenMatcher& matcher) {
    Diagnostics d;
    const std::string where = "table for " + table.token + ": ";

    for (const auto& r : table.rules) {
        if (detail::scalar_count(r.control) != 1)
            d.error("table-control-not-char",
                    where + "control '" + display(r.control) +
                        "' must be exactly one character");
        if (r.escape.empty())
            d.error("table-empty-escape",
                    where + "control '" + display(r.control) +
                        "' maps to an empty escape");
        if (!utf8_valid(r.escape))
            d.error("table-escape-encoding",
                    where + "escape for '" + display(r.control) +
                        "' is not valid UTF-8");
    }
    if (d.has_errors()) return d;

    for (std::size_t i = 0; i < table.rules.size(); ++i) {
        for (std::size_t j = i + 1; j < table.rules.size(); ++j) {
            if (table.rules[i].control == table.rules[j].control)
                d.error("table-duplicate-control",
                        where + "control '" +
                            display(table.rules[i].control) +
                            "' has two rules");
            if (table.rules[i].escape == table.rules[j].escape)
                d.error("table-duplicate-escape",
                        where + "escape '" + display(table.rules[i].escape) +
                            "' serves two controls");
        }
    }

    auto is_control = [&](std::string_view s) {
        for (const auto& r : table.rules)
            if (r.control == s) return true;
        return false;
    };

    for (const auto& r : table.rules) {
        // Self-protecting lead: the first character of the escape must be a
        // control of this very table, so a truncated escape can never pass
        // the decoder.
        std::size_t pos = 0;
        utf8_decode(r.escape, pos);
        std::string_view lead = std::string_view(r.escape).substr(0, pos);
        if (!is_control(lead))
            d.error("table-escape-lead",
                    where + "escape '" + display(r.escape) + "' for '" +
                        display(r.control) +
                        "' does not start with a control character");

        // Non-reintroduction: no other rule's control may occur inside the
        // escape, except as that lead character.
        for (const auto& other : table.rules) {
            if (other.control == r.control) continue;
            std::size_t at = r.escape.find(other.control);
            while (at != std::string::npos) {
                bool lead_position =
                    at == 0 && r.escape.size() > other.control.size();
                if (!lead_position) {
                    d.error("table-reintroduction",
                            where + "escape '" + display(r.escape) +
                                "' for '" + display(r.control) +
                                "' reintroduces control '" +
                                display(other.control) + "'");
                    break;
                }
                at = r.escape.find(other.control, at + 1);
            }
        }
    }

    // Prefix-freedom between distinct escapes.
    for (std::size_t i = 0; i < table.rules.size(); ++i) {
        for (std::size_t j = 0; j < table.rules.size(); ++j) {
            if (i == j) continue;
            const std::string& a = table.rules[i].escape;
            const std::string& b = table.rules[j].escape;
            if (a.size() < b.size() && b.compare(0, a.size(), a) == 0)
                d.error("table-escape-prefix",
                        where + "escape '" + display(a) +
                            "' is a prefix of escape '" + display(b) + "'");
        }
    }

    // Escapes must stay inside the token language, or encoding would produce
    // text the token cannot carry.
    for (const auto& r : table.rules) {
        if (!matcher.accepts(r.escape))
            d.error("table-escape-language",
                    where + "escape '" + display(r.escape) +
                        "' is not valid " + table.token + " text");
    }

    if (d.has_errors()) return d;

    // Mechanical round-trip probe of each rule.
    for (const auto& r : table.rules) {
        if (encode(r.control, table) != r.escape)
            d.error("table-rule-encode",
                    where + "encode('" + display(r.control) +
                        "') does not yield its escape");
        auto back = decode(r.escape, table);
        if (!back || back.value() != r.control)
            d.error("table-rule-decode",
                    where + "decode('" + display(r.escape) +
                        "') does not yield its control");
    }
    return d;
}

namespace detail {

struct SymbolSets {
    std::set<std::string> first, last; // named tokens only
    bool nullable = false;
};

class Adjacency {
  public:
    Adjacency(const Grammar& g,
              const std::map<std::string, SymbolSets>& prod_sets)
        : g_(g), prod_sets_(prod_sets) {}

    SymbolSets of(const ProdExpr& e) const {
        SymbolSets s;
        switch (e.kind) {
            case ProdExprKind::Ref: {
                auto it = prod_sets_.find(e.name);
                if (it != prod_sets_.end()) return it->second;
                if (g_.token(e.name)) {
                    s.first.insert(e.name);
                    s.last.insert(e.name);
                }
                return s;
            }
            case ProdExprKind::Keyword:
                return s;
            case ProdExprKind::Seq: {
                s.nullable = true;
                for (const auto& c : e.children) {
                    SymbolSets cs = of(*c);
                    if (s.nullable)
                        s.first.insert(cs.first.begin(), cs.first.end());
                    s.nullable = s.nullable && cs.nullable;
                }
                bool tail_nullable = true;
                for (auto it = e.children.rbegin(); it != e.children.rend();
                     ++it) {
                    SymbolSets cs = of(**it);
                    if (tail_nullable)
                        s.last.insert(cs.last.begin(), cs.last.end());
                    tail_nullable = tail_nullable && cs.nullable;
                }
                return s;
            }
            case ProdExprKind::Alt: {
                for (const auto& c : e.children) {
                    SymbolSets cs = of(*c);
                    s.first.insert(cs.first.begin(), cs.first.end());
                    s.last.insert(cs.last.begin(), cs.last.end());
                    s.nullable = s.nullable || cs.nullable;
                }
                return s;
            }
            case ProdExprKind::Star:
            case ProdExprKind::Opt: {
                s = of(*e.children[0]);
                s.nullable = true;
                return s;
            }
            case ProdExprKind::Plus:
                return of(*e.children[0]);
        }
        return s;
    }

  private:
    const Grammar& g_;
    const std::map<std::string, SymbolSets>& prod_sets_;
};

} // namespace detail

// Structural and table validation of a whole grammar. Errors make the
// grammar unusable; warnings flag shapes that undermine round-tripping.
inline Diagnostics validate_grammar(const Grammar& g) {
    Diagnostics d;

    // Token matchers.
    std::map<std::string, TokenMatcher> matchers;
    for (const auto& t : g.tokens) {
        auto m = TokenMatcher::compile(*t.expr);
        if (!m) {
            Diagnostic err = m.error();
            err.message = "token " + t.name + ": " + err.message;
            d.add(err);
            continue;
        }
        if (m.value().language_empty()) {
            d.error("token-empty-language",
                    "token " + t.name + " matches nothing");
            continue;
        }
        if (m.value().accepts_empty()) {
            d.error("token-nullable",
                    "token " + t.name +
                        " matches the empty string; tokenizing cannot "
                        "make progress");
            continue;
        }
        matchers.emplace(t.name, m.take());
    }

    // Symbol references.
    std::set<std::string> prod_names;
    for (const auto& p : g.productions) prod_names.insert(p.name);
    std::set<std::string> referenced;
    auto walk_refs = [&](const ProdExpr& e, const std::string& prod,
                         auto&& self) -> void {
        if (e.kind == ProdExprKind::Ref) {
            referenced.insert(e.name);
            if (!prod_names.count(e.name) && !g.token(e.name))
                d.error("ref-unknown", "production " + prod +
                                           " references unknown symbol " +
                                           e.name);
            return;
        }
        for (const auto& c : e.children) self(*c, prod, self);
    };
    for (const auto& p : g.productions) walk_refs(*p.body, p.name, walk_refs);

    // Tables must attach to declared tokens.
    for (const auto& t : g.tables) {
        if (!g.token(t.token)) {
            d.error("table-unknown-token",
                    "encode table for undeclared token " + t.token);
            continue;
        }
        auto it = matchers.find(t.token);
        if (it != matchers.end()) d.merge(validate_table(t, it->second));
    }

    // Options.
    static const std::set<std::string> known_options = {
        "nostring", "nomlcomments", "noslcomments", "noindent",
        "lexer lookahead"};
    for (const auto& o : g.options) {
        if (!known_options.count(o.name))
            d.warning("option-unknown", "unknown option " + o.name);
    }

    // Reachability from the root (first) production.
    if (!g.productions.empty()) {
        std::set<std::string> reach;
        std::vector<std::string> work{g.productions.front().name};
        reach.insert(work.front());
        auto collect = [&](const ProdExpr& e, auto&& self) -> void {
            if (e.kind == ProdExprKind::Ref) {
                if (prod_names.count(e.name) && reach.insert(e.name).second)
                    work.push_back(e.name);
                return;
            }
            for (const auto& c : e.children) self(*c, self);
        };
        while (!work.empty()) {
            std::string cur = work.back();
            work.pop_back();
            collect(*g.production(cur)->body, collect);
        }
        for (const auto& p : g.productions) {
            if (!reach.count(p.name))
                d.warning("unreachable-production",
                          "production " + p.name +
                              " is unreachable from " +
                              g.productions.front().name);
        }
    }

    for (const auto& t : g.tokens) {
        if (!referenced.count(t.name))
            d.warning("token-unused",
                      "token " + t.name +
                          " is never referenced by a production (it still "
                          "takes part in tokenizing)");
    }

    // Adjacent variable tokens cannot be split apart again after unparsing,
    // but only when the matcher can actually run past an accepted boundary
    // into a character that could start the token again. A token ending in a
    // delimiter it cannot contain never merges with its neighbour.
    if (!d.has_errors()) {
        auto self_mergeable = [](const Dfa& dfa) {
            if (dfa.start < 0) return false;
            const auto& entry = dfa.states[dfa.start].edges;
            for (const auto& st : dfa.states) {
                if (!st.accept) continue;
                for (const auto& [r, tgt] : st.edges) {
                    (void)tgt;
                    for (const auto& [er, etgt] : entry) {
                        (void)etgt;
                        if (r.lo <= er.hi && er.lo <= r.hi) return true;
                    }
                }
            }
            return false;
        };
        std::set<std::string> variable_tokens;
        for (const auto& t : g.tokens) {
            auto it = matchers.find(t.name);
            if (it != matchers.end() && !it->second.constant_text() &&
                self_mergeable(it->second.dfa()))
                variable_tokens.insert(t.name);
        }
        std::map<std::string, detail::SymbolSets> prod_sets;
        for (const auto& p : g.productions) prod_sets[p.name] = {};
        bool changed = true;
        while (changed) {
            changed = false;
            detail::Adjacency adj(g, prod_sets);
            for (const auto& p : g.productions) {
                detail::SymbolSets next = adj.of(*p.body);
                detail::SymbolSets& cur = prod_sets[p.name];
                if (next.first != cur.first || next.last != cur.last ||
                    next.nullable != cur.nullable) {
                    cur = next;
                    changed = true;
                }
            }
        }
        detail::Adjacency adj(g, prod_sets);
        std::set<std::string> reported;
        auto clash = [&](const ProdExpr& a, const ProdExpr& b,
                         const std::string& prod) {
            detail::SymbolSets sa = adj.of(a);
            detail::SymbolSets sb = adj.of(b);
            for (const auto& t : sa.last) {
                if (sb.first.count(t) && variable_tokens.count(t) &&
                    reported.insert(prod + ":" + t).second) {
                    d.warning("adjacent-data-tokens",
                              "production " + prod + " can place two " + t +
                                  " tokens side by side; they would merge "
                                  "when unparsed");
                }
            }
        };
        auto scan = [&](const ProdExpr& e, const std::string& prod,
                        auto&& self) -> void {
            if (e.kind == ProdExprKind::Seq) {
                for (std::size_t i = 0; i < e.children.size(); ++i) {
                    for (std::size_t j = i + 1; j < e.children.size(); ++j) {
                        clash(*e.children[i], *e.children[j], prod);
                        if (!adj.of(*e.children[j]).nullable) break;
                    }
                }
            }
            if (e.kind == ProdExprKind::Star || e.kind == ProdExprKind::Plus)
                clash(*e.children[0], *e.children[0], prod);
            for (const auto& c : e.children) self(*c, prod, self);
        };
        for (const auto& p : g.productions) scan(*p.body, p.name, scan);
    }

    return d;
}

// Coverage probe for one table: can every character of the working alphabet
// pass through encode and land inside the token language? The alphabet is
// printable ASCII, tab, newline, carriage return, every control of the
// table, and any extra characters the caller supplies.
inline Diagnostics check_table_completeness(const Grammar& g,
                                            const std::string& token_name,
                                            const std::u32string& extra = {}) {
    Diagnostics d;
    const EncodeTable* table = g.table(token_name);
    const TokenDef* tok = g.token(token_name);
    if (!tok) {
        d.error("table-unknown-token", "no token named " + token_name);
        return d;
    }
    auto m = TokenMatcher::compile(*tok->expr);
    if (!m) {
        d.add(m.error());
        return d;
    }
    std::u32string alphabet;
    for (char32_t c = 0x20; c <= 0x7E; ++c) alphabet += c;
    alphabet += U'\t';
    alphabet += U'\n';
    alphabet += U'\r';
    alphabet += extra;
    if (table) {
        for (const auto& r : table->rules) {
            std::size_t pos = 0;
            char32_t cp = utf8_decode(r.control, pos);
            if (cp != 0xFFFFFFFF) alphabet += cp;
        }
    }
    std::set<char32_t> seen;
    static const EncodeTable empty_table;
    for (char32_t c : alphabet) {
        if (!seen.insert(c).second) continue;
        std::string raw = utf8_encode(c);
        std::string enc = encode(raw, table ? *table : empty_table);
        if (!m.value().accepts(enc)) {
            d.error("table-incomplete",
                    "token " + token_name + ": character '" + display(raw) +
                        "' cannot be carried (encodes to '" + display(enc) +
                        "', which is not valid token text)");
        }
    }
    return d;
}

} // namespace armorparse

#endif
