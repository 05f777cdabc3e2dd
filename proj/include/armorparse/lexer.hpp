#ifndef ARMORPARSE_LEXER_HPP
#define ARMORPARSE_LEXER_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "diagnostics.hpp"
#include "grammar.hpp"
#include "text.hpp"

namespace armorparse {

// ---------------------------------------------------------------------------
// Character sets over Unicode scalars, kept as sorted disjoint ranges.
// ---------------------------------------------------------------------------

struct CharRange {
    char32_t lo;
    char32_t hi; // inclusive
};

class CharSet {
  public:
    static CharSet single(char32_t c) {
        CharSet s;
        s.ranges_.push_back({c, c});
        return s;
    }

    static CharSet all() {
        CharSet s;
        s.ranges_.push_back({0, 0xD7FF});
        s.ranges_.push_back({0xE000, kMaxScalar});
        return s;
    }

    void add(char32_t lo, char32_t hi) {
        ranges_.push_back({lo, hi});
        normalize();
    }

    void add(const CharSet& other) {
        for (const auto& r : other.ranges_) ranges_.push_back(r);
        normalize();
    }

    bool contains(char32_t c) const {
        for (const auto& r : ranges_) {
            if (c < r.lo) return false;
            if (c <= r.hi) return true;
        }
        return false;
    }

    bool empty() const { return ranges_.empty(); }

    // Number of scalars in the set.
    unsigned long long size() const {
        unsigned long long n = 0;
        for (const auto& r : ranges_) n += (unsigned long long)(r.hi - r.lo) + 1;
        return n;
    }

    CharSet complement() const {
        CharSet uni = all();
        CharSet out;
        for (const auto& u : uni.ranges_) {
            char32_t lo = u.lo;
            for (const auto& r : ranges_) {
                if (r.hi < u.lo || r.lo > u.hi) continue;
                if (r.lo > lo) out.ranges_.push_back({lo, r.lo - 1});
                lo = r.hi + 1 > lo ? r.hi + 1 : lo;
            }
            if (lo <= u.hi) out.ranges_.push_back({lo, u.hi});
        }
        out.normalize();
        return out;
    }

    const std::vector<CharRange>& ranges() const { return ranges_; }

  private:
    void normalize() {
        if (ranges_.empty()) return;
        std::sort(ranges_.begin(), ranges_.end(),
                  [](const CharRange& a, const CharRange& b) {
                      return a.lo < b.lo;
                  });
        std::vector<CharRange> merged;
        for (const auto& r : ranges_) {
            if (!merged.empty() && r.lo <= merged.back().hi + 1 &&
                merged.back().hi + 1 != 0) {
                if (r.hi > merged.back().hi) merged.back().hi = r.hi;
            } else {
                merged.push_back(r);
            }
        }
        ranges_ = std::move(merged);
    }

    std::vector<CharRange> ranges_;
};

// If the expression's language is a set of single characters, returns that
// set. Used to give meaning to ~(...) complements.
inline std::optional<CharSet> expr_char_set(const TokenExpr& e) {
    switch (e.kind) {
        case TokenExprKind::Chars:
            if (e.chars.size() != 1) return std::nullopt;
            return CharSet::single(e.chars[0]);
        case TokenExprKind::Alt: {
            CharSet s;
            for (const auto& c : e.children) {
                auto cs = expr_char_set(*c);
                if (!cs) return std::nullopt;
                s.add(*cs);
            }
            return s;
        }
        case TokenExprKind::Complement: {
            auto cs = expr_char_set(*e.children[0]);
            if (!cs) return std::nullopt;
            return cs->complement();
        }
        case TokenExprKind::Seq:
            if (e.children.size() == 1) return expr_char_set(*e.children[0]);
            return std::nullopt;
        default:
            return std::nullopt;
    }
}

// ---------------------------------------------------------------------------
// Thompson construction and subset DFA.
// ---------------------------------------------------------------------------

namespace detail {

struct Nfa {
    struct State {
        std::vector<std::pair<CharSet, int>> edges;
        std::vector<int> eps;
    };
    std::vector<State> states;
    int start = 0;
    int accept = 0;

    int add_state() {
        states.push_back({});
        return static_cast<int>(states.size()) - 1;
    }
};

struct NfaFrag {
    int start;
    int accept;
};

inline Result<NfaFrag> build_nfa(Nfa& nfa, const TokenExpr& e) {
    using R = Result<NfaFrag>;
    switch (e.kind) {
        case TokenExprKind::Chars: {
            int s = nfa.add_state();
            int cur = s;
            for (char32_t cp : e.chars) {
                int nxt = nfa.add_state();
                nfa.states[cur].edges.push_back({CharSet::single(cp), nxt});
                cur = nxt;
            }
            return NfaFrag{s, cur};
        }
        case TokenExprKind::Complement: {
            auto cs = expr_char_set(e);
            if (!cs)
                return R::fail("token-complement",
                               "~ needs a single-character alternation");
            int s = nfa.add_state();
            int a = nfa.add_state();
            nfa.states[s].edges.push_back({*cs, a});
            return NfaFrag{s, a};
        }
        case TokenExprKind::Seq: {
            int s = -1, a = -1;
            for (const auto& c : e.children) {
                auto f = build_nfa(nfa, *c);
                if (!f) return f;
                if (s < 0) {
                    s = f.value().start;
                } else {
                    nfa.states[a].eps.push_back(f.value().start);
                }
                a = f.value().accept;
            }
            return NfaFrag{s, a};
        }
        case TokenExprKind::Alt: {
            int s = nfa.add_state();
            int a = nfa.add_state();
            for (const auto& c : e.children) {
                auto f = build_nfa(nfa, *c);
                if (!f) return f;
                nfa.states[s].eps.push_back(f.value().start);
                nfa.states[f.value().accept].eps.push_back(a);
            }
            return NfaFrag{s, a};
        }
        case TokenExprKind::Star:
        case TokenExprKind::Plus:
        case TokenExprKind::Opt: {
            auto f = build_nfa(nfa, *e.children[0]);
            if (!f) return f;
            int s = nfa.add_state();
            int a = nfa.add_state();
            nfa.states[s].eps.push_back(f.value().start);
            nfa.states[f.value().accept].eps.push_back(a);
            if (e.kind != TokenExprKind::Plus)
                nfa.states[s].eps.push_back(a);
            if (e.kind != TokenExprKind::Opt)
                nfa.states[f.value().accept].eps.push_back(f.value().start);
            return NfaFrag{s, a};
        }
    }
    return R::fail("token-internal", "unreachable expression kind");
}

} // namespace detail

struct Dfa {
    struct State {
        std::vector<std::pair<CharRange, int>> edges; // sorted by lo
        bool accept = false;
    };
    std::vector<State> states; // empty when the language is empty
    int start = -1;

    int step(int state, char32_t c) const {
        const auto& es = states[state].edges;
        for (const auto& [r, t] : es) {
            if (c < r.lo) return -1;
            if (c <= r.hi) return t;
        }
        return -1;
    }
};

// Compiled recognizer for one token. Transitions lead only to states from
// which acceptance is still reachable, so a failed step is final.
class TokenMatcher {
  public:
    static Result<TokenMatcher> compile(const TokenExpr& expr) {
        using R = Result<TokenMatcher>;
        detail::Nfa nfa;
        auto frag = detail::build_nfa(nfa, expr);
        if (!frag) return R(frag.error());
        int accept_id = frag.value().accept;

        auto closure = [&](std::set<int> s) {
            std::vector<int> work(s.begin(), s.end());
            while (!work.empty()) {
                int q = work.back();
                work.pop_back();
                for (int t : nfa.states[q].eps) {
                    if (s.insert(t).second) work.push_back(t);
                }
            }
            return s;
        };

        std::map<std::set<int>, int> ids;
        std::vector<std::set<int>> sets;
        Dfa dfa;
        auto intern = [&](std::set<int> s) {
            auto it = ids.find(s);
            if (it != ids.end()) return it->second;
            int id = static_cast<int>(sets.size());
            ids.emplace(s, id);
            sets.push_back(std::move(s));
            dfa.states.push_back({});
            dfa.states.back().accept = sets.back().count(accept_id) > 0;
            return id;
        };

        dfa.start = intern(closure({frag.value().start}));
        for (std::size_t qi = 0; qi < sets.size(); ++qi) {
            // Atomic boundaries over all outgoing ranges of the set.
            std::set<char32_t> bounds;
            for (int q : sets[qi]) {
                for (const auto& [cs, t] : nfa.states[q].edges) {
                    for (const auto& r : cs.ranges()) {
                        bounds.insert(r.lo);
                        if (r.hi + 1 != 0) bounds.insert(r.hi + 1);
                    }
                }
            }
            std::vector<char32_t> bs(bounds.begin(), bounds.end());
            for (std::size_t bi = 0; bi + 1 <= bs.size(); ++bi) {
                char32_t lo = bs[bi];
                char32_t hi =
                    (bi + 1 < bs.size()) ? bs[bi + 1] - 1 : kMaxScalar;
                std::set<int> target;
                for (int q : sets[qi]) {
                    for (const auto& [cs, t] : nfa.states[q].edges) {
                        if (cs.contains(lo)) target.insert(t);
                    }
                }
                if (target.empty()) continue;
                int tid = intern(closure(std::move(target)));
                dfa.states[qi].edges.push_back({{lo, hi}, tid});
            }
            std::sort(dfa.states[qi].edges.begin(), dfa.states[qi].edges.end(),
                      [](const auto& a, const auto& b) {
                          return a.first.lo < b.first.lo;
                      });
            // Merge adjacent ranges with the same target.
            auto& es = dfa.states[qi].edges;
            std::vector<std::pair<CharRange, int>> merged;
            for (const auto& e : es) {
                if (!merged.empty() && merged.back().second == e.second &&
                    merged.back().first.hi + 1 == e.first.lo) {
                    merged.back().first.hi = e.first.hi;
                } else {
                    merged.push_back(e);
                }
            }
            es = std::move(merged);
        }

        TokenMatcher m;
        m.dfa_ = trim(dfa);
        return m;
    }

    bool language_empty() const { return dfa_.start < 0; }

    bool accepts_empty() const {
        return dfa_.start >= 0 && dfa_.states[dfa_.start].accept;
    }

    // Whole-string acceptance. Invalid UTF-8 never matches.
    bool accepts(std::string_view s) const {
        if (dfa_.start < 0) return false;
        int q = dfa_.start;
        std::size_t pos = 0;
        while (pos < s.size()) {
            char32_t cp = utf8_decode(s, pos);
            if (cp == 0xFFFFFFFF) return false;
            q = dfa_.step(q, cp);
            if (q < 0) return false;
        }
        return dfa_.states[q].accept;
    }

    // Longest nonempty accepted prefix of doc starting at pos, in bytes.
    std::optional<std::size_t> match_prefix(std::string_view doc,
                                            std::size_t pos) const {
        if (dfa_.start < 0) return std::nullopt;
        int q = dfa_.start;
        std::size_t cur = pos;
        std::optional<std::size_t> best;
        while (cur < doc.size()) {
            char32_t cp = utf8_decode(doc, cur);
            if (cp == 0xFFFFFFFF) break;
            q = dfa_.step(q, cp);
            if (q < 0) break;
            if (dfa_.states[q].accept) best = cur - pos;
        }
        return best;
    }

    // If the language contains exactly one string, returns it.
    std::optional<std::string> constant_text() const {
        if (dfa_.start < 0) return std::nullopt;
        std::string out;
        int q = dfa_.start;
        std::set<int> seen;
        while (true) {
            if (!seen.insert(q).second) return std::nullopt; // cycle
            const auto& st = dfa_.states[q];
            if (st.accept) {
                if (st.edges.empty()) return out;
                return std::nullopt; // longer strings exist
            }
            if (st.edges.size() != 1) return std::nullopt;
            const auto& [r, t] = st.edges[0];
            if (r.lo != r.hi) return std::nullopt;
            utf8_append(out, r.lo);
            q = t;
        }
    }

    const Dfa& dfa() const { return dfa_; }

  private:
    // Drops states from which no accepting state is reachable.
    static Dfa trim(const Dfa& in) {
        std::size_t n = in.states.size();
        std::vector<bool> live(n, false);
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t i = 0; i < n; ++i) {
                if (live[i]) continue;
                bool l = in.states[i].accept;
                for (const auto& [r, t] : in.states[i].edges)
                    if (live[t]) l = true;
                if (l) {
                    live[i] = true;
                    changed = true;
                }
            }
        }
        Dfa out;
        if (in.start < 0 || !live[in.start]) return out;
        std::vector<int> map(n, -1);
        for (std::size_t i = 0; i < n; ++i) {
            if (live[i]) {
                map[i] = static_cast<int>(out.states.size());
                out.states.push_back({});
                out.states.back().accept = in.states[i].accept;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!live[i]) continue;
            for (const auto& [r, t] : in.states[i].edges) {
                if (live[t])
                    out.states[map[i]].edges.push_back({r, map[t]});
            }
        }
        out.start = map[in.start];
        return out;
    }

    Dfa dfa_;
};

} // namespace armorparse

#endif
