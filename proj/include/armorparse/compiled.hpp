#ifndef ARMORPARSE_COMPILED_HPP
#define ARMORPARSE_COMPILED_HPP

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "diagnostics.hpp"
#include "grammar.hpp"
#include "lexer.hpp"
#include "text.hpp"
#include "validate.hpp"

namespace armorparse {

// One match of the flat tokenizer.
struct Token {
    int sym = -1; // symbol id within the grammar's symbol table
    std::string name;  // token name, or the keyword text itself
    bool is_keyword = false;
    int token_index = -1; // index into Grammar::tokens, -1 for keywords
    std::string text;     // raw matched bytes
    std::size_t offset = 0;
    int line = 1;
    int col = 1;
};

// Symbol ids: keywords first, then named tokens, then productions.
class SymbolTable {
  public:
    void build(const Grammar& g) {
        keywords_.clear();
        auto collect = [&](const ProdExpr& e, auto&& self) -> void {
            if (e.kind == ProdExprKind::Keyword) {
                if (keyword_id(e.text) < 0) keywords_.push_back(e.text);
                return;
            }
            for (const auto& c : e.children) self(*c, self);
        };
        for (const auto& p : g.productions) collect(*p.body, collect);
        n_tokens_ = static_cast<int>(g.tokens.size());
        n_prods_ = static_cast<int>(g.productions.size());
    }

    int keyword_id(const std::string& text) const {
        for (std::size_t i = 0; i < keywords_.size(); ++i)
            if (keywords_[i] == text) return static_cast<int>(i);
        return -1;
    }
    int token_sym(int token_index) const {
        return static_cast<int>(keywords_.size()) + token_index;
    }
    int prod_sym(int prod_index) const {
        return static_cast<int>(keywords_.size()) + n_tokens_ + prod_index;
    }
    bool is_keyword_sym(int sym) const {
        return sym >= 0 && sym < static_cast<int>(keywords_.size());
    }
    bool is_token_sym(int sym) const {
        return sym >= static_cast<int>(keywords_.size()) &&
               sym < static_cast<int>(keywords_.size()) + n_tokens_;
    }
    bool is_prod_sym(int sym) const {
        return sym >= static_cast<int>(keywords_.size()) + n_tokens_;
    }
    int sym_token_index(int sym) const {
        return sym - static_cast<int>(keywords_.size());
    }
    int sym_prod_index(int sym) const {
        return sym - static_cast<int>(keywords_.size()) - n_tokens_;
    }
    const std::string& keyword_text(int sym) const { return keywords_[sym]; }
    const std::vector<std::string>& keywords() const { return keywords_; }

  private:
    std::vector<std::string> keywords_;
    int n_tokens_ = 0;
    int n_prods_ = 0;
};

// DFA over grammar symbols for one production alternative.
struct SymDfa {
    struct State {
        std::vector<std::pair<int, int>> edges; // (symbol, target), sorted
        bool accept = false;
    };
    std::vector<State> states;
    int start = -1;

    int step(int state, int sym) const {
        for (const auto& [s, t] : states[state].edges)
            if (s == sym) return t;
        return -1;
    }
};

namespace detail {

struct SymNfa {
    struct State {
        std::vector<std::pair<int, int>> edges;
        std::vector<int> eps;
    };
    std::vector<State> states;
    int add_state() {
        states.push_back({});
        return static_cast<int>(states.size()) - 1;
    }
};

struct SymFrag {
    int start;
    int accept;
};

inline SymFrag build_sym_nfa(SymNfa& nfa, const ProdExpr& e, const Grammar& g,
                             const SymbolTable& syms) {
    switch (e.kind) {
        case ProdExprKind::Ref: {
            int s = nfa.add_state();
            int a = nfa.add_state();
            int pi = g.production_index(e.name);
            int sym = pi >= 0 ? syms.prod_sym(pi)
                              : syms.token_sym(g.token_index(e.name));
            nfa.states[s].edges.push_back({sym, a});
            return {s, a};
        }
        case ProdExprKind::Keyword: {
            int s = nfa.add_state();
            int a = nfa.add_state();
            nfa.states[s].edges.push_back({syms.keyword_id(e.text), a});
            return {s, a};
        }
        case ProdExprKind::Seq: {
            int s = -1, a = -1;
            for (const auto& c : e.children) {
                SymFrag f = build_sym_nfa(nfa, *c, g, syms);
                if (s < 0)
                    s = f.start;
                else
                    nfa.states[a].eps.push_back(f.start);
                a = f.accept;
            }
            return {s, a};
        }
        case ProdExprKind::Alt: {
            int s = nfa.add_state();
            int a = nfa.add_state();
            for (const auto& c : e.children) {
                SymFrag f = build_sym_nfa(nfa, *c, g, syms);
                nfa.states[s].eps.push_back(f.start);
                nfa.states[f.accept].eps.push_back(a);
            }
            return {s, a};
        }
        case ProdExprKind::Star:
        case ProdExprKind::Plus:
        case ProdExprKind::Opt: {
            SymFrag f = build_sym_nfa(nfa, *e.children[0], g, syms);
            int s = nfa.add_state();
            int a = nfa.add_state();
            nfa.states[s].eps.push_back(f.start);
            nfa.states[f.accept].eps.push_back(a);
            if (e.kind != ProdExprKind::Plus) nfa.states[s].eps.push_back(a);
            if (e.kind != ProdExprKind::Opt)
                nfa.states[f.accept].eps.push_back(f.start);
            return {s, a};
        }
    }
    return {0, 0};
}

inline SymDfa determinize(const SymNfa& nfa, int start, int accept) {
    auto closure = [&](std::set<int> s) {
        std::vector<int> work(s.begin(), s.end());
        while (!work.empty()) {
            int q = work.back();
            work.pop_back();
            for (int t : nfa.states[q].eps)
                if (s.insert(t).second) work.push_back(t);
        }
        return s;
    };
    std::map<std::set<int>, int> ids;
    std::vector<std::set<int>> sets;
    SymDfa dfa;
    auto intern = [&](std::set<int> s) {
        auto it = ids.find(s);
        if (it != ids.end()) return it->second;
        int id = static_cast<int>(sets.size());
        ids.emplace(s, id);
        sets.push_back(std::move(s));
        dfa.states.push_back({});
        dfa.states.back().accept = sets.back().count(accept) > 0;
        return id;
    };
    dfa.start = intern(closure({start}));
    for (std::size_t qi = 0; qi < sets.size(); ++qi) {
        std::map<int, std::set<int>> by_sym;
        for (int q : sets[qi])
            for (const auto& [sym, t] : nfa.states[q].edges)
                by_sym[sym].insert(t);
        for (auto& [sym, targets] : by_sym) {
            int tid = intern(closure(std::move(targets)));
            dfa.states[qi].edges.push_back({sym, tid});
        }
    }
    return dfa;
}

} // namespace detail

// A grammar with everything precompiled: token matchers, constant-token
// texts, the symbol table and one symbol DFA per production alternative.
class CompiledGrammar {
  public:
    // Validates, then compiles. All validation findings land in *diags when
    // given; the Result itself carries the first error.
    static Result<std::shared_ptr<const CompiledGrammar>>
    compile(Grammar g, Diagnostics* diags = nullptr) {
        using R = Result<std::shared_ptr<const CompiledGrammar>>;
        Diagnostics d = validate_grammar(g);
        if (diags) diags->merge(d);
        if (d.has_errors()) {
            for (const auto& item : d.items())
                if (item.severity == Severity::Error) return R(item);
        }
        return compile_unchecked(std::move(g), diags);
    }

    // Compiles without running validation. Mutation tooling uses this to
    // build deliberately broken grammars; anything structurally unbuildable
    // still fails.
    static Result<std::shared_ptr<const CompiledGrammar>>
    compile_unchecked(Grammar g, Diagnostics* diags = nullptr) {
        using R = Result<std::shared_ptr<const CompiledGrammar>>;
        auto cg = std::make_shared<CompiledGrammar>();
        cg->g_ = std::move(g);
        const Grammar& gr = cg->g_;

        for (const auto& t : gr.tokens) {
            auto m = TokenMatcher::compile(*t.expr);
            if (!m) {
                Diagnostic err = m.error();
                err.message = "token " + t.name + ": " + err.message;
                if (diags) diags->add(err);
                return R(err);
            }
            auto ct = m.value().constant_text();
            if (ct && !t.is_subparser) cg->constants_[t.name] = *ct;
            cg->matchers_.emplace(t.name, m.take());
        }

        for (const auto& p : gr.productions) {
            for (const auto& alt : p.alternatives()) {
                auto walk = [&](const ProdExpr& e, auto&& self) -> bool {
                    if (e.kind == ProdExprKind::Ref)
                        return gr.production_index(e.name) >= 0 ||
                               gr.token_index(e.name) >= 0;
                    for (const auto& c : e.children)
                        if (!self(*c, self)) return false;
                    return true;
                };
                if (!walk(*alt, walk)) {
                    Diagnostic err{Severity::Error, "ref-unknown",
                                   "production " + p.name +
                                       " references an unknown symbol",
                                   std::nullopt, 0, 0};
                    if (diags) diags->add(err);
                    return R(err);
                }
            }
        }

        cg->syms_.build(gr);
        for (std::size_t pi = 0; pi < gr.productions.size(); ++pi) {
            cg->alt_dfas_.push_back({});
            for (const auto& alt : gr.productions[pi].alternatives()) {
                detail::SymNfa nfa;
                detail::SymFrag f =
                    detail::build_sym_nfa(nfa, *alt, gr, cg->syms_);
                cg->alt_dfas_.back().push_back(
                    detail::determinize(nfa, f.start, f.accept));
            }
        }
        return R(std::shared_ptr<const CompiledGrammar>(cg));
    }

    const Grammar& grammar() const { return g_; }
    const std::string& name() const { return g_.name; }
    const SymbolTable& symbols() const { return syms_; }

    const TokenMatcher* matcher(const std::string& token) const {
        auto it = matchers_.find(token);
        return it == matchers_.end() ? nullptr : &it->second;
    }

    // Constant (singleton-language) non-subparser tokens are left out of
    // ASTs; unparse re-derives their text from here.
    std::optional<std::string> constant(const std::string& token) const {
        auto it = constants_.find(token);
        if (it == constants_.end()) return std::nullopt;
        return it->second;
    }

    bool elidable_sym(int sym) const {
        if (syms_.is_keyword_sym(sym)) return true;
        if (!syms_.is_token_sym(sym)) return false;
        return constants_.count(
                   g_.tokens[syms_.sym_token_index(sym)].name) > 0;
    }

    const SymDfa& alt_dfa(int prod_index, int alt_index) const {
        return alt_dfas_[prod_index][alt_index];
    }
    int alt_count(int prod_index) const {
        return static_cast<int>(alt_dfas_[prod_index].size());
    }

    // Whole-token acceptance check for encoded text.
    bool token_accepts(const std::string& token, std::string_view text) const {
        const TokenMatcher* m = matcher(token);
        return m && m->accepts(text);
    }

    // Flat longest-match tokenizer. At equal length keywords outrank named
    // tokens, and earlier-declared tokens outrank later ones.
    Result<std::vector<Token>> tokenize(std::string_view doc) const {
        using R = Result<std::vector<Token>>;
        {
            std::size_t pos = 0;
            while (pos < doc.size()) {
                std::size_t before = pos;
                if (utf8_decode(doc, pos) == 0xFFFFFFFF) {
                    LineCol lc = line_col_at(doc, before);
                    return R::fail("tokenize-encoding",
                                   "invalid UTF-8 at byte " +
                                       std::to_string(before),
                                   before, lc.line, lc.col);
                }
            }
        }
        std::vector<Token> out;
        std::size_t pos = 0;
        while (pos < doc.size()) {
            std::size_t best_len = 0;
            bool best_is_kw = false;
            int best_kw = -1;
            int best_tok = -1;
            for (std::size_t k = 0; k < syms_.keywords().size(); ++k) {
                const std::string& kw = syms_.keywords()[k];
                if (kw.size() > best_len &&
                    doc.compare(pos, kw.size(), kw) == 0) {
                    best_len = kw.size();
                    best_is_kw = true;
                    best_kw = static_cast<int>(k);
                }
            }
            for (std::size_t ti = 0; ti < g_.tokens.size(); ++ti) {
                auto m = matchers_.find(g_.tokens[ti].name);
                if (m == matchers_.end()) continue;
                auto len = m->second.match_prefix(doc, pos);
                if (len && *len > best_len) {
                    best_len = *len;
                    best_is_kw = false;
                    best_tok = static_cast<int>(ti);
                }
            }
            if (best_len == 0) {
                LineCol lc = line_col_at(doc, pos);
                std::size_t next = pos;
                utf8_decode(doc, next);
                return R::fail(
                    "tokenize-stuck",
                    "no token matches at byte " + std::to_string(pos) +
                        " ('" + display(doc.substr(pos, next - pos)) + "')",
                    pos, lc.line, lc.col);
            }
            Token t;
            t.text = std::string(doc.substr(pos, best_len));
            t.offset = pos;
            LineCol lc = line_col_at(doc, pos);
            t.line = lc.line;
            t.col = lc.col;
            if (best_is_kw) {
                t.sym = best_kw;
                t.name = syms_.keywords()[best_kw];
                t.is_keyword = true;
            } else {
                t.sym = syms_.token_sym(best_tok);
                t.name = g_.tokens[best_tok].name;
                t.token_index = best_tok;
            }
            out.push_back(std::move(t));
            pos += best_len;
        }
        return out;
    }

  private:
    Grammar g_;
    std::map<std::string, TokenMatcher> matchers_;
    std::map<std::string, std::string> constants_;
    SymbolTable syms_;
    std::vector<std::vector<SymDfa>> alt_dfas_;
};

using CompiledGrammarPtr = std::shared_ptr<const CompiledGrammar>;

// A family of grammars plus the bindings that stitch them together.
class CompositionSet {
  public:
    static Result<CompositionSet>
    build(std::vector<CompiledGrammarPtr> grammars,
          CompositionManifest manifest = {}) {
        using R = Result<CompositionSet>;
        CompositionSet set;
        for (auto& g : grammars) {
            if (!g) return R::fail("compose-null", "null grammar");
            if (set.by_name_.count(g->name()))
                return R::fail("compose-duplicate-grammar",
                               "two grammars named " + g->name());
            set.by_name_.emplace(g->name(), g);
        }
        for (const auto& b : manifest.bindings) {
            if (!set.by_name_.count(b.grammar))
                return R::fail("compose-unknown-grammar",
                               "manifest binds unknown grammar " + b.grammar);
            if (!set.by_name_.count(b.target))
                return R::fail("compose-unknown-grammar",
                               "manifest binds unknown grammar " + b.target);
        }
        set.manifest_ = std::move(manifest);
        return set;
    }

    static CompositionSet single(CompiledGrammarPtr g) {
        CompositionSet set;
        set.by_name_.emplace(g->name(), std::move(g));
        return set;
    }

    const CompiledGrammar* grammar(const std::string& name) const {
        auto it = by_name_.find(name);
        return it == by_name_.end() ? nullptr : it->second.get();
    }

    const CompiledGrammar* target_of(const std::string& grammar_name,
                                     const std::string& token) const {
        const Binding* b = manifest_.binding_for(grammar_name, token);
        return b ? grammar(b->target) : nullptr;
    }

    const CompositionManifest& manifest() const { return manifest_; }

    std::vector<const CompiledGrammar*> all() const {
        std::vector<const CompiledGrammar*> v;
        for (const auto& [n, g] : by_name_) v.push_back(g.get());
        return v;
    }

  private:
    std::map<std::string, CompiledGrammarPtr> by_name_;
    CompositionManifest manifest_;
};

} // namespace armorparse

#endif
