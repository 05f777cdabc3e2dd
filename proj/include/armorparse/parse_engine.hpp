#ifndef ARMORPARSE_PARSE_ENGINE_HPP
#define ARMORPARSE_PARSE_ENGINE_HPP

#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "ast.hpp"
#include "codec.hpp"
#include "compiled.hpp"
#include "diagnostics.hpp"

namespace armorparse {

struct ParseOptions {
    int max_depth = 32;           // nesting limit for embedded documents
    const CodecRegistry* codecs = nullptr;
};

namespace detail {

// Earley item: position q inside the DFA of alternative (prod, alt), with
// the chart column the item started in.
struct EItem {
    int prod, alt, state, origin;
};

struct ItemRef {
    int set = -1;
    int idx = -1;
    bool operator<(const ItemRef& o) const {
        return std::tie(set, idx) < std::tie(o.set, o.idx);
    }
    bool operator==(const ItemRef& o) const {
        return set == o.set && idx == o.idx;
    }
};

struct Cause {
    enum Kind { Init, Scan, Complete } kind = Init;
    ItemRef pred;
    ItemRef done;
    bool operator==(const Cause& o) const {
        return kind == o.kind && pred == o.pred && done == o.done;
    }
};

struct ESet {
    std::vector<EItem> items;
    std::map<std::tuple<int, int, int, int>, int> index;
    std::vector<std::vector<Cause>> causes;

    // Returns the item index; records the cause unless already present.
    int add(const EItem& it, const Cause& c) {
        auto key = std::make_tuple(it.prod, it.alt, it.state, it.origin);
        auto found = index.find(key);
        if (found == index.end()) {
            int id = static_cast<int>(items.size());
            items.push_back(it);
            index.emplace(key, id);
            causes.push_back({c});
            return id;
        }
        auto& cs = causes[found->second];
        for (const auto& existing : cs)
            if (existing == c) return found->second;
        cs.push_back(c);
        return found->second;
    }
};

class EarleyRun {
  public:
    EarleyRun(const CompiledGrammar& g, const std::vector<Token>& tokens)
        : g_(g), tokens_(tokens) {}

    // Builds the chart. Returns false when no column advances to the end.
    void run() {
        sets_.resize(tokens_.size() + 1);
        const SymbolTable& syms = g_.symbols();
        // Seed with every alternative of the root production.
        for (int a = 0; a < g_.alt_count(0); ++a) {
            sets_[0].add({0, a, g_.alt_dfa(0, a).start, 0}, {Cause::Init});
        }
        for (int j = 0; j <= static_cast<int>(tokens_.size()); ++j) {
            ESet& cur = sets_[j];
            for (int ii = 0; ii < static_cast<int>(cur.items.size()); ++ii) {
                EItem it = cur.items[ii];
                const SymDfa& dfa = g_.alt_dfa(it.prod, it.alt);
                // Predict nonterminal edges; also pick up nullable
                // completions that this column already holds.
                for (const auto& [sym, next] : dfa.states[it.state].edges) {
                    if (!syms.is_prod_sym(sym)) continue;
                    int np = syms.sym_prod_index(sym);
                    for (int b = 0; b < g_.alt_count(np); ++b)
                        cur.add({np, b, g_.alt_dfa(np, b).start, j},
                                {Cause::Init});
                    for (int di = 0;
                         di < static_cast<int>(cur.items.size()); ++di) {
                        const EItem& done = cur.items[di];
                        if (done.prod != np || done.origin != j) continue;
                        if (!g_.alt_dfa(done.prod, done.alt)
                                 .states[done.state]
                                 .accept)
                            continue;
                        cur.add({it.prod, it.alt, next, it.origin},
                                {Cause::Complete, {j, ii}, {j, di}});
                    }
                }
                // Complete.
                if (dfa.states[it.state].accept) {
                    int psym = syms.prod_sym(it.prod);
                    ESet& from = sets_[it.origin];
                    for (int pi = 0;
                         pi < static_cast<int>(from.items.size()); ++pi) {
                        const EItem& pred = from.items[pi];
                        int adv = g_.alt_dfa(pred.prod, pred.alt)
                                      .step(pred.state, psym);
                        if (adv < 0) continue;
                        cur.add({pred.prod, pred.alt, adv, pred.origin},
                                {Cause::Complete,
                                 {it.origin, pi},
                                 {j, ii}});
                    }
                }
            }
            // Scan.
            if (j < static_cast<int>(tokens_.size())) {
                int sym = tokens_[j].sym;
                for (int ii = 0; ii < static_cast<int>(cur.items.size());
                     ++ii) {
                    const EItem& it = cur.items[ii];
                    int adv = g_.alt_dfa(it.prod, it.alt).step(it.state, sym);
                    if (adv < 0) continue;
                    sets_[j + 1].add({it.prod, it.alt, adv, it.origin},
                                     {Cause::Scan, {j, ii}});
                }
            }
        }
    }

    std::vector<ItemRef> accepting_roots() const {
        std::vector<ItemRef> out;
        int last = static_cast<int>(tokens_.size());
        const ESet& fin = sets_[last];
        for (int i = 0; i < static_cast<int>(fin.items.size()); ++i) {
            const EItem& it = fin.items[i];
            if (it.prod != 0 || it.origin != 0) continue;
            if (g_.alt_dfa(it.prod, it.alt).states[it.state].accept)
                out.push_back({last, i});
        }
        return out;
    }

    // Number of derivations, saturated at 2. Cycles mean unbounded many.
    int count(ItemRef r) {
        auto it = memo_.find(r);
        if (it != memo_.end()) return it->second;
        memo_[r] = -1; // in progress
        int total = 0;
        for (const Cause& c : sets_[r.set].causes[r.idx]) {
            int ways = 0;
            switch (c.kind) {
                case Cause::Init: ways = 1; break;
                case Cause::Scan: ways = probe(c.pred); break;
                case Cause::Complete:
                    ways = probe(c.pred) * probe(c.done);
                    break;
            }
            total += ways;
            if (total >= 2) {
                total = 2;
                break;
            }
        }
        memo_[r] = total;
        return total;
    }

    int furthest_column() const {
        int best = 0;
        for (int j = 0; j < static_cast<int>(sets_.size()); ++j)
            if (!sets_[j].items.empty()) best = j;
        return best;
    }

    const EItem& item(ItemRef r) const { return sets_[r.set].items[r.idx]; }
    const std::vector<Cause>& causes(ItemRef r) const {
        return sets_[r.set].causes[r.idx];
    }

  private:
    int probe(ItemRef r) {
        auto it = memo_.find(r);
        if (it != memo_.end() && it->second == -1) return 2; // cycle
        return count(r);
    }

    const CompiledGrammar& g_;
    const std::vector<Token>& tokens_;
    std::vector<ESet> sets_;
    std::map<ItemRef, int> memo_;
};

} // namespace detail

inline Result<AstNode> parse_document(const CompositionSet& set,
                                      const std::string& grammar_name,
                                      std::string_view doc,
                                      const ParseOptions& opts = {},
                                      int depth = 0);

namespace detail {

struct Extractor {
    const CompositionSet& set;
    const CompiledGrammar& g;
    const std::vector<Token>& tokens;
    const ParseOptions& opts;
    int depth;
    EarleyRun& run;

    Result<AstNode> leaf(const Token& tk) const {
        using R = Result<AstNode>;
        const TokenDef* def = &g.grammar().tokens[tk.token_index];
        const EncodeTable* table = g.grammar().table(def->name);
        const Codec* codec =
            opts.codecs ? opts.codecs->find(g.name(), def->name) : nullptr;
        std::string decoded;
        if (codec && codec->decode) {
            auto r = codec->decode(tk.text);
            if (!r) return contextualize(r.error(), tk);
            decoded = r.take();
        } else if (table) {
            auto r = decode(tk.text, *table);
            if (!r) return contextualize(r.error(), tk);
            decoded = r.take();
        } else {
            decoded = tk.text;
        }
        if (!def->is_subparser)
            return AstNode::make_token(def->name, std::move(decoded));

        const CompiledGrammar* target = set.target_of(g.name(), def->name);
        if (!target)
            return R::fail("compose-unbound",
                           "subparser token " + def->name + " of grammar " +
                               g.name() + " has no binding",
                           tk.offset, tk.line, tk.col);
        auto inner =
            parse_document(set, target->name(), decoded, opts, depth + 1);
        if (!inner) return contextualize(inner.error(), tk);
        return AstNode::make_sub(def->name, target->name(), inner.take());
    }

    Result<AstNode> contextualize(Diagnostic d, const Token& tk) const {
        d.message = "in " + tk.name + " at " + std::to_string(tk.line) + ":" +
                    std::to_string(tk.col) + ": " + d.message;
        return Result<AstNode>(std::move(d));
    }

    Result<AstNode> node(ItemRef ref) const {
        const EItem& it = run.item(ref);
        AstNode n = AstNode::make_rule(
            g.grammar().productions[it.prod].name, it.alt);
        std::vector<AstNode> rev;
        ItemRef cur = ref;
        while (true) {
            const std::vector<Cause>& cs = run.causes(cur);
            const Cause& c = cs.front();
            if (c.kind == Cause::Init) break;
            if (c.kind == Cause::Scan) {
                const Token& tk = tokens[cur.set - 1];
                if (!tk.is_keyword && !g.elidable_sym(tk.sym)) {
                    auto lf = leaf(tk);
                    if (!lf) return lf;
                    rev.push_back(lf.take());
                }
                cur = c.pred;
                continue;
            }
            auto child = node(c.done);
            if (!child) return child;
            rev.push_back(child.take());
            cur = c.pred;
        }
        n.children.assign(rev.rbegin(), rev.rend());
        return n;
    }
};

} // namespace detail

// Parses a document under one grammar of a composition set: tokenize,
// recognize, reject ambiguity, then build the AST, decoding leaf text and
// recursively parsing embedded documents along the way.
inline Result<AstNode> parse_document(const CompositionSet& set,
                                      const std::string& grammar_name,
                                      std::string_view doc,
                                      const ParseOptions& opts, int depth) {
    using R = Result<AstNode>;
    if (depth > opts.max_depth)
        return R::fail("depth-exceeded",
                       "embedded documents nest deeper than " +
                           std::to_string(opts.max_depth));
    const CompiledGrammar* g = set.grammar(grammar_name);
    if (!g)
        return R::fail("compose-unknown-grammar",
                       "no grammar named " + grammar_name);

    auto toks = g->tokenize(doc);
    if (!toks) return R(toks.error());
    const std::vector<Token>& tokens = toks.value();

    detail::EarleyRun run(*g, tokens);
    run.run();
    auto roots = run.accepting_roots();
    if (roots.empty()) {
        int far = run.furthest_column();
        if (far < static_cast<int>(tokens.size())) {
            const Token& tk = tokens[far];
            return R::fail("parse-syntax",
                           "unexpected " + tk.name + " at " +
                               std::to_string(tk.line) + ":" +
                               std::to_string(tk.col),
                           tk.offset, tk.line, tk.col);
        }
        return R::fail("parse-syntax",
                       "unexpected end of input; incomplete " +
                           g->grammar().productions.front().name);
    }

    int total = 0;
    for (const auto& r : roots) {
        total += run.count(r);
        if (total >= 2) break;
    }
    if (total >= 2)
        return R::fail("parse-ambiguous",
                       "input admits more than one derivation under grammar " +
                           grammar_name);

    detail::Extractor ex{set, *g, tokens, opts, depth, run};
    return ex.node(roots.front());
}

// Convenience entry point for a lone grammar.
inline Result<AstNode> parse_document(const CompiledGrammarPtr& g,
                                      std::string_view doc,
                                      const ParseOptions& opts = {}) {
    CompositionSet set = CompositionSet::single(g);
    return parse_document(set, g->name(), doc, opts);
}

} // namespace armorparse

#endif
