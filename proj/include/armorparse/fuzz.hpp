#ifndef ARMORPARSE_FUZZ_HPP
#define ARMORPARSE_FUZZ_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "ast.hpp"
#include "compiled.hpp"
#include "parse_engine.hpp"
#include "unparse_engine.hpp"

namespace armorparse {

struct FuzzOptions {
    int cases = 100;
    std::uint64_t seed = 1;
    int max_depth = 8;      // production nesting budget per document
    int max_leaf_len = 8;   // scalars per generated leaf for encoded tokens
    bool verbose = true;    // print PASS lines, not just failures
    const CodecRegistry* codecs = nullptr;
};

struct FuzzReport {
    int cases = 0;
    int violations = 0;
};

namespace detail {

class FuzzRng {
  public:
    explicit FuzzRng(std::uint64_t seed) : eng_(seed) {}
    // Modulo bias is irrelevant for test-case generation and keeps the
    // stream identical across platforms.
    std::uint64_t pick(std::uint64_t n) { return n ? eng_() % n : 0; }
    bool chance(unsigned percent) { return pick(100) < percent; }

  private:
    std::mt19937_64 eng_;
};

inline char32_t sample_scalar(FuzzRng& rng, char32_t lo, char32_t hi) {
    if (!(hi < 0x20 || lo > 0x7E) && rng.chance(70)) {
        char32_t a = std::max<char32_t>(lo, 0x20);
        char32_t b = std::min<char32_t>(hi, 0x7E);
        return a + static_cast<char32_t>(rng.pick(b - a + 1));
    }
    for (int t = 0; t < 8; ++t) {
        char32_t c = lo + static_cast<char32_t>(rng.pick(hi - lo + 1));
        if (c < 0xD800 || c > 0xDFFF) return c;
    }
    return hi > 0xDFFF ? 0xE000 : lo;
}

// Per-grammar generation tables, built on first use.
struct GenGrammar {
    const CompiledGrammar* cg = nullptr;
    std::map<std::string, long> prod_depth; // min production nesting
    std::vector<std::string> keywords;
    std::map<std::string, std::vector<int>> token_dist; // state -> accept dist
};

inline void collect_keywords(const ProdExpr& e,
                             std::vector<std::string>& out) {
    if (e.kind == ProdExprKind::Keyword) out.push_back(e.text);
    for (const auto& c : e.children) collect_keywords(*c, out);
}

constexpr long kFarDepth = 1L << 20;

inline long expr_depth(const Grammar& g, const ProdExpr& e,
                       const std::map<std::string, long>& pd) {
    switch (e.kind) {
    case ProdExprKind::Keyword:
        return 0;
    case ProdExprKind::Ref: {
        if (g.token(e.name)) return 0;
        auto it = pd.find(e.name);
        return it == pd.end() ? kFarDepth : it->second;
    }
    case ProdExprKind::Seq: {
        long d = 0;
        for (const auto& c : e.children)
            d = std::max(d, expr_depth(g, *c, pd));
        return d;
    }
    case ProdExprKind::Alt: {
        long d = kFarDepth;
        for (const auto& c : e.children)
            d = std::min(d, expr_depth(g, *c, pd));
        return d;
    }
    case ProdExprKind::Star:
    case ProdExprKind::Opt:
        return 0;
    case ProdExprKind::Plus:
        return expr_depth(g, *e.children[0], pd);
    }
    return kFarDepth;
}

inline std::map<std::string, long> production_depths(const Grammar& g) {
    std::map<std::string, long> pd;
    for (const auto& p : g.productions) pd[p.name] = kFarDepth;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& p : g.productions) {
            long best = kFarDepth;
            for (const auto& alt : p.alternatives())
                best = std::min(best, expr_depth(g, *alt, pd));
            if (best < kFarDepth && 1 + best < pd[p.name]) {
                pd[p.name] = 1 + best;
                changed = true;
            }
        }
    }
    return pd;
}

inline std::vector<int> accept_distances(const Dfa& dfa) {
    std::vector<int> dist(dfa.states.size(), -1);
    std::vector<int> queue;
    for (std::size_t i = 0; i < dfa.states.size(); ++i)
        if (dfa.states[i].accept) {
            dist[i] = 0;
            queue.push_back(static_cast<int>(i));
        }
    for (std::size_t q = 0; q < queue.size(); ++q) {
        int t = queue[q];
        for (std::size_t i = 0; i < dfa.states.size(); ++i) {
            if (dist[i] >= 0) continue;
            for (const auto& [r, tgt] : dfa.states[i].edges)
                if (tgt == t) {
                    dist[i] = dist[t] + 1;
                    queue.push_back(static_cast<int>(i));
                    break;
                }
        }
    }
    return dist;
}

class Fuzzer {
  public:
    Fuzzer(const CompositionSet& set, const FuzzOptions& opts)
        : set_(set), opts_(opts), rng_(opts.seed) {
        for (const auto& cg : set.all()) {
            for (const auto& t : cg->grammar().tables)
                for (const auto& r : t.rules)
                    alphabet_ += utf8_decode_first(r.control);
        }
        for (char32_t c = 0x20; c <= 0x7E; ++c) alphabet_ += c;
        alphabet_ += U'\t';
        alphabet_ += U'é';
        alphabet_ += U'世';
    }

    Result<AstNode> gen_document(const std::string& grammar_name, int budget) {
        auto* gg = grammar_info(grammar_name);
        if (!gg)
            return Result<AstNode>::fail("compose-unknown-grammar",
                                         "grammar " + grammar_name +
                                             " is not loaded");
        const auto& root = gg->cg->grammar().productions[0];
        return gen_production(*gg, root, budget);
    }

  private:
    static char32_t utf8_decode_first(const std::string& s) {
        std::size_t i = 0;
        char32_t c = utf8_decode(s, i);
        return c == 0xFFFFFFFF ? U'?' : c;
    }

    GenGrammar* grammar_info(const std::string& name) {
        auto it = grammars_.find(name);
        if (it != grammars_.end()) return &it->second;
        const CompiledGrammar* cg = set_.grammar(name);
        if (!cg) return nullptr;
        GenGrammar gg;
        gg.cg = cg;
        gg.prod_depth = production_depths(cg->grammar());
        for (const auto& p : cg->grammar().productions)
            collect_keywords(*p.body, gg.keywords);
        return &grammars_.emplace(name, std::move(gg)).first->second;
    }

    Result<AstNode> gen_production(GenGrammar& gg, const Production& prod,
                                   int budget) {
        const Grammar& g = gg.cg->grammar();
        auto alts = prod.alternatives();
        std::vector<std::size_t> viable;
        for (std::size_t i = 0; i < alts.size(); ++i)
            if (expr_depth(g, *alts[i], gg.prod_depth) <= budget - 1)
                viable.push_back(i);
        std::size_t pick;
        if (!viable.empty()) {
            pick = viable[rng_.pick(viable.size())];
        } else {
            pick = 0;
            long best = kFarDepth + 1;
            for (std::size_t i = 0; i < alts.size(); ++i) {
                long d = expr_depth(g, *alts[i], gg.prod_depth);
                if (d < best) {
                    best = d;
                    pick = i;
                }
            }
        }
        AstNode node =
            AstNode::make_rule(prod.name, static_cast<int>(pick));
        auto ok = gen_into(gg, *alts[pick], budget - 1, node.children);
        if (!ok) return ok.forward<AstNode>();
        return node;
    }

    Result<bool> gen_into(GenGrammar& gg, const ProdExpr& e, int budget,
                          std::vector<AstNode>& out) {
        using R = Result<bool>;
        const Grammar& g = gg.cg->grammar();
        switch (e.kind) {
        case ProdExprKind::Keyword:
            return true;
        case ProdExprKind::Ref: {
            if (const Production* p = g.production(e.name)) {
                auto child = gen_production(gg, *p, budget);
                if (!child) return child.forward<bool>();
                out.push_back(child.take());
                return true;
            }
            const TokenDef* t = g.token(e.name);
            if (!t) return R::fail("ref-unknown", "no symbol " + e.name);
            if (t->is_subparser) {
                const CompiledGrammar* target =
                    set_.target_of(g.name, t->name);
                if (!target)
                    return R::fail("compose-unbound",
                                   "subparser token " + t->name +
                                       " has no binding; cannot generate");
                const std::string& tname = target->grammar().name;
                auto inner = gen_document(tname, std::max(budget, 1));
                if (!inner) return inner.forward<bool>();
                out.push_back(
                    AstNode::make_sub(t->name, tname, inner.take()));
                return true;
            }
            if (gg.cg->constant(t->name)) return true; // elided from the AST
            auto text = gen_leaf(gg, *t);
            if (!text) return text.forward<bool>();
            out.push_back(AstNode::make_token(t->name, text.take()));
            return true;
        }
        case ProdExprKind::Seq: {
            for (const auto& c : e.children) {
                auto ok = gen_into(gg, *c, budget, out);
                if (!ok) return ok;
            }
            return true;
        }
        case ProdExprKind::Alt: {
            std::vector<std::size_t> viable;
            for (std::size_t i = 0; i < e.children.size(); ++i)
                if (expr_depth(g, *e.children[i], gg.prod_depth) <= budget)
                    viable.push_back(i);
            std::size_t pick;
            if (!viable.empty()) {
                pick = viable[rng_.pick(viable.size())];
            } else {
                pick = 0;
                long best = kFarDepth + 1;
                for (std::size_t i = 0; i < e.children.size(); ++i) {
                    long d = expr_depth(g, *e.children[i], gg.prod_depth);
                    if (d < best) {
                        best = d;
                        pick = i;
                    }
                }
            }
            return gen_into(gg, *e.children[pick], budget, out);
        }
        case ProdExprKind::Star:
        case ProdExprKind::Plus: {
            int n = e.kind == ProdExprKind::Plus ? 1 : 0;
            if (expr_depth(g, *e.children[0], gg.prod_depth) <= budget) {
                std::uint64_t roll = rng_.pick(100);
                n += roll < 40 ? 0 : roll < 75 ? 1 : roll < 95 ? 2 : 3;
            }
            for (int i = 0; i < n; ++i) {
                auto ok = gen_into(gg, *e.children[0], budget, out);
                if (!ok) return ok;
            }
            return true;
        }
        case ProdExprKind::Opt: {
            if (expr_depth(g, *e.children[0], gg.prod_depth) <= budget &&
                rng_.chance(50))
                return gen_into(gg, *e.children[0], budget, out);
            return true;
        }
        }
        return R::fail("fuzz-internal", "unreachable");
    }

    Result<std::string> gen_leaf(GenGrammar& gg, const TokenDef& t) {
        const Grammar& g = gg.cg->grammar();
        bool encoded = g.table(t.name) != nullptr ||
                       (opts_.codecs && opts_.codecs->find(g.name, t.name));
        if (encoded) {
            // Any nonempty scalar string is a legal decoded value; the token's
            // encode table is what makes it expressible.
            std::size_t len = 1 + rng_.pick(opts_.max_leaf_len);
            std::string s;
            for (std::size_t i = 0; i < len; ++i)
                utf8_append(s, alphabet_[rng_.pick(alphabet_.size())]);
            return s;
        }
        return sample_token(gg, t);
    }

    // Random walk over the token automaton. Rejects samples that are a
    // prefix of some keyword: the flat lexer would fuse them with following
    // text, which is a property of the grammar, not of the codec layer.
    Result<std::string> sample_token(GenGrammar& gg, const TokenDef& t) {
        using R = Result<std::string>;
        const Dfa& dfa = gg.cg->matcher(t.name)->dfa();
        auto dist = gg.token_dist.find(t.name);
        if (dist == gg.token_dist.end())
            dist = gg.token_dist.emplace(t.name, accept_distances(dfa)).first;
        const auto& d = dist->second;
        for (int attempt = 0; attempt < 32; ++attempt) {
            std::string s;
            int cur = dfa.start;
            int len = 0;
            while (true) {
                const auto& st = dfa.states[cur];
                if (st.accept && len > 0 && (st.edges.empty() ||
                                             rng_.chance(40) || len >= 12))
                    break;
                if (st.edges.empty()) break;
                const std::pair<CharRange, int>* edge = nullptr;
                if (len >= 12) {
                    // over budget: steer along shortest path to acceptance
                    for (const auto& e : st.edges)
                        if (d[e.second] >= 0 &&
                            (!edge || d[e.second] < d[edge->second]))
                            edge = &e;
                }
                if (!edge) edge = &st.edges[rng_.pick(st.edges.size())];
                utf8_append(s, sample_scalar(rng_, edge->first.lo,
                                             edge->first.hi));
                cur = edge->second;
                ++len;
            }
            if (s.empty() || !dfa.states[cur].accept) continue;
            bool fuses = false;
            for (const auto& k : gg.keywords)
                if (k.size() >= s.size() && k.compare(0, s.size(), s) == 0) {
                    fuses = true;
                    break;
                }
            if (!fuses) return s;
        }
        return R::fail("fuzz-sample",
                       "could not sample a value for token " + t.name);
    }

    const CompositionSet& set_;
    const FuzzOptions& opts_;
    FuzzRng rng_;
    std::u32string alphabet_;
    std::map<std::string, GenGrammar> grammars_;
};

} // namespace detail

// Generates random ASTs, runs them through unparse and parse, and reports
// any case whose round trip is not the identity. A failed unparse counts as
// a violation: every generated AST is structurally valid, so a complete
// toolchain must be able to express it.
inline FuzzReport fuzz_roundtrip(const CompositionSet& set,
                                 const std::string& grammar_name,
                                 const FuzzOptions& opts, std::ostream& out) {
    detail::Fuzzer fuzzer(set, opts);
    ParseOptions popts;
    popts.codecs = opts.codecs;
    UnparseOptions uopts;
    uopts.codecs = opts.codecs;
    FuzzReport report;
    for (int i = 0; i < opts.cases; ++i) {
        ++report.cases;
        std::string id = "fuzz-" + std::to_string(i);
        auto fail = [&](const std::string& what) {
            ++report.violations;
            out << "FAIL " << id << " " << what << "\n";
        };
        auto ast = fuzzer.gen_document(grammar_name, opts.max_depth);
        if (!ast) {
            fail("generate: " + ast.error().message);
            continue;
        }
        auto doc = unparse_document(set, grammar_name, ast.value(), uopts);
        if (!doc) {
            fail("unparse: [" + doc.error().code + "] " + doc.error().message);
            continue;
        }
        auto back = parse_document(set, grammar_name, doc.value(), popts);
        if (!back) {
            fail("parse: [" + back.error().code + "] " + back.error().message +
                 " doc=" + display(doc.value().substr(0, 80)));
            continue;
        }
        if (!ast_equal(ast.value(), back.value())) {
            fail("round trip changed the tree, doc=" +
                 display(doc.value().substr(0, 80)));
            continue;
        }
        if (opts.verbose)
            out << "PASS " << id << " bytes=" << doc.value().size() << "\n";
    }
    out << "SUMMARY cases=" << report.cases
        << " violations=" << report.violations << "\n";
    return report;
}

} // namespace armorparse

#endif
