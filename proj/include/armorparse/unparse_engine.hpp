#ifndef ARMORPARSE_UNPARSE_ENGINE_HPP
#define ARMORPARSE_UNPARSE_ENGINE_HPP

#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ast.hpp"
#include "codec.hpp"
#include "compiled.hpp"
#include "diagnostics.hpp"

namespace armorparse {

struct UnparseOptions {
    int max_depth = 32;
    const CodecRegistry* codecs = nullptr;
};

// Encodes decoded leaf text for one token and verifies the token can carry
// the result. Refusing here is what keeps malicious leaf data from ever
// crossing a structural boundary.
inline Result<std::string> unparse_token(const CompiledGrammar& g,
                                         const std::string& token,
                                         std::string_view decoded,
                                         const CodecRegistry* codecs = nullptr) {
    using R = Result<std::string>;
    const TokenDef* def = g.grammar().token(token);
    if (!def)
        return R::fail("unparse-shape", "no token named " + token +
                                            " in grammar " + g.name());
    const Codec* codec = codecs ? codecs->find(g.name(), token) : nullptr;
    const EncodeTable* table = g.grammar().table(token);
    std::string encoded;
    if (codec && codec->encode)
        encoded = codec->encode(decoded);
    else if (table)
        encoded = encode(decoded, *table);
    else
        encoded = std::string(decoded);
    if (!g.token_accepts(token, encoded))
        return R::fail("unparse-invalid-leaf",
                       "token " + token + " cannot carry text '" +
                           display(decoded) + "' (encodes to '" +
                           display(encoded) + "')");
    return encoded;
}

namespace detail {

// Walks a production DFA between the visible children of an AST node,
// re-deriving the keyword literals and constant tokens that parsing left
// out. The walk refuses when those fillers are not uniquely determined.
class EmitWalk {
  public:
    EmitWalk(const CompiledGrammar& g, const SymDfa& dfa)
        : g_(g), dfa_(dfa) {}

    // Moves from `from` across elidable edges to a state satisfying
    // `target`, appending the emitted filler text. Returns the target state.
    Result<int> advance(int from, const std::function<bool(int)>& target,
                        const std::string& what, std::string& out) const {
        using R = Result<int>;
        int n = static_cast<int>(dfa_.states.size());

        // Which states can satisfy or still reach the target over elidable
        // edges?
        std::vector<bool> viable(n, false);
        for (int s = 0; s < n; ++s) {
            if (!target(s)) continue;
            viable[s] = true;
        }
        bool changed = true;
        while (changed) {
            changed = false;
            for (int s = 0; s < n; ++s) {
                if (viable[s]) continue;
                for (const auto& [sym, t] : dfa_.states[s].edges) {
                    if (g_.elidable_sym(sym) && viable[t]) {
                        viable[s] = true;
                        changed = true;
                        break;
                    }
                }
            }
        }
        if (!viable[from])
            return R::fail("unparse-shape",
                           "production " + what + ": children do not fit "
                           "this alternative");

        // Path counting over the viable subgraph; a cycle or a second path
        // means the filler text is not unique.
        std::vector<int> color(n, 0); // 0 fresh, 1 in progress, 2 done
        std::vector<int> paths(n, 0);
        bool cyclic = false;
        auto dfs = [&](int s, auto&& self) -> int {
            if (color[s] == 1) {
                cyclic = true;
                return 2;
            }
            if (color[s] == 2) return paths[s];
            color[s] = 1;
            int total = target(s) ? 1 : 0;
            for (const auto& [sym, t] : dfa_.states[s].edges) {
                if (!g_.elidable_sym(sym) || !viable[t]) continue;
                total += self(t, self);
                if (total >= 2) total = 2;
            }
            color[s] = 2;
            paths[s] = total;
            return total;
        };
        int total = dfs(from, dfs);
        if (cyclic || total >= 2)
            return R::fail("unparse-ambiguous-emission",
                           "production " + what +
                               ": constant filler between children is "
                               "ambiguous");

        int cur = from;
        while (!(target(cur) && follow_count(cur, paths) == 0)) {
            bool stepped = false;
            for (const auto& [sym, t] : dfa_.states[cur].edges) {
                if (!g_.elidable_sym(sym) || !viable[t] || paths[t] == 0)
                    continue;
                out += sym_text(sym);
                cur = t;
                stepped = true;
                break;
            }
            if (!stepped)
                return R::fail("unparse-shape",
                               "production " + what +
                                   ": emission walk cannot continue");
        }
        return cur;
    }

    std::string sym_text(int sym) const {
        const SymbolTable& syms = g_.symbols();
        if (syms.is_keyword_sym(sym)) return syms.keyword_text(sym);
        const std::string& tok =
            g_.grammar().tokens[syms.sym_token_index(sym)].name;
        auto c = g_.constant(tok);
        return c ? *c : std::string();
    }

  private:
    // Number of continuations from s (beyond stopping here).
    int follow_count(int s, const std::vector<int>& paths) const {
        int c = 0;
        for (const auto& [sym, t] : dfa_.states[s].edges)
            if (g_.elidable_sym(sym) && paths[t] > 0) c += paths[t];
        return c;
    }

    const CompiledGrammar& g_;
    const SymDfa& dfa_;
};

} // namespace detail

inline Result<std::string> unparse_document(const CompositionSet& set,
                                            const std::string& grammar_name,
                                            const AstNode& ast,
                                            const UnparseOptions& opts = {},
                                            int depth = 0);

namespace detail {

inline Result<std::string> unparse_node(const CompositionSet& set,
                                        const CompiledGrammar& g,
                                        const AstNode& node,
                                        const UnparseOptions& opts,
                                        int depth) {
    using R = Result<std::string>;
    if (node.kind != AstNode::Kind::Rule)
        return R::fail("unparse-shape", "expected a rule node");
    int pi = g.grammar().production_index(node.rule);
    if (pi < 0)
        return R::fail("unparse-shape", "grammar " + g.name() +
                                            " has no production " + node.rule);
    if (node.alt < 0 || node.alt >= g.alt_count(pi))
        return R::fail("unparse-shape",
                       "production " + node.rule + " has no alternative " +
                           std::to_string(node.alt));
    const SymDfa& dfa = g.alt_dfa(pi, node.alt);
    EmitWalk walk(g, dfa);
    const SymbolTable& syms = g.symbols();

    std::string out;
    int state = dfa.start;
    for (const AstNode& child : node.children) {
        int sym;
        if (child.kind == AstNode::Kind::Rule) {
            int ci = g.grammar().production_index(child.rule);
            if (ci < 0)
                return R::fail("unparse-shape",
                               "grammar " + g.name() + " has no production " +
                                   child.rule);
            sym = syms.prod_sym(ci);
        } else {
            int ti = g.grammar().token_index(child.token);
            if (ti < 0)
                return R::fail("unparse-shape",
                               "grammar " + g.name() + " has no token " +
                                   child.token);
            sym = syms.token_sym(ti);
        }
        auto at = walk.advance(
            state, [&](int s) { return dfa.step(s, sym) >= 0; }, node.rule,
            out);
        if (!at) return at.forward<std::string>();
        state = dfa.step(at.value(), sym);

        if (child.kind == AstNode::Kind::Rule) {
            auto sub = unparse_node(set, g, child, opts, depth);
            if (!sub) return sub;
            out += sub.value();
        } else if (child.kind == AstNode::Kind::Token) {
            const TokenDef* def = g.grammar().token(child.token);
            if (def->is_subparser)
                return R::fail("unparse-shape",
                               "token " + child.token +
                                   " is a subparser token but the node "
                                   "carries plain text");
            auto enc = unparse_token(g, child.token, child.text, opts.codecs);
            if (!enc) return enc;
            out += enc.value();
        } else {
            const TokenDef* def = g.grammar().token(child.token);
            if (!def->is_subparser)
                return R::fail("unparse-shape",
                               "token " + child.token +
                                   " is not a subparser token");
            const CompiledGrammar* target = set.target_of(g.name(), child.token);
            if (!target)
                return R::fail("compose-unbound",
                               "subparser token " + child.token +
                                   " of grammar " + g.name() +
                                   " has no binding");
            if (target->name() != child.sub_grammar)
                return R::fail("unparse-shape",
                               "node under " + child.token + " claims grammar " +
                                   child.sub_grammar + " but the binding says " +
                                   target->name());
            auto inner = unparse_document(set, target->name(),
                                          child.children[0], opts, depth + 1);
            if (!inner) return inner;
            // Innermost documents are already final text; this level only
            // applies its own token's encoding on the way out.
            const Codec* codec =
                opts.codecs ? opts.codecs->find(g.name(), child.token)
                            : nullptr;
            const EncodeTable* table = g.grammar().table(child.token);
            std::string encoded;
            if (codec && codec->encode)
                encoded = codec->encode(inner.value());
            else if (table)
                encoded = encode(inner.value(), *table);
            else
                encoded = inner.take();
            if (!g.token_accepts(child.token, encoded))
                return R::fail("unparse-invalid-leaf",
                               "token " + child.token +
                                   " cannot carry the embedded document "
                                   "(encodes to '" +
                                   display(encoded) + "')");
            out += encoded;
        }
    }

    auto fin = walk.advance(
        state, [&](int s) { return dfa.states[s].accept; }, node.rule, out);
    if (!fin) return fin.forward<std::string>();
    return out;
}

} // namespace detail

// Turns an AST back into document text: innermost embedded documents are
// unparsed first, then encoded by the token that carries them on the way
// up. Every leaf is validated against its token after encoding; the first
// violation aborts the whole unparse.
inline Result<std::string> unparse_document(const CompositionSet& set,
                                            const std::string& grammar_name,
                                            const AstNode& ast,
                                            const UnparseOptions& opts,
                                            int depth) {
    using R = Result<std::string>;
    if (depth > opts.max_depth)
        return R::fail("depth-exceeded",
                       "embedded documents nest deeper than " +
                           std::to_string(opts.max_depth));
    const CompiledGrammar* g = set.grammar(grammar_name);
    if (!g)
        return R::fail("compose-unknown-grammar",
                       "no grammar named " + grammar_name);
    return detail::unparse_node(set, *g, ast, opts, depth);
}

inline Result<std::string> unparse_document(const CompiledGrammarPtr& g,
                                            const AstNode& ast,
                                            const UnparseOptions& opts = {}) {
    CompositionSet set = CompositionSet::single(g);
    return unparse_document(set, g->name(), ast, opts);
}

} // namespace armorparse

#endif
