#ifndef ARMORPARSE_REDUCTION_HPP
#define ARMORPARSE_REDUCTION_HPP

#include <string>
#include <string_view>

#include "ast.hpp"
#include "parse_engine.hpp"
#include "unparse_engine.hpp"

namespace armorparse {

// Validates untrusted input against a reduced grammar (same shape as the
// target grammar, but with token languages narrowed to what the application
// actually accepts). Returns the input's AST on success.
inline Result<AstNode> validate_input(const CompositionSet& reduced,
                                      const std::string& grammar_name,
                                      std::string_view text,
                                      const ParseOptions& opts = {}) {
    return parse_document(reduced, grammar_name, text, opts);
}

// Replaces the node at `path` in `ast` with material validated under a
// reduced grammar.
//
//  - Embedded-document node: the fragment is grafted as the new inner
//    document after a dry-run unparse under the slot's bound grammar proves
//    it is expressible there.
//  - Token leaf: the fragment is unparsed under the reduced grammar and the
//    resulting text becomes the leaf's decoded value.
inline Result<AstNode>
embed_validated(const CompositionSet& target, const std::string& grammar_name,
                const AstNode& ast, const AstPath& path,
                const CompositionSet& reduced,
                const std::string& reduced_grammar, const AstNode& fragment,
                const UnparseOptions& opts = {}) {
    using R = Result<AstNode>;
    AstNode out = ast;
    AstNode* node = get_node(out, path);
    if (!node)
        return R::fail("ast-path", "no node at the given path");

    if (node->kind == AstNode::Kind::Sub) {
        auto g = target.grammar(grammar_name);
        if (!g)
            return R::fail("compose-unknown-grammar",
                           "grammar " + grammar_name + " is not loaded");
        // The slot stays bound to its original grammar; the fragment must be
        // expressible there even though it was validated under the reduction.
        auto dry = unparse_document(target, node->sub_grammar, fragment, opts);
        if (!dry) {
            auto d = dry.error();
            return R::fail("embed-incompatible",
                           "fragment does not fit grammar " +
                               node->sub_grammar + ": " + d.message);
        }
        node->children.clear();
        node->children.push_back(fragment);
        return out;
    }

    if (node->kind == AstNode::Kind::Token) {
        auto text = unparse_document(reduced, reduced_grammar, fragment, opts);
        if (!text) return text.forward<AstNode>();
        node->text = text.take();
        return out;
    }

    return R::fail("embed-target",
                   "node at path is a rule node; embedding targets a leaf or "
                   "an embedded document");
}

} // namespace armorparse

#endif
