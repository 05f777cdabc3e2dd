#ifndef ARMORPARSE_AST_HPP
#define ARMORPARSE_AST_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "diagnostics.hpp"

namespace armorparse {

// Parse result. Token leaves hold decoded text; constant tokens and keyword
// literals are not materialized, the grammar re-derives them on unparse.
// A Sub node wraps the parse of an embedded document: children[0] is the
// root of the sub-grammar's tree.
struct AstNode {
    enum class Kind { Rule, Token, Sub };

    Kind kind = Kind::Rule;
    std::string rule;   // Rule: production name
    int alt = 0;        // Rule: index of the matched top-level alternative
    std::string token;  // Token/Sub: token name
    std::string text;   // Token: decoded leaf text
    std::string sub_grammar; // Sub: grammar the token content parses under
    std::vector<AstNode> children;

    static AstNode make_rule(std::string name, int alt_index) {
        AstNode n;
        n.kind = Kind::Rule;
        n.rule = std::move(name);
        n.alt = alt_index;
        return n;
    }
    static AstNode make_token(std::string name, std::string decoded) {
        AstNode n;
        n.kind = Kind::Token;
        n.token = std::move(name);
        n.text = std::move(decoded);
        return n;
    }
    static AstNode make_sub(std::string token_name, std::string grammar,
                            AstNode inner) {
        AstNode n;
        n.kind = Kind::Sub;
        n.token = std::move(token_name);
        n.sub_grammar = std::move(grammar);
        n.children.push_back(std::move(inner));
        return n;
    }
};

inline bool ast_equal(const AstNode& a, const AstNode& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case AstNode::Kind::Rule:
            if (a.rule != b.rule || a.alt != b.alt) return false;
            break;
        case AstNode::Kind::Token:
            return a.token == b.token && a.text == b.text;
        case AstNode::Kind::Sub:
            if (a.token != b.token || a.sub_grammar != b.sub_grammar)
                return false;
            break;
    }
    if (a.children.size() != b.children.size()) return false;
    for (std::size_t i = 0; i < a.children.size(); ++i)
        if (!ast_equal(a.children[i], b.children[i])) return false;
    return true;
}

// Equality up to leaf text: same shape, rules, alternatives and token names.
inline bool skeleton_equal(const AstNode& a, const AstNode& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case AstNode::Kind::Rule:
            if (a.rule != b.rule || a.alt != b.alt) return false;
            break;
        case AstNode::Kind::Token:
            return a.token == b.token;
        case AstNode::Kind::Sub:
            if (a.token != b.token || a.sub_grammar != b.sub_grammar)
                return false;
            break;
    }
    if (a.children.size() != b.children.size()) return false;
    for (std::size_t i = 0; i < a.children.size(); ++i)
        if (!skeleton_equal(a.children[i], b.children[i])) return false;
    return true;
}

inline AstNode skeleton(const AstNode& n) {
    AstNode s = n;
    if (s.kind == AstNode::Kind::Token) s.text.clear();
    for (auto& c : s.children) c = skeleton(c);
    return s;
}

// --- paths -------------------------------------------------------------------

using AstPath = std::vector<std::size_t>;

inline const AstNode* get_node(const AstNode& root, const AstPath& path) {
    const AstNode* cur = &root;
    for (std::size_t idx : path) {
        if (idx >= cur->children.size()) return nullptr;
        cur = &cur->children[idx];
    }
    return cur;
}

inline AstNode* get_node(AstNode& root, const AstPath& path) {
    return const_cast<AstNode*>(
        get_node(static_cast<const AstNode&>(root), path));
}

inline Result<bool> set_leaf(AstNode& root, const AstPath& path,
                             std::string text) {
    AstNode* n = get_node(root, path);
    if (!n) return Result<bool>::fail("ast-path", "path leads nowhere");
    if (n->kind != AstNode::Kind::Token)
        return Result<bool>::fail("ast-path", "path does not name a leaf");
    n->text = std::move(text);
    return true;
}

template <typename Fn>
inline void walk(const AstNode& n, AstPath& path, Fn&& fn) {
    fn(n, const_cast<const AstPath&>(path));
    for (std::size_t i = 0; i < n.children.size(); ++i) {
        path.push_back(i);
        walk(n.children[i], path, fn);
        path.pop_back();
    }
}

template <typename Fn>
inline void walk(const AstNode& n, Fn&& fn) {
    AstPath path;
    walk(n, path, fn);
}

// --- JSON --------------------------------------------------------------------

inline nlohmann::json ast_to_json(const AstNode& n) {
    nlohmann::json j;
    switch (n.kind) {
        case AstNode::Kind::Rule: {
            j["rule"] = n.rule;
            j["alt"] = n.alt;
            auto arr = nlohmann::json::array();
            for (const auto& c : n.children) arr.push_back(ast_to_json(c));
            j["children"] = std::move(arr);
            break;
        }
        case AstNode::Kind::Token:
            j["token"] = n.token;
            j["text"] = n.text;
            break;
        case AstNode::Kind::Sub:
            j["subparser"] = n.token;
            j["grammar"] = n.sub_grammar;
            j["ast"] = ast_to_json(n.children[0]);
            break;
    }
    return j;
}

inline Result<AstNode> ast_from_json(const nlohmann::json& j) {
    using R = Result<AstNode>;
    if (!j.is_object()) return R::fail("ast-json", "node must be an object");
    if (j.contains("rule")) {
        if (!j["rule"].is_string() || !j.contains("alt") ||
            !j["alt"].is_number_integer() || !j.contains("children") ||
            !j["children"].is_array())
            return R::fail("ast-json", "malformed rule node");
        AstNode n = AstNode::make_rule(j["rule"].get<std::string>(),
                                       j["alt"].get<int>());
        for (const auto& c : j["children"]) {
            auto child = ast_from_json(c);
            if (!child) return child;
            n.children.push_back(child.take());
        }
        return n;
    }
    if (j.contains("subparser")) {
        if (!j["subparser"].is_string() || !j.contains("grammar") ||
            !j["grammar"].is_string() || !j.contains("ast"))
            return R::fail("ast-json", "malformed subparser node");
        auto inner = ast_from_json(j["ast"]);
        if (!inner) return inner;
        return AstNode::make_sub(j["subparser"].get<std::string>(),
                                 j["grammar"].get<std::string>(),
                                 inner.take());
    }
    if (j.contains("token")) {
        if (!j["token"].is_string() || !j.contains("text") ||
            !j["text"].is_string())
            return R::fail("ast-json", "malformed token node");
        return AstNode::make_token(j["token"].get<std::string>(),
                                   j["text"].get<std::string>());
    }
    return R::fail("ast-json", "node is neither rule, token nor subparser");
}

} // namespace armorparse

#endif
