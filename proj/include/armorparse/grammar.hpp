#ifndef ARMORPARSE_GRAMMAR_HPP
#define ARMORPARSE_GRAMMAR_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace armorparse {

// ---------------------------------------------------------------------------
// Token expressions: character-level regular expressions.
// ---------------------------------------------------------------------------

struct TokenExpr;
using TokenExprPtr = std::shared_ptr<const TokenExpr>;

enum class TokenExprKind {
    Chars,      // literal character sequence ('a', "abc")
    Complement, // ~( e )  where e's language is a set of single characters
    Seq,
    Alt,
    Star, // e*
    Plus, // e+
    Opt,  // e?
};

struct TokenExpr {
    TokenExprKind kind;
    std::u32string chars;             // Chars
    std::vector<TokenExprPtr> children; // Complement(1), Seq, Alt, Star/Plus/Opt(1)

    static TokenExprPtr make_chars(std::u32string cs) {
        auto e = std::make_shared<TokenExpr>();
        e->kind = TokenExprKind::Chars;
        e->chars = std::move(cs);
        return e;
    }
    static TokenExprPtr make(TokenExprKind k, std::vector<TokenExprPtr> cs) {
        auto e = std::make_shared<TokenExpr>();
        e->kind = k;
        e->children = std::move(cs);
        return e;
    }
};

// ---------------------------------------------------------------------------
// Production bodies: regular expressions over grammar symbols.
// ---------------------------------------------------------------------------

struct ProdExpr;
using ProdExprPtr = std::shared_ptr<const ProdExpr>;

enum class ProdExprKind {
    Ref,     // reference to a production or named token
    Keyword, // inline literal terminal
    Seq,
    Alt,
    Star,
    Plus,
    Opt,
};

struct ProdExpr {
    ProdExprKind kind;
    std::string name;   // Ref
    std::string text;   // Keyword (decoded literal text)
    std::vector<ProdExprPtr> children;

    static ProdExprPtr make_ref(std::string n) {
        auto e = std::make_shared<ProdExpr>();
        e->kind = ProdExprKind::Ref;
        e->name = std::move(n);
        return e;
    }
    static ProdExprPtr make_keyword(std::string t) {
        auto e = std::make_shared<ProdExpr>();
        e->kind = ProdExprKind::Keyword;
        e->text = std::move(t);
        return e;
    }
    static ProdExprPtr make(ProdExprKind k, std::vector<ProdExprPtr> cs) {
        auto e = std::make_shared<ProdExpr>();
        e->kind = k;
        e->children = std::move(cs);
        return e;
    }
};

// ---------------------------------------------------------------------------
// Declarations.
// ---------------------------------------------------------------------------

struct TokenDef {
    std::string name;
    TokenExprPtr expr;
    bool is_subparser = false;
};

struct EncodeRule {
    std::string control; // decoded character (one scalar, UTF-8)
    std::string escape;  // encoded replacement
};

struct EncodeTable {
    std::string token; // name of the token the table attaches to
    std::vector<EncodeRule> rules;

    const EncodeRule* rule_for(const std::string& control) const {
        for (const auto& r : rules)
            if (r.control == control) return &r;
        return nullptr;
    }
};

struct Production {
    std::string name;
    ProdExprPtr body;

    // Top-level alternatives; the parser reports which one matched.
    std::vector<ProdExprPtr> alternatives() const {
        if (body && body->kind == ProdExprKind::Alt) return body->children;
        return {body};
    }
};

struct GrammarOption {
    std::string name;              // e.g. "nostring", "lexer lookahead"
    std::optional<long> value;     // e.g. 4
};

struct Grammar {
    std::string package;
    std::string name;
    std::vector<GrammarOption> options;
    std::vector<Production> productions; // declaration order; first is root
    std::vector<TokenDef> tokens;        // declaration order
    std::vector<EncodeTable> tables;

    const Production* production(const std::string& n) const {
        for (const auto& p : productions)
            if (p.name == n) return &p;
        return nullptr;
    }
    int production_index(const std::string& n) const {
        for (std::size_t i = 0; i < productions.size(); ++i)
            if (productions[i].name == n) return static_cast<int>(i);
        return -1;
    }
    const TokenDef* token(const std::string& n) const {
        for (const auto& t : tokens)
            if (t.name == n) return &t;
        return nullptr;
    }
    int token_index(const std::string& n) const {
        for (std::size_t i = 0; i < tokens.size(); ++i)
            if (tokens[i].name == n) return static_cast<int>(i);
        return -1;
    }
    const EncodeTable* table(const std::string& token_name) const {
        for (const auto& t : tables)
            if (t.token == token_name) return &t;
        return nullptr;
    }
};

// ---------------------------------------------------------------------------
// Composition manifests.
// ---------------------------------------------------------------------------

struct Binding {
    std::string grammar; // grammar owning the subparser token
    std::string token;   // the subparser token
    std::string target;  // grammar parsed inside that token
};

struct CompositionManifest {
    std::vector<Binding> bindings;

    const Binding* binding_for(const std::string& grammar,
                               const std::string& token) const {
        for (const auto& b : bindings)
            if (b.grammar == grammar && b.token == token) return &b;
        return nullptr;
    }
};

} // namespace armorparse

#endif
