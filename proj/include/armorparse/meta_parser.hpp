#ifndef ARMORPARSE_META_PARSER_HPP
#define ARMORPARSE_META_PARSER_HPP

#include <cctype>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "diagnostics.hpp"
#include "grammar.hpp"
#include "text.hpp"

namespace armorparse {

namespace detail {

// Hand-written scanner/parser for the grammar definition language and for
// composition manifests. Positions are tracked for diagnostics.
class MetaCursor {
  public:
    explicit MetaCursor(std::string_view src) : src_(src) {}

    void skip_trivia() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
                ++pos_;
            } else if (c == '/' && pos_ + 1 < src_.size() &&
                       src_[pos_ + 1] == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    bool eof() {
        skip_trivia();
        return pos_ >= src_.size();
    }

    char peek() {
        skip_trivia();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    bool at(std::string_view s) {
        skip_trivia();
        return src_.substr(pos_, s.size()) == s;
    }

    bool eat(std::string_view s) {
        if (!at(s)) return false;
        pos_ += s.size();
        return true;
    }

    static bool ident_start(char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
    }
    static bool ident_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    }

    bool at_ident() {
        skip_trivia();
        return pos_ < src_.size() && ident_start(src_[pos_]);
    }

    std::string ident() {
        skip_trivia();
        std::string out;
        while (pos_ < src_.size() && ident_char(src_[pos_])) {
            out += src_[pos_++];
        }
        return out;
    }

    std::string digits() {
        std::string out;
        while (pos_ < src_.size() &&
               std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
            out += src_[pos_++];
        }
        return out;
    }

    // Matches a whole identifier (not a prefix of a longer one).
    bool eat_word(std::string_view w) {
        skip_trivia();
        if (src_.substr(pos_, w.size()) != w) return false;
        std::size_t after = pos_ + w.size();
        if (after < src_.size() && ident_char(src_[after])) return false;
        pos_ = after;
        return true;
    }

    std::size_t pos() const { return pos_; }
    void set_pos(std::size_t p) { pos_ = p; }

    Diagnostic err(std::string code, std::string message) {
        skip_trivia();
        LineCol lc = line_col_at(src_, pos_);
        return Diagnostic{Severity::Error, std::move(code), std::move(message),
                          pos_, lc.line, lc.col};
    }

    // Scans a quoted literal ("..." or '...') and returns its decoded text.
    // Escapes: \\ \' \" \n \r \t \0 and \u{HEX}.
    Result<std::string> quoted() {
        skip_trivia();
        if (pos_ >= src_.size() || (src_[pos_] != '"' && src_[pos_] != '\''))
            return Result<std::string>(err("meta-syntax", "expected literal"));
        char quote = src_[pos_++];
        std::string out;
        while (true) {
            if (pos_ >= src_.size())
                return Result<std::string>(
                    err("meta-syntax", "unterminated literal"));
            char c = src_[pos_++];
            if (c == quote) break;
            if (c == '\n' || c == '\r')
                return Result<std::string>(
                    err("meta-syntax", "literal crosses end of line"));
            if (c != '\\') {
                out += c;
                continue;
            }
            if (pos_ >= src_.size())
                return Result<std::string>(
                    err("meta-syntax", "unterminated escape"));
            char e = src_[pos_++];
            switch (e) {
                case '\\': out += '\\'; break;
                case '\'': out += '\''; break;
                case '"': out += '"'; break;
                case 'n': out += '\n'; break;
                case 'r': out += '\r'; break;
                case 't': out += '\t'; break;
                case '0': out += '\0'; break;
                case 'u': {
                    if (pos_ >= src_.size() || src_[pos_] != '{')
                        return Result<std::string>(
                            err("meta-syntax", "expected { after \\u"));
                    ++pos_;
                    char32_t cp = 0;
                    bool any = false;
                    while (pos_ < src_.size() && src_[pos_] != '}') {
                        char h = src_[pos_++];
                        cp <<= 4;
                        if (h >= '0' && h <= '9') cp |= h - '0';
                        else if (h >= 'a' && h <= 'f') cp |= h - 'a' + 10;
                        else if (h >= 'A' && h <= 'F') cp |= h - 'A' + 10;
                        else
                            return Result<std::string>(err(
                                "meta-syntax", "bad hex digit in \\u{...}"));
                        any = true;
                    }
                    if (pos_ >= src_.size() || !any)
                        return Result<std::string>(
                            err("meta-syntax", "unterminated \\u{...}"));
                    ++pos_;
                    if (!is_scalar(cp))
                        return Result<std::string>(err(
                            "meta-syntax", "\\u{...} is not a Unicode scalar"));
                    utf8_append(out, cp);
                    break;
                }
                default:
                    return Result<std::string>(
                        err("meta-syntax",
                            std::string("unknown escape \\") + e));
            }
        }
        return out;
    }

  private:
    std::string_view src_;
    std::size_t pos_ = 0;
};

// --- token expressions ------------------------------------------------------

inline Result<TokenExprPtr> parse_token_expr(MetaCursor& c);

inline Result<TokenExprPtr> parse_token_factor(MetaCursor& c) {
    if (c.eat("~")) {
        if (!c.eat("("))
            return Result<TokenExprPtr>(c.err("meta-syntax", "expected ( after ~"));
        auto inner = parse_token_expr(c);
        if (!inner) return inner;
        if (!c.eat(")"))
            return Result<TokenExprPtr>(c.err("meta-syntax", "expected )"));
        return TokenExpr::make(TokenExprKind::Complement, {inner.take()});
    }
    if (c.eat("(")) {
        auto inner = parse_token_expr(c);
        if (!inner) return inner;
        if (!c.eat(")"))
            return Result<TokenExprPtr>(c.err("meta-syntax", "expected )"));
        return inner;
    }
    char p = c.peek();
    if (p == '"' || p == '\'') {
        auto lit = c.quoted();
        if (!lit) return lit.forward<TokenExprPtr>();
        std::u32string cs;
        std::size_t i = 0;
        std::string_view sv = lit.value();
        while (i < sv.size()) {
            char32_t cp = utf8_decode(sv, i);
            cs += cp;
        }
        if (p == '\'' && cs.size() != 1)
            return Result<TokenExprPtr>(c.err(
                "meta-syntax", "character literal must hold one character"));
        if (cs.empty())
            return Result<TokenExprPtr>(
                c.err("meta-syntax", "empty literal in token expression"));
        return TokenExpr::make_chars(std::move(cs));
    }
    return Result<TokenExprPtr>(
        c.err("meta-syntax", "expected token expression"));
}

inline Result<TokenExprPtr> parse_token_unary(MetaCursor& c) {
    auto f = parse_token_factor(c);
    if (!f) return f;
    TokenExprPtr e = f.take();
    if (c.eat("*")) return TokenExpr::make(TokenExprKind::Star, {e});
    if (c.eat("+")) return TokenExpr::make(TokenExprKind::Plus, {e});
    if (c.eat("?")) return TokenExpr::make(TokenExprKind::Opt, {e});
    return e;
}

inline bool at_token_factor(MetaCursor& c) {
    char p = c.peek();
    return p == '"' || p == '\'' || p == '~' || p == '(';
}

inline Result<TokenExprPtr> parse_token_seq(MetaCursor& c) {
    std::vector<TokenExprPtr> parts;
    while (at_token_factor(c)) {
        auto u = parse_token_unary(c);
        if (!u) return u;
        parts.push_back(u.take());
    }
    if (parts.empty())
        return Result<TokenExprPtr>(
            c.err("meta-syntax", "expected token expression"));
    if (parts.size() == 1) return parts[0];
    return TokenExpr::make(TokenExprKind::Seq, std::move(parts));
}

inline Result<TokenExprPtr> parse_token_expr(MetaCursor& c) {
    auto first = parse_token_seq(c);
    if (!first) return first;
    std::vector<TokenExprPtr> alts{first.take()};
    while (c.eat("|")) {
        auto next = parse_token_seq(c);
        if (!next) return next;
        alts.push_back(next.take());
    }
    if (alts.size() == 1) return alts[0];
    return TokenExpr::make(TokenExprKind::Alt, std::move(alts));
}

// --- production bodies ------------------------------------------------------

inline Result<ProdExprPtr> parse_prod_expr(MetaCursor& c);

inline Result<ProdExprPtr> parse_prod_factor(MetaCursor& c) {
    if (c.eat("(")) {
        auto inner = parse_prod_expr(c);
        if (!inner) return inner;
        if (!c.eat(")"))
            return Result<ProdExprPtr>(c.err("meta-syntax", "expected )"));
        return inner;
    }
    if (c.peek() == '"') {
        auto lit = c.quoted();
        if (!lit) return lit.forward<ProdExprPtr>();
        if (lit.value().empty())
            return Result<ProdExprPtr>(
                c.err("meta-syntax", "empty keyword literal"));
        return ProdExpr::make_keyword(lit.take());
    }
    if (c.at_ident()) return ProdExpr::make_ref(c.ident());
    return Result<ProdExprPtr>(
        c.err("meta-syntax", "expected symbol, literal or group"));
}

inline Result<ProdExprPtr> parse_prod_unary(MetaCursor& c) {
    auto f = parse_prod_factor(c);
    if (!f) return f;
    ProdExprPtr e = f.take();
    if (c.eat("*")) return ProdExpr::make(ProdExprKind::Star, {e});
    if (c.eat("+")) return ProdExpr::make(ProdExprKind::Plus, {e});
    if (c.eat("?")) return ProdExpr::make(ProdExprKind::Opt, {e});
    return e;
}

inline bool at_prod_factor(MetaCursor& c) {
    return c.peek() == '"' || c.peek() == '(' || c.at_ident();
}

inline Result<ProdExprPtr> parse_prod_seq(MetaCursor& c) {
    std::vector<ProdExprPtr> parts;
    while (at_prod_factor(c)) {
        auto u = parse_prod_unary(c);
        if (!u) return u;
        parts.push_back(u.take());
    }
    if (parts.empty())
        return Result<ProdExprPtr>(
            c.err("meta-syntax", "expected production body"));
    if (parts.size() == 1) return parts[0];
    return ProdExpr::make(ProdExprKind::Seq, std::move(parts));
}

inline Result<ProdExprPtr> parse_prod_expr(MetaCursor& c) {
    auto first = parse_prod_seq(c);
    if (!first) return first;
    std::vector<ProdExprPtr> alts{first.take()};
    while (c.eat("|")) {
        auto next = parse_prod_seq(c);
        if (!next) return next;
        alts.push_back(next.take());
    }
    if (alts.size() == 1) return alts[0];
    return ProdExpr::make(ProdExprKind::Alt, std::move(alts));
}

inline Result<std::vector<GrammarOption>> parse_options(MetaCursor& c) {
    using R = Result<std::vector<GrammarOption>>;
    if (!c.eat("{")) return R(c.err("meta-syntax", "expected { after options"));
    std::vector<GrammarOption> opts;
    while (!c.eat("}")) {
        if (!c.at_ident())
            return R(c.err("meta-syntax", "expected option name"));
        GrammarOption o;
        o.name = c.ident();
        // Multi-word option names ("lexer lookahead").
        while (c.at_ident() && !c.at("=")) {
            std::size_t save = c.pos();
            std::string next = c.ident();
            if (c.at("=")) {
                o.name += " " + next;
                break;
            }
            c.set_pos(save);
            break;
        }
        if (c.eat("=")) {
            c.skip_trivia();
            std::string digits = c.digits();
            if (digits.empty())
                return R(c.err("meta-syntax", "expected option value"));
            o.value = std::stol(digits);
        }
        opts.push_back(std::move(o));
    }
    return opts;
}

} // namespace detail

// Parses one grammar definition file.
inline Result<Grammar> parse_grammar(std::string_view src) {
    using R = Result<Grammar>;
    if (!utf8_valid(src))
        return R::fail("meta-encoding", "grammar source is not valid UTF-8");
    detail::MetaCursor c(src);
    Grammar g;

    if (c.eat_word("package")) {
        std::string pkg;
        if (!c.at_ident())
            return R(c.err("meta-syntax", "expected package name"));
        pkg = c.ident();
        while (c.eat(".")) {
            if (!c.at_ident())
                return R(c.err("meta-syntax", "expected package segment"));
            pkg += "." + c.ident();
        }
        if (!c.eat(";"))
            return R(c.err("meta-syntax", "expected ; after package"));
        g.package = pkg;
    }

    if (!c.eat_word("grammar"))
        return R(c.err("meta-syntax", "expected grammar declaration"));
    if (!c.at_ident()) return R(c.err("meta-syntax", "expected grammar name"));
    g.name = c.ident();
    if (!c.eat("{")) return R(c.err("meta-syntax", "expected {"));

    while (!c.eat("}")) {
        if (c.eof()) return R(c.err("meta-syntax", "unterminated grammar"));
        if (c.eat_word("options")) {
            auto opts = detail::parse_options(c);
            if (!opts) return opts.forward<Grammar>();
            g.options = opts.take();
            continue;
        }
        if (c.eat_word("subparser")) {
            if (!c.eat_word("token"))
                return R(c.err("meta-syntax", "expected token after subparser"));
            if (!c.at_ident())
                return R(c.err("meta-syntax", "expected token name"));
            TokenDef t;
            t.name = c.ident();
            t.is_subparser = true;
            if (!c.eat("=")) return R(c.err("meta-syntax", "expected ="));
            auto e = detail::parse_token_expr(c);
            if (!e) return e.forward<Grammar>();
            t.expr = e.take();
            if (!c.eat(";")) return R(c.err("meta-syntax", "expected ;"));
            if (g.token(t.name))
                return R(c.err("meta-duplicate",
                               "duplicate token " + t.name));
            g.tokens.push_back(std::move(t));
            continue;
        }
        if (c.eat_word("token")) {
            if (!c.at_ident())
                return R(c.err("meta-syntax", "expected token name"));
            TokenDef t;
            t.name = c.ident();
            if (!c.eat("=")) return R(c.err("meta-syntax", "expected ="));
            auto e = detail::parse_token_expr(c);
            if (!e) return e.forward<Grammar>();
            t.expr = e.take();
            if (!c.eat(";")) return R(c.err("meta-syntax", "expected ;"));
            if (g.token(t.name))
                return R(c.err("meta-duplicate",
                               "duplicate token " + t.name));
            g.tokens.push_back(std::move(t));
            continue;
        }
        if (c.eat_word("encodeTable")) {
            if (!c.at_ident())
                return R(c.err("meta-syntax", "expected token name"));
            EncodeTable tbl;
            tbl.token = c.ident();
            if (!c.eat("=")) return R(c.err("meta-syntax", "expected ="));
            if (!c.eat("{")) return R(c.err("meta-syntax", "expected {"));
            bool first = true;
            while (!c.eat("}")) {
                if (!first && !c.eat(","))
                    return R(c.err("meta-syntax", "expected , or }"));
                if (c.eat("}")) break; // trailing comma
                first = false;
                auto ctrl = c.quoted();
                if (!ctrl) return ctrl.forward<Grammar>();
                if (!c.eat("->"))
                    return R(c.err("meta-syntax", "expected ->"));
                auto esc = c.quoted();
                if (!esc) return esc.forward<Grammar>();
                tbl.rules.push_back({ctrl.take(), esc.take()});
            }
            if (!c.eat(";")) return R(c.err("meta-syntax", "expected ;"));
            if (g.table(tbl.token))
                return R(c.err("meta-duplicate",
                               "duplicate table for token " + tbl.token));
            g.tables.push_back(std::move(tbl));
            continue;
        }
        if (c.at_ident()) {
            Production p;
            p.name = c.ident();
            if (!c.eat("=")) return R(c.err("meta-syntax", "expected ="));
            auto body = detail::parse_prod_expr(c);
            if (!body) return body.forward<Grammar>();
            p.body = body.take();
            if (!c.eat(";")) return R(c.err("meta-syntax", "expected ;"));
            if (g.production(p.name))
                return R(c.err("meta-duplicate",
                               "duplicate production " + p.name));
            g.productions.push_back(std::move(p));
            continue;
        }
        return R(c.err("meta-syntax", "expected declaration"));
    }
    if (!c.eof()) return R(c.err("meta-syntax", "trailing input after grammar"));
    if (g.name.empty()) return R(c.err("meta-syntax", "missing grammar name"));
    if (g.productions.empty())
        return R(c.err("meta-syntax", "grammar has no productions"));
    return g;
}

// Parses a composition manifest against a set of already-loaded grammars.
inline Result<CompositionManifest>
parse_manifest(std::string_view src, const std::vector<const Grammar*>& grammars) {
    using R = Result<CompositionManifest>;
    if (!utf8_valid(src))
        return R::fail("meta-encoding", "manifest is not valid UTF-8");
    detail::MetaCursor c(src);
    auto find = [&](const std::string& name) -> const Grammar* {
        for (const Grammar* g : grammars)
            if (g && g->name == name) return g;
        return nullptr;
    };
    if (!c.eat_word("compose"))
        return R(c.err("meta-syntax", "expected compose"));
    if (!c.eat("{")) return R(c.err("meta-syntax", "expected {"));
    CompositionManifest m;
    while (!c.eat("}")) {
        if (c.eof()) return R(c.err("meta-syntax", "unterminated manifest"));
        if (!c.at_ident())
            return R(c.err("meta-syntax", "expected grammar name"));
        Binding b;
        b.grammar = c.ident();
        if (!c.eat(".")) return R(c.err("meta-syntax", "expected ."));
        if (!c.at_ident()) return R(c.err("meta-syntax", "expected token name"));
        b.token = c.ident();
        if (!c.eat("->")) return R(c.err("meta-syntax", "expected ->"));
        if (!c.at_ident())
            return R(c.err("meta-syntax", "expected target grammar"));
        b.target = c.ident();
        if (!c.eat(";")) return R(c.err("meta-syntax", "expected ;"));

        const Grammar* owner = find(b.grammar);
        if (!owner)
            return R(c.err("compose-unknown-grammar",
                           "unknown grammar " + b.grammar));
        const TokenDef* tok = owner->token(b.token);
        if (!tok)
            return R(c.err("compose-unknown-token",
                           b.grammar + " has no token " + b.token));
        if (!tok->is_subparser)
            return R(c.err("compose-not-subparser",
                           b.grammar + "." + b.token +
                               " is not a subparser token"));
        if (!find(b.target))
            return R(c.err("compose-unknown-grammar",
                           "unknown grammar " + b.target));
        if (m.binding_for(b.grammar, b.token))
            return R(c.err("compose-duplicate",
                           "duplicate binding for " + b.grammar + "." +
                               b.token));
        m.bindings.push_back(std::move(b));
    }
    if (!c.eof())
        return R(c.err("meta-syntax", "trailing input after manifest"));
    return m;
}

// ---------------------------------------------------------------------------
// Canonical serialization. parse_grammar(grammar_to_text(g)) reproduces g.
// ---------------------------------------------------------------------------

namespace detail {

inline void append_quoted(std::string& out, std::string_view text, char quote) {
    out += quote;
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t start = i;
        char32_t cp = utf8_decode(text, i);
        if (cp == U'\\') {
            out += "\\\\";
        } else if (cp == static_cast<char32_t>(quote)) {
            out += '\\';
            out += quote;
        } else if (cp == U'\n') {
            out += "\\n";
        } else if (cp == U'\r') {
            out += "\\r";
        } else if (cp == U'\t') {
            out += "\\t";
        } else if (cp < 0x20 || cp == 0x7F) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "\\u{%X}", static_cast<unsigned>(cp));
            out += buf;
        } else {
            out += text.substr(start, i - start);
        }
    }
    out += quote;
}

// Precedence levels: 0 alt, 1 seq, 2 unary, 3 factor.
inline int token_expr_prec(const TokenExpr& e) {
    switch (e.kind) {
        case TokenExprKind::Alt: return 0;
        case TokenExprKind::Seq: return 1;
        case TokenExprKind::Star:
        case TokenExprKind::Plus:
        case TokenExprKind::Opt: return 2;
        default: return 3;
    }
}

inline void print_token_expr(std::string& out, const TokenExpr& e, int ctx) {
    int prec = token_expr_prec(e);
    bool wrap = prec < ctx;
    if (wrap) out += '(';
    switch (e.kind) {
        case TokenExprKind::Chars: {
            std::string utf8;
            for (char32_t cp : e.chars) utf8_append(utf8, cp);
            append_quoted(out, utf8, e.chars.size() == 1 ? '\'' : '"');
            break;
        }
        case TokenExprKind::Complement:
            out += '~';
            out += '(';
            print_token_expr(out, *e.children[0], 0);
            out += ')';
            break;
        case TokenExprKind::Seq:
            for (std::size_t i = 0; i < e.children.size(); ++i) {
                if (i) out += ' ';
                print_token_expr(out, *e.children[i], 2);
            }
            break;
        case TokenExprKind::Alt:
            for (std::size_t i = 0; i < e.children.size(); ++i) {
                if (i) out += '|';
                print_token_expr(out, *e.children[i], 1);
            }
            break;
        case TokenExprKind::Star:
        case TokenExprKind::Plus:
        case TokenExprKind::Opt:
            print_token_expr(out, *e.children[0], 3);
            out += e.kind == TokenExprKind::Star  ? '*'
                   : e.kind == TokenExprKind::Plus ? '+'
                                                   : '?';
            break;
    }
    if (wrap) out += ')';
}

inline int prod_expr_prec(const ProdExpr& e) {
    switch (e.kind) {
        case ProdExprKind::Alt: return 0;
        case ProdExprKind::Seq: return 1;
        case ProdExprKind::Star:
        case ProdExprKind::Plus:
        case ProdExprKind::Opt: return 2;
        default: return 3;
    }
}

inline void print_prod_expr(std::string& out, const ProdExpr& e, int ctx) {
    int prec = prod_expr_prec(e);
    bool wrap = prec < ctx;
    if (wrap) out += '(';
    switch (e.kind) {
        case ProdExprKind::Ref: out += e.name; break;
        case ProdExprKind::Keyword: append_quoted(out, e.text, '"'); break;
        case ProdExprKind::Seq:
            for (std::size_t i = 0; i < e.children.size(); ++i) {
                if (i) out += ' ';
                print_prod_expr(out, *e.children[i], 2);
            }
            break;
        case ProdExprKind::Alt:
            for (std::size_t i = 0; i < e.children.size(); ++i) {
                if (i) out += " | ";
                print_prod_expr(out, *e.children[i], 1);
            }
            break;
        case ProdExprKind::Star:
        case ProdExprKind::Plus:
        case ProdExprKind::Opt:
            print_prod_expr(out, *e.children[0], 3);
            out += e.kind == ProdExprKind::Star  ? '*'
                   : e.kind == ProdExprKind::Plus ? '+'
                                                  : '?';
            break;
    }
    if (wrap) out += ')';
}

} // namespace detail

inline std::string grammar_to_text(const Grammar& g) {
    std::string out;
    if (!g.package.empty()) out += "package " + g.package + ";\n\n";
    out += "grammar " + g.name + " {\n";
    if (!g.options.empty()) {
        out += "  options {";
        for (const auto& o : g.options) {
            out += " " + o.name;
            if (o.value) out += " = " + std::to_string(*o.value);
        }
        out += " }\n";
    }
    for (const auto& p : g.productions) {
        out += "  " + p.name + " = ";
        detail::print_prod_expr(out, *p.body, 0);
        out += ";\n";
    }
    for (const auto& t : g.tokens) {
        out += "  ";
        if (t.is_subparser) out += "subparser ";
        out += "token " + t.name + " = ";
        detail::print_token_expr(out, *t.expr, 0);
        out += ";\n";
    }
    for (const auto& tbl : g.tables) {
        out += "  encodeTable " + tbl.token + " = {";
        for (std::size_t i = 0; i < tbl.rules.size(); ++i) {
            out += i ? ", " : " ";
            detail::append_quoted(out, tbl.rules[i].control, '"');
            out += " -> ";
            detail::append_quoted(out, tbl.rules[i].escape, '"');
        }
        out += " };\n";
    }
    out += "}\n";
    return out;
}

} // namespace armorparse

#endif
