#pragma once

#include "resp/error.hpp"
#include "resp/expression.hpp"
#include "resp/model.hpp"
#include "resp/rational.hpp"
#include "resp/responsibility.hpp"
#include "resp/signature.hpp"

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

// Textual format for models and responsibility scenarios:
//
//   model {
//     exo U1 in {0, 1}
//     var A1 in {0, 1} := U1
//     var V in {0, 1} := A1 | A2
//   }
//   context { U1 = 1 }
//   outcome V == 1
//   agent Assassin1 {
//     action A1
//     epistemic {
//       world 0.6 { U2 = 1 }
//       world 2/5 { U2 = 0  BH1 := 0 }
//     }
//   }
//
// `#` starts a comment. Newlines are ordinary whitespace. Connectives accept
// `!`/`not`/`¬`, `&`/`and`/`∧`, `|`/`or`/`∨`; `case { g -> v, ..., else -> v }`
// selects among values.

namespace resp::dsl {

struct SourceDiagnostic {
    enum class Severity { error, warning };
    Severity severity = Severity::error;
    /// Stable category: syntax, unknown-variable, range, cycle, duplicate,
    /// context, empty-model, weight-sum, type, missing.
    std::string code;
    std::string message;
    std::size_t line = 1;
    std::size_t column = 1;
    std::string excerpt;
};

inline std::string format(const SourceDiagnostic& d, std::string_view source_name = "<input>") {
    std::ostringstream os;
    os << source_name << ':' << d.line << ':' << d.column << ": "
       << (d.severity == SourceDiagnostic::Severity::error ? "error" : "warning") << ": " << d.message;
    if (!d.excerpt.empty()) {
        os << "\n  " << d.excerpt << "\n  " << std::string(d.column > 0 ? d.column - 1 : 0, ' ') << '^';
    }
    return os.str();
}

class ParseError : public Error {
public:
    explicit ParseError(std::vector<SourceDiagnostic> diagnostics)
        : Error(summary(diagnostics)), diagnostics_(std::move(diagnostics)) {}
    const std::vector<SourceDiagnostic>& diagnostics() const noexcept { return diagnostics_; }

private:
    static std::string summary(const std::vector<SourceDiagnostic>& ds) {
        if (ds.empty()) return "parse error";
        std::string s = std::to_string(ds.front().line) + ":" + std::to_string(ds.front().column) + ": " +
                        ds.front().message;
        if (ds.size() > 1) s += " (and " + std::to_string(ds.size() - 1) + " more)";
        return s;
    }
    std::vector<SourceDiagnostic> diagnostics_;
};

// ---------------------------------------------------------------------------
// Document

struct Assign {
    std::string var;
    std::string value;
    bool operator==(const Assign&) const = default;
};

struct VariableDecl {
    std::string name;
    bool exogenous = false;
    std::vector<std::string> range;
    std::optional<Expr> equation;
    bool operator==(const VariableDecl&) const = default;
};

struct EquationOverride {
    std::string var;
    Expr equation;
    bool operator==(const EquationOverride&) const = default;
};

struct WorldDecl {
    Rational weight;
    std::vector<Assign> context;
    std::vector<EquationOverride> equations;
    bool operator==(const WorldDecl&) const = default;
};

struct AgentDecl {
    std::string name;
    std::string action;
    std::vector<WorldDecl> worlds;
    bool operator==(const AgentDecl&) const = default;
};

struct ScenarioDocument {
    std::vector<VariableDecl> variables;
    std::vector<Assign> context;
    std::optional<Assign> outcome;
    std::vector<AgentDecl> agents;
    bool operator==(const ScenarioDocument&) const = default;
};

// ---------------------------------------------------------------------------
// Lexer

namespace detail {

struct Pos {
    std::size_t line = 1;
    std::size_t column = 1;
};

enum class Tok {
    ident, number, lbrace, rbrace, lparen, rparen, lbracket, rbracket, comma, semicolon,
    assign, define, eq, ne, arrow, larrow, slash, bang, amp, pipe, end
};

struct Token {
    Tok kind = Tok::end;
    std::string text;
    Pos pos;
};

class Diagnostics {
public:
    explicit Diagnostics(std::string_view source) {
        std::size_t start = 0;
        for (std::size_t i = 0; i <= source.size(); ++i)
            if (i == source.size() || source[i] == '\n') {
                lines_.emplace_back(source.substr(start, i - start));
                start = i + 1;
            }
    }

    void error(Pos p, std::string code, std::string message) {
        SourceDiagnostic d;
        d.code = std::move(code);
        d.message = std::move(message);
        d.line = std::clamp<std::size_t>(p.line, 1, lines_.size());
        const auto& text = lines_[d.line - 1];
        d.column = std::clamp<std::size_t>(p.column, 1, text.size() + 1);
        d.excerpt = printable(text);
        list_.push_back(std::move(d));
    }

    bool empty() const noexcept { return list_.empty(); }
    std::size_t size() const noexcept { return list_.size(); }
    std::vector<SourceDiagnostic> take() { return std::move(list_); }
    Pos end_pos() const { return {lines_.size(), lines_.back().size() + 1}; }

private:
    static std::string printable(const std::string& s) {
        std::string out;
        for (unsigned char c : s) out += (c == '\t' || (c >= 0x20 && c != 0x7f)) ? static_cast<char>(c) : '?';
        return out;
    }

    std::vector<std::string> lines_;
    std::vector<SourceDiagnostic> list_;
};

inline std::vector<Token> lex(std::string_view src, Diagnostics& diags) {
    std::vector<Token> out;
    std::size_t i = 0, line = 1, col = 1;
    auto advance = [&](std::size_t n) {
        i += n;
        col += n;
    };
    auto push = [&](Tok k, std::size_t len) {
        out.push_back({k, std::string(src.substr(i, len)), {line, col}});
        advance(len);
    };
    auto starts = [&](std::string_view s) { return src.substr(i, s.size()) == s; };
    while (i < src.size()) {
        unsigned char c = static_cast<unsigned char>(src[i]);
        if (c == '\n') {
            ++i;
            ++line;
            col = 1;
        } else if (c == ' ' || c == '\t' || c == '\r') {
            advance(1);
        } else if (c == '#') {
            while (i < src.size() && src[i] != '\n') advance(1);
        } else if (std::isalpha(c)) {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            push(Tok::ident, j - i);
        } else if (std::isdigit(c)) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            if (j + 1 < src.size() && src[j] == '.' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
                ++j;
                while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            }
            push(Tok::number, j - i);
        } else if (starts(":=")) {
            push(Tok::define, 2);
        } else if (starts("==")) {
            push(Tok::eq, 2);
        } else if (starts("!=")) {
            push(Tok::ne, 2);
        } else if (starts("->")) {
            push(Tok::arrow, 2);
        } else if (starts("<-")) {
            push(Tok::larrow, 2);
        } else if (starts("\xC2\xAC")) {  // ¬
            push(Tok::bang, 2);
        } else if (starts("\xE2\x88\xA7")) {  // ∧
            push(Tok::amp, 3);
        } else if (starts("\xE2\x88\xA8")) {  // ∨
            push(Tok::pipe, 3);
        } else if (starts("\xE2\x86\x90")) {  // ←
            push(Tok::larrow, 3);
        } else if (starts("\xE2\x86\x92")) {  // →
            push(Tok::arrow, 3);
        } else {
            Tok k;
            switch (c) {
            case '{': k = Tok::lbrace; break;
            case '}': k = Tok::rbrace; break;
            case '(': k = Tok::lparen; break;
            case ')': k = Tok::rparen; break;
            case '[': k = Tok::lbracket; break;
            case ']': k = Tok::rbracket; break;
            case ',': k = Tok::comma; break;
            case ';': k = Tok::semicolon; break;
            case '=': k = Tok::assign; break;
            case '/': k = Tok::slash; break;
            case '!': k = Tok::bang; break;
            case '&': k = Tok::amp; break;
            case '|': k = Tok::pipe; break;
            default: {
                std::string shown = (c >= 0x20 && c < 0x7f) ? std::string(1, static_cast<char>(c))
                                                            : "byte 0x" + std::string(1, "0123456789abcdef"[c >> 4]) +
                                                                  "0123456789abcdef"[c & 15];
                diags.error({line, col}, "syntax", "unexpected character '" + shown + "'");
                advance(1);
                continue;
            }
            }
            push(k, 1);
        }
    }
    out.push_back({Tok::end, "", {line, col}});
    return out;
}

// ---------------------------------------------------------------------------
// Raw syntax tree with positions, converted to Expr once declarations are known.

struct RawExpr {
    enum class Kind { name, number, eq, ne, negation, conjunction, disjunction, cases };
    Kind kind = Kind::name;
    std::string text;   // name, number, or compared variable
    std::string value;  // compared value
    Pos pos;
    Pos value_pos;
    std::vector<RawExpr> kids;
};

struct RawAssign {
    std::string var, value;
    Pos pos, value_pos;
};

struct RawEquation {
    std::string var;
    Pos pos;
    RawExpr expr;
};

struct RawVar {
    std::string name;
    bool exogenous = false;
    Pos pos;
    std::vector<std::pair<std::string, Pos>> range;
    std::optional<RawExpr> equation;
};

struct RawWorld {
    Pos pos;
    std::optional<Rational> weight;
    std::vector<RawAssign> context;
    std::vector<RawEquation> equations;
};

struct RawAgent {
    std::string name;
    Pos pos;
    std::string action;
    Pos action_pos;
    std::vector<RawWorld> worlds;
};

struct RawDocument {
    std::optional<Pos> model_pos;
    std::vector<RawVar> vars;
    std::optional<Pos> context_pos;
    std::vector<RawAssign> context;
    std::optional<RawAssign> outcome;
    std::vector<RawAgent> agents;
};

struct SyntaxStop {};

class Parser {
public:
    Parser(std::vector<Token> tokens, Diagnostics& diags) : toks_(std::move(tokens)), diags_(diags) {}

    RawDocument document() {
        RawDocument doc;
        while (!at(Tok::end)) {
            try {
                const Token& t = peek();
                if (is_word("model")) {
                    if (doc.model_pos) diags_.error(t.pos, "duplicate", "second model block");
                    doc.model_pos = t.pos;
                    next();
                    model_block(doc);
                } else if (is_word("context")) {
                    if (doc.context_pos) diags_.error(t.pos, "duplicate", "second context block");
                    doc.context_pos = t.pos;
                    next();
                    expect(Tok::lbrace, "'{'");
                    while (!at(Tok::rbrace) && !at(Tok::end)) {
                        try {
                            doc.context.push_back(assignment());
                            skip_separators();
                        } catch (SyntaxStop) {
                            recover({"context", "model", "outcome", "agent"});
                            if (!at(Tok::rbrace)) break;
                        }
                    }
                    expect(Tok::rbrace, "'}'");
                } else if (is_word("outcome")) {
                    if (doc.outcome) diags_.error(t.pos, "duplicate", "second outcome declaration");
                    next();
                    RawAssign o;
                    o.pos = peek().pos;
                    o.var = identifier("outcome variable");
                    expect(Tok::eq, "'=='");
                    o.value_pos = peek().pos;
                    o.value = value_token();
                    doc.outcome = std::move(o);
                } else if (is_word("agent")) {
                    next();
                    doc.agents.push_back(agent());
                } else {
                    fail(t.pos, "expected 'model', 'context', 'outcome' or 'agent', found " + describe(t));
                }
            } catch (SyntaxStop) {
                recover_top();
            }
        }
        return doc;
    }

    /// `[X <- x, ...] body` or a bare body.
    std::pair<std::vector<RawAssign>, RawExpr> formula() {
        std::vector<RawAssign> interventions;
        if (accept(Tok::lbracket)) {
            while (!at(Tok::rbracket)) {
                RawAssign a;
                a.pos = peek().pos;
                a.var = identifier("intervened variable");
                expect(Tok::larrow, "'<-'");
                a.value_pos = peek().pos;
                a.value = value_token();
                interventions.push_back(std::move(a));
                if (!accept(Tok::comma)) break;
            }
            expect(Tok::rbracket, "']'");
        }
        RawExpr body = expression();
        if (!at(Tok::end)) fail(peek().pos, "unexpected " + describe(peek()) + " after formula");
        return {std::move(interventions), std::move(body)};
    }

    RawExpr expression() { return disjunction(); }

    bool at(Tok k) const { return peek().kind == k; }
    const Token& peek() const { return toks_[pos_]; }

private:
    const Token& next() {
        const Token& t = toks_[pos_];
        if (t.kind != Tok::end) ++pos_;
        return t;
    }
    bool accept(Tok k) {
        if (!at(k)) return false;
        next();
        return true;
    }
    bool is_word(std::string_view w) const { return at(Tok::ident) && peek().text == w; }

    [[noreturn]] void fail(Pos p, std::string message) {
        diags_.error(p, "syntax", std::move(message));
        throw SyntaxStop{};
    }

    static std::string describe(const Token& t) {
        if (t.kind == Tok::end) return "end of input";
        return "'" + t.text + "'";
    }

    void expect(Tok k, std::string_view what) {
        if (!accept(k)) fail(peek().pos, "expected " + std::string(what) + ", found " + describe(peek()));
    }

    std::string identifier(std::string_view what) {
        const Token& t = peek();
        if (t.kind != Tok::ident) fail(t.pos, "expected " + std::string(what) + ", found " + describe(t));
        if (is_keyword(t.text)) fail(t.pos, "'" + t.text + "' is a keyword and cannot name " + std::string(what));
        return next().text;
    }

    std::string value_token() {
        const Token& t = peek();
        if (t.kind == Tok::number) {
            if (t.text != "0" && t.text != "1")
                fail(t.pos, "numeric value '" + t.text + "' is not allowed; only 0 and 1 are reserved values");
            return next().text;
        }
        if (t.kind == Tok::ident && !is_keyword(t.text)) return next().text;
        fail(t.pos, "expected a value, found " + describe(t));
    }

    void skip_separators() {
        while (accept(Tok::comma) || accept(Tok::semicolon)) {
        }
    }

    RawAssign assignment() {
        RawAssign a;
        a.pos = peek().pos;
        a.var = identifier("variable");
        expect(Tok::assign, "'='");
        a.value_pos = peek().pos;
        a.value = value_token();
        return a;
    }

    void model_block(RawDocument& doc) {
        expect(Tok::lbrace, "'{'");
        while (!at(Tok::rbrace) && !at(Tok::end)) {
            try {
                RawVar v;
                if (is_word("exo"))
                    v.exogenous = true;
                else if (!is_word("var"))
                    fail(peek().pos, "expected 'exo' or 'var', found " + describe(peek()));
                next();
                v.pos = peek().pos;
                v.name = identifier("variable");
                if (!is_word("in")) fail(peek().pos, "expected 'in', found " + describe(peek()));
                next();
                expect(Tok::lbrace, "'{'");
                while (!at(Tok::rbrace)) {
                    Pos p = peek().pos;
                    v.range.emplace_back(value_token(), p);
                    if (!accept(Tok::comma)) break;
                }
                expect(Tok::rbrace, "'}'");
                if (!v.exogenous) {
                    expect(Tok::define, "':='");
                    v.equation = expression();
                } else if (at(Tok::define)) {
                    fail(peek().pos, "exogenous variable '" + v.name + "' cannot have an equation");
                }
                doc.vars.push_back(std::move(v));
                skip_separators();
            } catch (SyntaxStop) {
                recover({"exo", "var"});
            }
        }
        expect(Tok::rbrace, "'}'");
    }

    RawAgent agent() {
        RawAgent a;
        a.pos = peek().pos;
        a.name = identifier("agent");
        expect(Tok::lbrace, "'{'");
        bool seen_action = false, seen_epistemic = false;
        while (!at(Tok::rbrace) && !at(Tok::end)) {
            if (is_word("action")) {
                if (seen_action) diags_.error(peek().pos, "duplicate", "second action declaration");
                seen_action = true;
                next();
                a.action_pos = peek().pos;
                a.action = identifier("action variable");
            } else if (is_word("epistemic")) {
                if (seen_epistemic) diags_.error(peek().pos, "duplicate", "second epistemic block");
                seen_epistemic = true;
                next();
                expect(Tok::lbrace, "'{'");
                while (!at(Tok::rbrace) && !at(Tok::end)) {
                    try {
                        a.worlds.push_back(world());
                    } catch (SyntaxStop) {
                        recover({"world"});
                    }
                }
                expect(Tok::rbrace, "'}'");
            } else {
                fail(peek().pos, "expected 'action' or 'epistemic', found " + describe(peek()));
            }
        }
        expect(Tok::rbrace, "'}'");
        if (!seen_action) diags_.error(a.pos, "missing", "agent '" + a.name + "' declares no action variable");
        if (!seen_epistemic) diags_.error(a.pos, "missing", "agent '" + a.name + "' declares no epistemic state");
        return a;
    }

    RawWorld world() {
        RawWorld w;
        w.pos = peek().pos;
        if (!is_word("world")) fail(peek().pos, "expected 'world', found " + describe(peek()));
        next();
        const Token& num = peek();
        if (num.kind != Tok::number) fail(num.pos, "expected a weight, found " + describe(num));
        std::string text = next().text;
        if (accept(Tok::slash)) {
            const Token& den = peek();
            if (den.kind != Tok::number) fail(den.pos, "expected a denominator, found " + describe(den));
            text += "/" + next().text;
        }
        w.weight = parse_rational(text);
        if (!w.weight) fail(num.pos, "malformed weight '" + text + "'");
        expect(Tok::lbrace, "'{'");
        while (!at(Tok::rbrace) && !at(Tok::end)) {
            Pos p = peek().pos;
            std::string var = identifier("variable");
            if (accept(Tok::define)) {
                w.equations.push_back({var, p, expression()});
            } else {
                expect(Tok::assign, "'=' or ':='");
                RawAssign a;
                a.var = var;
                a.pos = p;
                a.value_pos = peek().pos;
                a.value = value_token();
                w.context.push_back(std::move(a));
            }
            skip_separators();
        }
        expect(Tok::rbrace, "'}'");
        return w;
    }

    bool or_op() const { return at(Tok::pipe) || is_word("or"); }
    bool and_op() const { return at(Tok::amp) || is_word("and"); }
    bool not_op() const { return at(Tok::bang) || is_word("not"); }

    RawExpr disjunction() {
        Pos p = peek().pos;
        RawExpr first = conjunction();
        if (!or_op()) return first;
        RawExpr e{RawExpr::Kind::disjunction, {}, {}, p, {}, {}};
        e.kids.push_back(std::move(first));
        while (or_op()) {
            next();
            e.kids.push_back(conjunction());
        }
        return e;
    }

    RawExpr conjunction() {
        Pos p = peek().pos;
        RawExpr first = unary();
        if (!and_op()) return first;
        RawExpr e{RawExpr::Kind::conjunction, {}, {}, p, {}, {}};
        e.kids.push_back(std::move(first));
        while (and_op()) {
            next();
            e.kids.push_back(unary());
        }
        return e;
    }

    RawExpr unary() {
        if (not_op()) {
            Pos p = next().pos;
            if (++depth_ > kMaxDepth) fail(p, "expression nested too deeply");
            RawExpr e{RawExpr::Kind::negation, {}, {}, p, {}, {}};
            e.kids.push_back(unary());
            --depth_;
            return e;
        }
        return primary();
    }

    RawExpr primary() {
        const Token& t = peek();
        if (t.kind == Tok::lparen) {
            next();
            if (++depth_ > kMaxDepth) fail(t.pos, "expression nested too deeply");
            RawExpr inner = expression();
            --depth_;
            expect(Tok::rparen, "')'");
            return inner;
        }
        if (is_word("case")) {
            Pos p = next().pos;
            if (++depth_ > kMaxDepth) fail(p, "expression nested too deeply");
            RawExpr e{RawExpr::Kind::cases, {}, {}, p, {}, {}};
            expect(Tok::lbrace, "'{'");
            while (!is_word("else")) {
                if (at(Tok::rbrace) || at(Tok::end)) fail(peek().pos, "case expression needs an 'else' arm");
                e.kids.push_back(expression());
                expect(Tok::arrow, "'->'");
                e.kids.push_back(expression());
                skip_separators();
            }
            next();
            expect(Tok::arrow, "'->'");
            e.kids.push_back(expression());
            skip_separators();
            expect(Tok::rbrace, "'}'");
            --depth_;
            return e;
        }
        if (t.kind == Tok::number) {
            if (t.text != "0" && t.text != "1") fail(t.pos, "numeric value '" + t.text + "' is not allowed");
            return RawExpr{RawExpr::Kind::number, next().text, {}, t.pos, {}, {}};
        }
        if (t.kind == Tok::ident) {
            if (is_keyword(t.text)) fail(t.pos, "unexpected keyword '" + t.text + "' in expression");
            RawExpr e{RawExpr::Kind::name, next().text, {}, t.pos, {}, {}};
            if (at(Tok::eq) || at(Tok::ne)) {
                e.kind = next().kind == Tok::eq ? RawExpr::Kind::eq : RawExpr::Kind::ne;
                e.value_pos = peek().pos;
                e.value = value_token();
            }
            return e;
        }
        fail(t.pos, "expected an expression, found " + describe(t));
    }

    void recover(std::initializer_list<std::string_view> words) {
        int depth = 0;
        while (!at(Tok::end)) {
            if (depth == 0) {
                if (at(Tok::rbrace)) return;
                for (auto w : words)
                    if (is_word(w)) return;
            }
            if (at(Tok::lbrace)) ++depth;
            if (at(Tok::rbrace)) --depth;
            next();
        }
    }

    void recover_top() {
        int depth = 0;
        while (!at(Tok::end)) {
            if (at(Tok::lbrace)) ++depth;
            if (at(Tok::rbrace)) depth = std::max(0, depth - 1);
            if (depth == 0 && (is_word("model") || is_word("context") || is_word("outcome") || is_word("agent")))
                return;
            next();
        }
    }

    static constexpr int kMaxDepth = 200;

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    int depth_ = 0;
    Diagnostics& diags_;
};

// ---------------------------------------------------------------------------
// Validation: raw tree -> ScenarioDocument

class Resolver {
public:
    Resolver(const std::vector<VariableDecl>& vars, Diagnostics& diags) : diags_(diags) {
        for (const auto& v : vars) vars_.emplace(v.name, &v);
    }

    const VariableDecl* find(const std::string& name) const {
        auto it = vars_.find(name);
        return it == vars_.end() ? nullptr : it->second;
    }

    /// `target` set: value context for that variable; unset: Boolean context.
    std::optional<Expr> convert(const RawExpr& r, const VariableDecl* target) {
        using K = RawExpr::Kind;
        switch (r.kind) {
        case K::number: return Expr::constant(r.text);
        case K::name: {
            if (target && std::find(target->range.begin(), target->range.end(), r.text) != target->range.end() &&
                !find(r.text))
                return Expr::constant(r.text);
            if (!find(r.text)) {
                diags_.error(r.pos, "unknown-variable", "unknown variable '" + r.text + "'");
                return std::nullopt;
            }
            return Expr::ref(r.text);
        }
        case K::eq:
        case K::ne: {
            const VariableDecl* v = find(r.text);
            if (!v) {
                diags_.error(r.pos, "unknown-variable", "unknown variable '" + r.text + "'");
                return std::nullopt;
            }
            if (std::find(v->range.begin(), v->range.end(), r.value) == v->range.end()) {
                diags_.error(r.value_pos, "range", "value '" + r.value + "' is not in the range of '" + r.text + "'");
                return std::nullopt;
            }
            return r.kind == K::eq ? Expr::eq(r.text, r.value) : Expr::ne(r.text, r.value);
        }
        case K::negation: {
            auto inner = convert(r.kids[0], nullptr);
            if (!inner) return std::nullopt;
            return Expr::negate(std::move(*inner));
        }
        case K::conjunction:
        case K::disjunction: {
            std::vector<Expr> kids;
            bool ok = true;
            for (const auto& k : r.kids) {
                auto c = convert(k, nullptr);
                ok = ok && c.has_value();
                if (c) kids.push_back(std::move(*c));
            }
            if (!ok) return std::nullopt;
            return r.kind == K::conjunction ? Expr::all(std::move(kids)) : Expr::any(std::move(kids));
        }
        case K::cases: {
            std::vector<std::pair<Expr, Expr>> arms;
            bool ok = true;
            std::size_t n = r.kids.size() / 2;
            for (std::size_t i = 0; i < n; ++i) {
                auto g = convert(r.kids[2 * i], nullptr);
                auto a = convert(r.kids[2 * i + 1], target);
                ok = ok && g && a;
                if (g && a) arms.emplace_back(std::move(*g), std::move(*a));
            }
            auto otherwise = convert(r.kids.back(), target);
            if (!ok || !otherwise) return std::nullopt;
            return Expr::cases(std::move(arms), std::move(*otherwise));
        }
        }
        return std::nullopt;
    }

private:
    std::map<std::string, const VariableDecl*> vars_;
    Diagnostics& diags_;
};

inline std::vector<std::pair<std::string, std::string>> pairs_of(const std::vector<Assign>& as) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& a : as) out.emplace_back(a.var, a.value);
    return out;
}

inline Signature signature_of(const std::vector<VariableDecl>& vars) {
    std::vector<Variable> out;
    for (const auto& v : vars) out.push_back({v.name, v.range, v.exogenous});
    return Signature(std::move(out));
}

inline std::map<std::string, Expr> equations_of(const std::vector<VariableDecl>& vars,
                                                const std::vector<EquationOverride>& overrides = {}) {
    std::map<std::string, Expr> eqs;
    for (const auto& v : vars)
        if (v.equation) eqs.insert_or_assign(v.name, *v.equation);
    for (const auto& o : overrides) eqs.insert_or_assign(o.var, o.equation);
    return eqs;
}

inline void check_assignments(const std::vector<RawAssign>& raw, const Resolver& res, Diagnostics& diags,
                              std::vector<Assign>& out, std::string_view where) {
    std::set<std::string> seen;
    for (const auto& a : raw) {
        const VariableDecl* v = res.find(a.var);
        if (!v) {
            diags.error(a.pos, "unknown-variable", "unknown variable '" + a.var + "'");
            continue;
        }
        if (!v->exogenous) {
            diags.error(a.pos, "context",
                        std::string(where) + " may only set exogenous variables; '" + a.var + "' is endogenous");
            continue;
        }
        if (std::find(v->range.begin(), v->range.end(), a.value) == v->range.end()) {
            diags.error(a.value_pos, "range", "value '" + a.value + "' is not in the range of '" + a.var + "'");
            continue;
        }
        if (!seen.insert(a.var).second) {
            diags.error(a.pos, "duplicate", "'" + a.var + "' is assigned twice in " + std::string(where));
            continue;
        }
        out.push_back({a.var, a.value});
    }
}

/// Compiles one equation set and reports type errors and cycles at `pos`.
inline void check_model(const std::vector<VariableDecl>& vars, const std::vector<EquationOverride>& overrides,
                        const std::map<std::string, Pos>& positions, Pos fallback, Diagnostics& diags) {
    try {
        build_model(signature_of(vars), equations_of(vars, overrides));
    } catch (const CycleError& e) {
        Pos p = fallback;
        if (!e.cycle().empty())
            if (auto it = positions.find(e.cycle().front()); it != positions.end()) p = it->second;
        diags.error(p, "cycle", e.what());
    } catch (const Error& e) {
        diags.error(fallback, "type", e.what());
    }
}

inline ScenarioDocument validate(const RawDocument& raw, Diagnostics& diags) {
    ScenarioDocument doc;
    if (!raw.model_pos) {
        diags.error({1, 1}, "missing", "no model block");
        return doc;
    }
    std::map<std::string, Pos> positions;
    bool signature_ok = true;
    for (const auto& rv : raw.vars) {
        if (positions.count(rv.name)) {
            diags.error(rv.pos, "duplicate", "variable '" + rv.name + "' is declared twice");
            signature_ok = false;
            continue;
        }
        positions.emplace(rv.name, rv.pos);
        VariableDecl v;
        v.name = rv.name;
        v.exogenous = rv.exogenous;
        bool boolean_token = false;
        for (const auto& [tok, p] : rv.range) {
            if (std::find(v.range.begin(), v.range.end(), tok) != v.range.end()) {
                diags.error(p, "range", "value '" + tok + "' is repeated in the range of '" + rv.name + "'");
                signature_ok = false;
                continue;
            }
            boolean_token = boolean_token || tok == "0" || tok == "1";
            v.range.push_back(tok);
        }
        if (v.range.empty()) {
            diags.error(rv.pos, "range", "variable '" + rv.name + "' has an empty range");
            signature_ok = false;
        } else if (boolean_token && v.range != std::vector<std::string>{"0", "1"}) {
            diags.error(rv.pos, "range", "range of '" + rv.name + "' uses 0/1 but is not exactly {0, 1}");
            signature_ok = false;
        }
        doc.variables.push_back(std::move(v));
    }
    for (const auto& v : doc.variables)
        for (const auto& tok : v.range)
            if (positions.count(tok)) {
                diags.error(positions[v.name], "range",
                            "value '" + tok + "' of '" + v.name + "' clashes with a variable name");
                signature_ok = false;
            }
    bool any_endogenous = std::any_of(doc.variables.begin(), doc.variables.end(),
                                      [](const VariableDecl& v) { return !v.exogenous; });
    if (!any_endogenous) {
        diags.error(*raw.model_pos, "empty-model", "model has no endogenous variables");
        signature_ok = false;
    }

    Resolver res(doc.variables, diags);
    bool equations_ok = true;
    {
        std::size_t i = 0;
        for (const auto& rv : raw.vars) {
            if (i >= doc.variables.size() || doc.variables[i].name != rv.name) continue;  // skipped duplicate
            auto& v = doc.variables[i++];
            if (rv.equation) {
                v.equation = res.convert(*rv.equation, &v);
                equations_ok = equations_ok && v.equation.has_value();
            }
        }
    }
    if (signature_ok && equations_ok) check_model(doc.variables, {}, positions, *raw.model_pos, diags);

    Pos context_pos = raw.context_pos.value_or(*raw.model_pos);
    check_assignments(raw.context, res, diags, doc.context, "the context");
    for (const auto& v : doc.variables)
        if (v.exogenous && std::none_of(doc.context.begin(), doc.context.end(),
                                        [&](const Assign& a) { return a.var == v.name; }))
            if (std::none_of(raw.context.begin(), raw.context.end(),
                             [&](const RawAssign& a) { return a.var == v.name; }))
                diags.error(context_pos, "context", "context assigns no value to exogenous variable '" + v.name + "'");

    if (raw.outcome) {
        const auto& o = *raw.outcome;
        const VariableDecl* v = res.find(o.var);
        if (!v)
            diags.error(o.pos, "unknown-variable", "unknown variable '" + o.var + "'");
        else if (v->exogenous)
            diags.error(o.pos, "type", "outcome variable '" + o.var + "' must be endogenous");
        else if (std::find(v->range.begin(), v->range.end(), o.value) == v->range.end())
            diags.error(o.value_pos, "range", "value '" + o.value + "' is not in the range of '" + o.var + "'");
        else
            doc.outcome = Assign{o.var, o.value};
    }
    if (!raw.agents.empty() && !raw.outcome)
        diags.error(raw.agents.front().pos, "missing", "scenario declares agents but no outcome");

    std::set<std::string> agent_names;
    for (const auto& ra : raw.agents) {
        AgentDecl a;
        a.name = ra.name;
        a.action = ra.action;
        if (!agent_names.insert(ra.name).second)
            diags.error(ra.pos, "duplicate", "agent '" + ra.name + "' is declared twice");
        if (!ra.action.empty()) {
            const VariableDecl* v = res.find(ra.action);
            if (!v)
                diags.error(ra.action_pos, "unknown-variable", "unknown variable '" + ra.action + "'");
            else if (v->exogenous)
                diags.error(ra.action_pos, "type", "action variable '" + ra.action + "' must be endogenous");
            else if (doc.outcome && doc.outcome->var == ra.action)
                diags.error(ra.action_pos, "type", "action variable cannot be the outcome variable");
        }
        if (ra.worlds.empty()) diags.error(ra.pos, "missing", "agent '" + ra.name + "' has no worlds");
        Rational total = 0;
        for (const auto& rw : ra.worlds) {
            WorldDecl w;
            w.weight = rw.weight.value_or(Rational(0));
            total += w.weight;
            check_assignments(rw.context, res, diags, w.context, "a world");
            std::set<std::string> replaced;
            bool world_ok = signature_ok;
            for (const auto& eq : rw.equations) {
                const VariableDecl* v = res.find(eq.var);
                if (!v) {
                    diags.error(eq.pos, "unknown-variable", "unknown variable '" + eq.var + "'");
                    world_ok = false;
                    continue;
                }
                if (v->exogenous) {
                    diags.error(eq.pos, "type", "exogenous variable '" + eq.var + "' cannot have an equation");
                    world_ok = false;
                    continue;
                }
                if (!replaced.insert(eq.var).second) {
                    diags.error(eq.pos, "duplicate", "equation of '" + eq.var + "' is replaced twice in one world");
                    world_ok = false;
                    continue;
                }
                auto e = res.convert(eq.expr, v);
                if (!e) {
                    world_ok = false;
                    continue;
                }
                w.equations.push_back({eq.var, std::move(*e)});
            }
            if (world_ok && equations_ok && !w.equations.empty())
                check_model(doc.variables, w.equations, positions, rw.pos, diags);
            a.worlds.push_back(std::move(w));
        }
        if (!ra.worlds.empty() && total != 1)
            diags.error(ra.pos, "weight-sum",
                        "epistemic weights of '" + ra.name + "' sum to " + to_fraction(total) + ", not 1");
        doc.agents.push_back(std::move(a));
    }
    return doc;
}

inline ScenarioDocument parse_with(std::string_view text, Diagnostics& diags) {
    auto tokens = lex(text, diags);
    Parser parser(std::move(tokens), diags);
    auto raw = parser.document();
    return validate(raw, diags);
}

}  // namespace detail

/// Parses and validates a model or scenario. Collects every diagnostic before
/// throwing ParseError.
inline ScenarioDocument parse_document(std::string_view text) {
    detail::Diagnostics diags(text);
    auto doc = detail::parse_with(text, diags);
    if (!diags.empty()) throw ParseError(diags.take());
    return doc;
}

// ---------------------------------------------------------------------------
// Document -> engine objects

inline CausalModel model_of(const ScenarioDocument& doc, const std::vector<EquationOverride>& overrides = {}) {
    return build_model(detail::signature_of(doc.variables), detail::equations_of(doc.variables, overrides));
}

inline Context context_of(const ScenarioDocument& doc, const Signature& sig,
                          const std::vector<Assign>& overrides = {}) {
    auto values = detail::pairs_of(doc.context);
    for (const auto& o : overrides) {
        auto it = std::find_if(values.begin(), values.end(), [&](const auto& p) { return p.first == o.var; });
        if (it != values.end())
            it->second = o.value;
        else
            values.emplace_back(o.var, o.value);
    }
    return Context(sig, values);
}

inline std::optional<Event> outcome_of(const ScenarioDocument& doc, const Signature& sig) {
    if (!doc.outcome) return std::nullopt;
    return make_event(sig, doc.outcome->var, doc.outcome->value);
}

struct ParsedModel {
    CausalModel model;
    Context context;
    std::optional<Event> outcome;
    ScenarioDocument document;
};

inline ParsedModel load_model(ScenarioDocument doc) {
    auto model = model_of(doc);
    auto ctx = context_of(doc, model.signature());
    auto outcome = outcome_of(doc, model.signature());
    return {std::move(model), std::move(ctx), outcome, std::move(doc)};
}

/// Model and actual context from `.scm` or `.rsp` text.
inline ParsedModel parse_model(std::string_view text) { return load_model(parse_document(text)); }

/// One responsibility setting per agent, sharing the actual model.
inline std::vector<ResponsibilitySetting> settings_of(const ScenarioDocument& doc) {
    std::vector<ResponsibilitySetting> out;
    if (doc.agents.empty()) return out;
    if (!doc.outcome) throw QueryError("scenario declares agents but no outcome");
    auto model = model_of(doc);
    auto ctx = context_of(doc, model.signature());
    auto outcome = *outcome_of(doc, model.signature());
    for (const auto& agent : doc.agents) {
        std::vector<World> worlds;
        for (const auto& w : agent.worlds) {
            auto world_model = w.equations.empty() ? model : model_of(doc, w.equations);
            auto world_ctx = context_of(doc, model.signature(), w.context);
            worlds.push_back({w.weight, std::move(world_model), std::move(world_ctx)});
        }
        EpistemicState state(std::move(worlds), agent.name);
        out.emplace_back(agent.name, model, ctx, std::move(state), model.signature().id(agent.action), outcome);
    }
    return out;
}

inline std::vector<ResponsibilitySetting> parse_scenario(std::string_view text) {
    return settings_of(parse_document(text));
}

/// Parses `[X <- x, ...] body`.
inline CausalFormula parse_formula(std::string_view text) {
    detail::Diagnostics diags(text);
    auto tokens = detail::lex(text, diags);
    detail::Parser parser(std::move(tokens), diags);
    CausalFormula f;
    try {
        auto [interventions, body] = parser.formula();
        for (auto& a : interventions) f.interventions.emplace_back(a.var, a.value);
        // Bare names in a formula body are always variables.
        detail::Resolver none({}, diags);
        auto convert = [&](auto&& self, const detail::RawExpr& r) -> Expr {
            using K = detail::RawExpr::Kind;
            switch (r.kind) {
            case K::number: return Expr::constant(r.text);
            case K::name: return Expr::ref(r.text);
            case K::eq: return Expr::eq(r.text, r.value);
            case K::ne: return Expr::ne(r.text, r.value);
            case K::negation: return Expr::negate(self(self, r.kids[0]));
            case K::conjunction:
            case K::disjunction: {
                std::vector<Expr> kids;
                for (const auto& k : r.kids) kids.push_back(self(self, k));
                return r.kind == K::conjunction ? Expr::all(std::move(kids)) : Expr::any(std::move(kids));
            }
            case K::cases: {
                std::vector<std::pair<Expr, Expr>> arms;
                for (std::size_t i = 0; i + 1 < r.kids.size(); i += 2)
                    arms.emplace_back(self(self, r.kids[i]), self(self, r.kids[i + 1]));
                return Expr::cases(std::move(arms), self(self, r.kids.back()));
            }
            }
            return Expr::constant("0");
        };
        f.body = convert(convert, body);
    } catch (detail::SyntaxStop) {
    }
    if (!diags.empty()) throw ParseError(diags.take());
    return f;
}

/// `Var=value` as used on the command line.
inline Event parse_event(const Signature& sig, std::string_view token) {
    auto eq = token.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == token.size())
        throw QueryError("expected Var=value, got '" + std::string(token) + "'");
    auto var = token.substr(0, eq);
    auto value = token.substr(eq + 1);
    if (!value.empty() && value.front() == '=') value.remove_prefix(1);  // tolerate Var==value
    return make_event(sig, var, value);
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

inline int precedence(const Expr& e) {
    switch (e.kind()) {
    case Expr::Kind::disjunction: return 1;
    case Expr::Kind::conjunction: return 2;
    case Expr::Kind::negation: return 3;
    default: return 4;
    }
}

inline void write_expr(std::ostream& os, const Expr& e) {
    auto child = [&](const Expr& c, int min_prec) {
        bool paren = precedence(c) < min_prec;
        if (paren) os << '(';
        write_expr(os, c);
        if (paren) os << ')';
    };
    switch (e.kind()) {
    case Expr::Kind::constant: os << e.value(); break;
    case Expr::Kind::ref: os << e.var(); break;
    case Expr::Kind::eq: os << e.var() << " == " << e.value(); break;
    case Expr::Kind::ne: os << e.var() << " != " << e.value(); break;
    case Expr::Kind::negation:
        os << '!';
        child(e.children()[0], 3);
        break;
    case Expr::Kind::conjunction:
    case Expr::Kind::disjunction: {
        bool conj = e.kind() == Expr::Kind::conjunction;
        // Same-kind children keep their grouping through parentheses.
        int min_prec = conj ? 3 : 2;
        for (std::size_t i = 0; i < e.children().size(); ++i) {
            if (i) os << (conj ? " & " : " | ");
            child(e.children()[i], min_prec);
        }
        break;
    }
    case Expr::Kind::cases:
        os << "case { ";
        for (std::size_t i = 0; i < e.arm_count(); ++i) {
            write_expr(os, e.guard(i));
            os << " -> ";
            write_expr(os, e.arm(i));
            os << ", ";
        }
        os << "else -> ";
        write_expr(os, e.fallback());
        os << " }";
        break;
    }
}

}  // namespace detail

inline std::string to_source(const Expr& e) {
    std::ostringstream os;
    detail::write_expr(os, e);
    return os.str();
}

/// Canonical text of a document: fixed layout, two-space indentation, LF
/// line endings, weights in exact form.
inline std::string serialize(const ScenarioDocument& doc) {
    std::ostringstream os;
    os << "model {\n";
    for (const auto& v : doc.variables) {
        os << "  " << (v.exogenous ? "exo " : "var ") << v.name << " in {";
        for (std::size_t i = 0; i < v.range.size(); ++i) os << (i ? ", " : "") << v.range[i];
        os << '}';
        if (v.equation) os << " := " << to_source(*v.equation);
        os << '\n';
    }
    os << "}\n";
    if (!doc.context.empty()) {
        os << "context {\n";
        for (const auto& a : doc.context) os << "  " << a.var << " = " << a.value << '\n';
        os << "}\n";
    }
    if (doc.outcome) os << "outcome " << doc.outcome->var << " == " << doc.outcome->value << '\n';
    for (const auto& agent : doc.agents) {
        os << "\nagent " << agent.name << " {\n";
        os << "  action " << agent.action << '\n';
        os << "  epistemic {\n";
        for (const auto& w : agent.worlds) {
            os << "    world " << to_string(w.weight) << " {";
            if (w.context.empty() && w.equations.empty()) {
                os << " }\n";
                continue;
            }
            os << '\n';
            for (const auto& a : w.context) os << "      " << a.var << " = " << a.value << '\n';
            for (const auto& e : w.equations) os << "      " << e.var << " := " << to_source(e.equation) << '\n';
            os << "    }\n";
        }
        os << "  }\n}\n";
    }
    return os.str();
}

inline std::string to_source(const CausalFormula& f) {
    std::ostringstream os;
    if (!f.interventions.empty()) {
        os << '[';
        for (std::size_t i = 0; i < f.interventions.size(); ++i)
            os << (i ? ", " : "") << f.interventions[i].first << " <- " << f.interventions[i].second;
        os << "] ";
    }
    detail::write_expr(os, f.body);
    return os.str();
}

}  // namespace resp::dsl
