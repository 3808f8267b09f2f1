#include "hhl/parser.hpp"

#include <cctype>

namespace hhl {

Parser::Parser(std::string_view text, VocabPtr vocab) : vocab_(std::move(vocab)) {
    tokenize(text);
}

void Parser::tokenize(std::string_view text) {
    std::size_t i = 0, line = 1;
    auto push = [&](Token::Kind k, std::string s) { toks_.push_back({k, std::move(s), line}); };
    while (i < text.size()) {
        char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '#' || (c == '/' && i + 1 < text.size() && text[i + 1] == '/')) {
            while (i < text.size() && text[i] != '\n') ++i;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
                ++j;
            push(Token::Ident, std::string(text.substr(i, j - i)));
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < text.size() &&
                   (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '.'))
                ++j;
            push(Token::Number, std::string(text.substr(i, j - i)));
            i = j;
            continue;
        }
        if (c == '"') {
            std::size_t j = i + 1;
            while (j < text.size() && text[j] != '"') ++j;
            push(Token::String, std::string(text.substr(i + 1, j - i - 1)));
            i = j + 1;
            continue;
        }
        // multi-char punctuation
        static const char* two[] = {":=", "<=", ">=", "!=", "&&", "||", "->", "=>", ".."};
        bool matched = false;
        for (const char* t : two) {
            if (text.substr(i, 2) == t) {
                push(Token::Punct, t);
                i += 2;
                matched = true;
                break;
            }
        }
        if (matched) continue;
        push(Token::Punct, std::string(1, c));
        ++i;
    }
    push(Token::End, "");
}

bool Parser::at_end() const { return cur().kind == Token::End; }

bool Parser::peek_is(std::string_view tok) const {
    return cur().kind != Token::End && cur().text == tok;
}

bool Parser::accept(std::string_view tok) {
    if (peek_is(tok)) {
        ++pos_;
        return true;
    }
    return false;
}

void Parser::expect(std::string_view tok) {
    if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
}

std::string Parser::expect_ident() {
    if (cur().kind != Token::Ident) fail("expected identifier");
    return toks_[pos_++].text;
}

std::string Parser::expect_string() {
    if (cur().kind != Token::String) fail("expected string literal");
    return toks_[pos_++].text;
}

double Parser::expect_number() {
    bool neg = accept("-");
    if (cur().kind != Token::Number) fail("expected number");
    double v = std::stod(toks_[pos_++].text);
    return neg ? -v : v;
}

void Parser::fail(const std::string& msg) const {
    throw ParseError("line " + std::to_string(cur().line) + ": " + msg + " (got '" + cur().text +
                     "')");
}

// ----------------------------------------------------------------- terms

static Rational rational_of(const std::string& s) {
    auto dot = s.find('.');
    if (dot == std::string::npos) return Rational(boost::multiprecision::cpp_int(s));
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    std::size_t frac = s.size() - dot - 1;
    boost::multiprecision::cpp_int den = 1;
    for (std::size_t k = 0; k < frac; ++k) den *= 10;
    return Rational(boost::multiprecision::cpp_int(digits.empty() ? "0" : digits), den);
}

Term Parser::parse_term() { return term_sum(); }

Term Parser::term_sum() {
    Term t = term_prod();
    for (;;) {
        if (accept("+"))
            t = add(t, term_prod());
        else if (accept("-"))
            t = sub(t, term_prod());
        else
            return t;
    }
}

Term Parser::term_prod() {
    Term t = term_unary();
    for (;;) {
        if (accept("*")) {
            Term r = term_unary();
            if (t->kind == TermKind::Num && r->kind == TermKind::Num)
                t = num(t->num * r->num);
            else
                t = mul(t, r);
        } else if (accept("/")) {
            Term r = term_unary();
            if (r->kind != TermKind::Num) fail("divisor must be a rational constant");
            if (t->kind == TermKind::Num)
                t = num(t->num / r->num);
            else
                t = div_const(t, r->num);
        } else {
            return t;
        }
    }
}

Term Parser::term_unary() {
    if (accept("-")) {
        Term t = term_unary();
        if (t->kind == TermKind::Num) return num(-t->num);
        return sub(num(0), t);
    }
    return term_atom();
}

Term Parser::term_atom() {
    if (cur().kind == Token::Number) {
        Rational q = rational_of(toks_[pos_++].text);
        return num(std::move(q));
    }
    if (accept("(")) {
        Term t = term_sum();
        expect(")");
        return t;
    }
    if (cur().kind == Token::Ident) {
        std::string name = toks_[pos_++].text;
        if (name == "max") {
            expect("(");
            Term a = term_sum();
            expect(",");
            Term b = term_sum();
            expect(")");
            return tmax(a, b);
        }
        if (name == "sel") {
            expect("(");
            Term a = term_sum();
            expect(",");
            Term b = term_sum();
            expect(",");
            Term c = term_sum();
            expect(",");
            Term d = term_sum();
            expect(")");
            return sel(a, b, c, d);
        }
        return var(vocab_->intern(name));
    }
    fail("expected term");
}

// -------------------------------------------------------------- assertions

Assertion Parser::parse_assertion() { return assert_implies(); }

Assertion Parser::assert_implies() {
    Assertion a = assert_or();
    if (accept("->")) return implies(a, assert_implies());
    return a;
}

Assertion Parser::assert_or() {
    Assertion a = assert_and();
    while (accept("||")) a = aor(a, assert_and());
    return a;
}

Assertion Parser::assert_and() {
    Assertion a = assert_unary();
    while (accept("&&")) a = aand(a, assert_unary());
    return a;
}

Assertion Parser::comparison_with(Term lhs) {
    if (accept("=")) return eq(lhs, term_sum());
    if (accept("<=")) return le(lhs, term_sum());
    if (accept("<")) return lt(lhs, term_sum());
    if (accept("!=")) return ne(lhs, term_sum());
    if (accept(">=")) return ge(lhs, term_sum());
    if (accept(">")) return gt(lhs, term_sum());
    fail("expected comparison operator");
}

Assertion Parser::assert_unary() {
    if (accept("!")) {
        expect("(");
        Assertion a = assert_implies();
        expect(")");
        return anot(a);
    }
    if (accept("true")) return atrue();
    if (peek_is("(")) {
        // parenthesized term starting a comparison, or a parenthesized assertion
        std::size_t save = pos_;
        bool have_cmp = false;
        Term lhs;
        try {
            lhs = term_sum();
            have_cmp = peek_is("=") || peek_is("<=") || peek_is("<") || peek_is("!=") ||
                       peek_is(">=") || peek_is(">");
        } catch (const ParseError&) {
            have_cmp = false;
        }
        if (have_cmp) return comparison_with(lhs);
        pos_ = save;
        expect("(");
        Assertion a = assert_implies();
        expect(")");
        return a;
    }
    return comparison_with(term_sum());
}

// ---------------------------------------------------------------- programs

Program Parser::parse_block() {
    expect("{");
    Program p = parse_program();
    expect("}");
    return p;
}

Program Parser::parse_program() {
    std::vector<Program> stmts;
    for (;;) {
        if (at_end() || peek_is("}")) break;
        stmts.push_back(statement());
        if (!accept(";")) break;
    }
    return pseq(std::move(stmts));
}

Program Parser::statement() {
    if (accept("skip")) return pskip();
    if (accept("hole")) {
        expect("(");
        std::string name = expect_ident();
        expect(")");
        return phole(name);
    }
    if (accept("if")) {
        Assertion g = parse_assertion();
        expect("then");
        Program t = parse_block();
        expect("else");
        Program e = parse_block();
        return pif(g, t, e);
    }
    if (accept("while")) {
        Assertion g = parse_assertion();
        Program body = parse_block();
        return pwhile(g, body);
    }
    if (accept("dwhile")) {
        Assertion g = parse_assertion();
        expect("{");
        Dynamics d;
        for (;;) {
            std::string x = expect_ident();
            expect("'");
            expect("=");
            Term f = parse_term();
            d.odes.emplace_back(vocab_->intern(x), f);
            if (!accept(",")) break;
        }
        expect("}");
        return pdwhile(g, d);
    }
    if (accept("case")) {
        expect("{");
        std::vector<std::pair<Assertion, Program>> cases;
        while (!peek_is("}")) {
            Assertion g = parse_assertion();
            expect("=>");
            Program body = parse_block();
            cases.emplace_back(g, body);
        }
        expect("}");
        return pcase(std::move(cases));
    }
    std::string x = expect_ident();
    expect(":=");
    Term e = parse_term();
    return passign(vocab_->intern(x), e);
}

Term parse_term(const std::string& text, const VocabPtr& vocab) {
    Parser p(text, vocab);
    Term t = p.parse_term();
    if (!p.at_end()) p.fail("trailing input after term");
    return t;
}

Assertion parse_assertion(const std::string& text, const VocabPtr& vocab) {
    Parser p(text, vocab);
    Assertion a = p.parse_assertion();
    if (!p.at_end()) p.fail("trailing input after assertion");
    return a;
}

Program parse_program(const std::string& text, const VocabPtr& vocab) {
    Parser p(text, vocab);
    Program pr = p.parse_program();
    if (!p.at_end()) p.fail("trailing input after program");
    return pr;
}

}  // namespace hhl
