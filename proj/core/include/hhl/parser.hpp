// Recursive-descent parser for the concrete grammar of terms, assertions and
// programs. The token cursor is public so file formats (proof trees, rule
// catalogues, configs) can be layered on top.
#pragma once

#include "hhl/program.hpp"

#include <string_view>

namespace hhl {

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& w) : std::runtime_error(w) {}
};

class Parser {
public:
    Parser(std::string_view text, VocabPtr vocab);

    Term parse_term();
    Assertion parse_assertion();
    Program parse_program();       // statements up to '}' or end of input
    Program parse_block();         // '{' program '}'

    // token-level interface
    bool at_end() const;
    bool peek_is(std::string_view tok) const;
    bool accept(std::string_view tok);
    void expect(std::string_view tok);
    std::string expect_ident();
    std::string expect_string();   // "..." literal
    double expect_number();
    [[noreturn]] void fail(const std::string& msg) const;

    const VocabPtr& vocab() const { return vocab_; }

private:
    struct Token {
        enum Kind { Ident, Number, Punct, String, End } kind;
        std::string text;
        std::size_t line;
    };
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    VocabPtr vocab_;

    const Token& cur() const { return toks_[std::min(pos_, toks_.size() - 1)]; }
    void tokenize(std::string_view text);

    Term term_sum();
    Term term_prod();
    Term term_unary();
    Term term_atom();
    Assertion assert_implies();
    Assertion assert_or();
    Assertion assert_and();
    Assertion assert_unary();
    Assertion comparison_with(Term lhs);
    Program statement();
};

Term parse_term(const std::string& text, const VocabPtr& vocab);
Assertion parse_assertion(const std::string& text, const VocabPtr& vocab);
Program parse_program(const std::string& text, const VocabPtr& vocab);

}  // namespace hhl
