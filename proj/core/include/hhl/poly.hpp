// Sparse multivariate polynomials with exact rational coefficients.
// Normal form for max-free terms; used for cancellation, equality reasoning
// and the oracle's contradiction checks.
#pragma once

#include "hhl/term.hpp"

#include <map>
#include <optional>

namespace hhl {

// exponent vector, sorted by variable id
using Monomial = std::vector<std::pair<VarId, unsigned>>;

class Poly {
public:
    Poly() = default;
    static Poly constant(Rational q);
    static Poly variable(VarId v);

    Poly operator+(const Poly& o) const;
    Poly operator-(const Poly& o) const;
    Poly operator*(const Poly& o) const;
    Poly operator-() const;
    Poly scaled(const Rational& q) const;

    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty()); }
    Rational constant_value() const;

    // divides by the gcd of coefficients and makes the leading coefficient
    // positive; returns true if the sign was flipped
    bool normalize_primitive();

    std::size_t hash() const;
    bool operator==(const Poly& o) const { return terms_ == o.terms_; }

    double eval(const Store& s) const;
    Rational eval_exact(const Store& s) const;

    Poly substituted(VarId v, const Rational& value) const;
    Poly substituted(VarId v, const Poly& value) const;

    unsigned degree_in(VarId v) const;
    // rewrite as a polynomial in v: coefficients per power of v
    std::vector<Poly> coefficients_in(VarId v) const;

    void collect_vars(std::vector<VarId>& out) const;

    const std::map<Monomial, Rational>& terms() const { return terms_; }
    std::map<Monomial, Rational>& mutable_terms() { return terms_; }

    Term to_term(const std::vector<Term>* ext_terms = nullptr) const;

private:
    // monomial -> coefficient, no zero coefficients stored
    std::map<Monomial, Rational> terms_;
    void add_term(Monomial m, Rational c);
    friend std::optional<Poly> to_poly(const Term&);
};

// Fails (nullopt) when the term contains max/sel nodes.
std::optional<Poly> to_poly(const Term& t);

}  // namespace hhl
