#include "hhl/poly.hpp"

#include <algorithm>

namespace hhl {

void Poly::add_term(Monomial m, Rational c) {
    if (c == 0) return;
    auto it = terms_.find(m);
    if (it == terms_.end()) {
        terms_.emplace(std::move(m), std::move(c));
    } else {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

Poly Poly::constant(Rational q) {
    Poly p;
    p.add_term({}, std::move(q));
    return p;
}

Poly Poly::variable(VarId v) {
    Poly p;
    p.add_term({{v, 1}}, 1);
    return p;
}

Poly Poly::operator+(const Poly& o) const {
    Poly r = *this;
    for (auto& [m, c] : o.terms_) r.add_term(m, c);
    return r;
}

Poly Poly::operator-(const Poly& o) const {
    Poly r = *this;
    for (auto& [m, c] : o.terms_) r.add_term(m, -c);
    return r;
}

Poly Poly::operator-() const {
    Poly r;
    for (auto& [m, c] : terms_) r.terms_.emplace(m, -c);
    return r;
}

Poly Poly::scaled(const Rational& q) const {
    Poly r;
    if (q == 0) return r;
    for (auto& [m, c] : terms_) r.terms_.emplace(m, c * q);
    return r;
}

static Monomial mono_mul(const Monomial& a, const Monomial& b) {
    Monomial r;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
            r.push_back(a[i++]);
        } else if (i == a.size() || b[j].first < a[i].first) {
            r.push_back(b[j++]);
        } else {
            r.emplace_back(a[i].first, a[i].second + b[j].second);
            ++i;
            ++j;
        }
    }
    return r;
}

Poly Poly::operator*(const Poly& o) const {
    Poly r;
    for (auto& [ma, ca] : terms_)
        for (auto& [mb, cb] : o.terms_) r.add_term(mono_mul(ma, mb), ca * cb);
    return r;
}

Rational Poly::constant_value() const {
    if (terms_.empty()) return 0;
    return terms_.begin()->second;
}

bool Poly::normalize_primitive() {
    if (terms_.empty()) return false;
    using boost::multiprecision::cpp_int;
    cpp_int num_gcd = 0, den_lcm = 1;
    for (auto& [m, c] : terms_) {
        num_gcd = boost::multiprecision::gcd(num_gcd, boost::multiprecision::abs(numerator(c)));
        den_lcm = boost::multiprecision::lcm(den_lcm, denominator(c));
    }
    Rational scale = Rational(den_lcm, num_gcd == 0 ? 1 : num_gcd);
    bool flip = terms_.rbegin()->second < 0;
    if (flip) scale = -scale;
    if (scale != 1)
        for (auto& [m, c] : terms_) const_cast<Rational&>(c) *= scale;
    return flip;
}

std::size_t Poly::hash() const {
    std::size_t h = 0x51ed270b;
    for (auto& [m, c] : terms_) {
        for (auto& [v, e] : m) h = h * 1000003 + v * 31 + e;
        h = h * 1000003 + std::hash<std::string>{}(c.str());
    }
    return h;
}

double Poly::eval(const Store& s) const {
    double acc = 0;
    for (auto& [m, c] : terms_) {
        double t = c.convert_to<double>();
        for (auto& [v, e] : m) {
            double x = s.get(v);
            for (unsigned k = 0; k < e; ++k) t *= x;
        }
        acc += t;
    }
    return acc;
}

Rational Poly::eval_exact(const Store& s) const {
    Rational acc = 0;
    for (auto& [m, c] : terms_) {
        Rational t = c;
        for (auto& [v, e] : m) {
            Rational x = hhl::eval_exact(var(v), s);
            for (unsigned k = 0; k < e; ++k) t *= x;
        }
        acc += t;
    }
    return acc;
}

Poly Poly::substituted(VarId v, const Rational& value) const {
    Poly r;
    for (auto& [m, c] : terms_) {
        Rational coef = c;
        Monomial rest;
        for (auto& [x, e] : m) {
            if (x == v) {
                for (unsigned k = 0; k < e; ++k) coef *= value;
            } else {
                rest.emplace_back(x, e);
            }
        }
        r.add_term(std::move(rest), std::move(coef));
    }
    return r;
}

Poly Poly::substituted(VarId v, const Poly& value) const {
    Poly r;
    for (auto& [m, c] : terms_) {
        Poly piece = Poly::constant(c);
        Monomial rest;
        unsigned vexp = 0;
        for (auto& [x, e] : m) {
            if (x == v)
                vexp = e;
            else
                rest.emplace_back(x, e);
        }
        Poly restp;
        restp.add_term(rest, 1);
        piece = piece * restp;
        for (unsigned k = 0; k < vexp; ++k) piece = piece * value;
        r = r + piece;
    }
    return r;
}

unsigned Poly::degree_in(VarId v) const {
    unsigned d = 0;
    for (auto& [m, c] : terms_)
        for (auto& [x, e] : m)
            if (x == v) d = std::max(d, e);
    return d;
}

std::vector<Poly> Poly::coefficients_in(VarId v) const {
    std::vector<Poly> out(degree_in(v) + 1);
    for (auto& [m, c] : terms_) {
        unsigned vexp = 0;
        Monomial rest;
        for (auto& [x, e] : m) {
            if (x == v)
                vexp = e;
            else
                rest.emplace_back(x, e);
        }
        out[vexp].add_term(std::move(rest), c);
    }
    return out;
}

void Poly::collect_vars(std::vector<VarId>& out) const {
    for (auto& [m, c] : terms_)
        for (auto& [v, e] : m) out.push_back(v);
}

Term Poly::to_term(const std::vector<Term>* ext_terms) const {
    if (terms_.empty()) return num(0);
    Term acc;
    bool first = true;
    for (auto& [m, c] : terms_) {
        Term t = num(c);
        bool coef_one = (c == 1) && !m.empty();
        bool started = !coef_one;
        if (coef_one) t = nullptr;
        for (auto& [v, e] : m) {
            Term base = (ext_terms && v >= (1u << 24)) ? (*ext_terms)[v - (1u << 24)] : var(v);
            for (unsigned k = 0; k < e; ++k) {
                t = started ? mul(t, base) : base;
                started = true;
            }
        }
        acc = first ? t : add(acc, t);
        first = false;
    }
    return acc;
}

std::optional<Poly> to_poly(const Term& t) {
    switch (t->kind) {
        case TermKind::Num: return Poly::constant(t->num);
        case TermKind::Var: return Poly::variable(t->var);
        case TermKind::Add: {
            auto a = to_poly(t->a), b = to_poly(t->b);
            if (!a || !b) return std::nullopt;
            return *a + *b;
        }
        case TermKind::Sub: {
            auto a = to_poly(t->a), b = to_poly(t->b);
            if (!a || !b) return std::nullopt;
            return *a - *b;
        }
        case TermKind::Mul: {
            auto a = to_poly(t->a), b = to_poly(t->b);
            if (!a || !b) return std::nullopt;
            return *a * *b;
        }
        case TermKind::DivConst: {
            auto a = to_poly(t->a);
            if (!a) return std::nullopt;
            return a->scaled(Rational(1) / t->num);
        }
        case TermKind::Max:
        case TermKind::Sel: return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace hhl
