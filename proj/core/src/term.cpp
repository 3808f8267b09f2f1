#include "hhl/term.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

namespace hhl {

namespace {
Term make(TermNode n) { return std::make_shared<const TermNode>(std::move(n)); }
}  // namespace

Term num(Rational q) {
    TermNode n;
    n.kind = TermKind::Num;
    n.num = std::move(q);
    return make(std::move(n));
}
Term num(long long v) { return num(Rational(v)); }
Term num(long long nu, long long de) { return num(Rational(nu, de)); }

Term var(VarId v) {
    TermNode n;
    n.kind = TermKind::Var;
    n.var = v;
    return make(std::move(n));
}

static Term binary(TermKind k, Term a, Term b) {
    TermNode n;
    n.kind = k;
    n.a = std::move(a);
    n.b = std::move(b);
    return make(std::move(n));
}

// constant subtrees fold so rationals round-trip through the printer, and
// additive/multiplicative units collapse
Term add(Term a, Term b) {
    if (a->kind == TermKind::Num && b->kind == TermKind::Num) return num(a->num + b->num);
    if (a->kind == TermKind::Num && a->num == 0) return b;
    if (b->kind == TermKind::Num && b->num == 0) return a;
    return binary(TermKind::Add, std::move(a), std::move(b));
}
Term sub(Term a, Term b) {
    if (a->kind == TermKind::Num && b->kind == TermKind::Num) return num(a->num - b->num);
    if (b->kind == TermKind::Num && b->num == 0) return a;
    return binary(TermKind::Sub, std::move(a), std::move(b));
}
Term mul(Term a, Term b) {
    if (a->kind == TermKind::Num && b->kind == TermKind::Num) return num(a->num * b->num);
    if (a->kind == TermKind::Num && a->num == 1) return b;
    if (b->kind == TermKind::Num && b->num == 1) return a;
    return binary(TermKind::Mul, std::move(a), std::move(b));
}

Term div_const(Term a, Rational q) {
    if (q == 0) throw std::invalid_argument("division by zero constant");
    if (a->kind == TermKind::Num) return num(a->num / q);
    TermNode n;
    n.kind = TermKind::DivConst;
    n.a = std::move(a);
    n.num = std::move(q);
    return make(std::move(n));
}

Term tmax(Term a, Term b) { return binary(TermKind::Max, std::move(a), std::move(b)); }

Term sel(Term a, Term b, Term then_t, Term else_t) {
    TermNode n;
    n.kind = TermKind::Sel;
    n.a = std::move(a);
    n.b = std::move(b);
    n.c = std::move(then_t);
    n.d = std::move(else_t);
    return make(std::move(n));
}

double eval(const Term& t, const Store& store) {
    switch (t->kind) {
        case TermKind::Num: return t->num.convert_to<double>();
        case TermKind::Var: return store.get(t->var);
        case TermKind::Add: return eval(t->a, store) + eval(t->b, store);
        case TermKind::Sub: return eval(t->a, store) - eval(t->b, store);
        case TermKind::Mul: return eval(t->a, store) * eval(t->b, store);
        case TermKind::DivConst: return eval(t->a, store) / t->num.convert_to<double>();
        case TermKind::Max: return std::max(eval(t->a, store), eval(t->b, store));
        case TermKind::Sel:
            return eval(t->a, store) >= eval(t->b, store) ? eval(t->c, store) : eval(t->d, store);
    }
    throw std::logic_error("bad term kind");
}

static Rational to_rational(double v) {
    if (!std::isfinite(v)) throw std::domain_error("non-finite store value");
    // doubles are dyadic rationals; decompose exactly
    int exp = 0;
    double m = std::frexp(v, &exp);
    long long mant = static_cast<long long>(std::ldexp(m, 53));
    exp -= 53;
    Rational r(mant);
    if (exp > 0)
        r *= Rational(boost::multiprecision::cpp_int(1) << exp);
    else if (exp < 0)
        r /= Rational(boost::multiprecision::cpp_int(1) << -exp);
    return r;
}

namespace {
// shared subterms are common in generated obligations; memoize by node
using ExactMemo = std::unordered_map<const TermNode*, Rational>;

const Rational& eval_exact_memo(const Term& t, const Store& store, ExactMemo& memo) {
    auto it = memo.find(t.get());
    if (it != memo.end()) return it->second;
    Rational r;
    switch (t->kind) {
        case TermKind::Num: r = t->num; break;
        case TermKind::Var: r = to_rational(store.get(t->var)); break;
        case TermKind::Add:
            r = eval_exact_memo(t->a, store, memo) + eval_exact_memo(t->b, store, memo);
            break;
        case TermKind::Sub:
            r = eval_exact_memo(t->a, store, memo) - eval_exact_memo(t->b, store, memo);
            break;
        case TermKind::Mul:
            r = eval_exact_memo(t->a, store, memo) * eval_exact_memo(t->b, store, memo);
            break;
        case TermKind::DivConst: r = eval_exact_memo(t->a, store, memo) / t->num; break;
        case TermKind::Max:
            r = std::max(eval_exact_memo(t->a, store, memo), eval_exact_memo(t->b, store, memo));
            break;
        case TermKind::Sel:
            r = eval_exact_memo(t->a, store, memo) >= eval_exact_memo(t->b, store, memo)
                    ? eval_exact_memo(t->c, store, memo)
                    : eval_exact_memo(t->d, store, memo);
            break;
    }
    return memo.emplace(t.get(), std::move(r)).first->second;
}
}  // namespace

Rational eval_exact(const Term& t, const Store& store) {
    ExactMemo memo;
    return eval_exact_memo(t, store, memo);
}

static std::size_t mix(std::size_t h, std::size_t v) {
    return h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
}

std::size_t term_hash(const Term& t) {
    if (t->hash_cache) return t->hash_cache;
    std::size_t h = static_cast<std::size_t>(t->kind) * 1315423911u;
    switch (t->kind) {
        case TermKind::Num: h = mix(h, std::hash<std::string>{}(t->num.str())); break;
        case TermKind::Var: h = mix(h, t->var); break;
        case TermKind::DivConst:
            h = mix(h, term_hash(t->a));
            h = mix(h, std::hash<std::string>{}(t->num.str()));
            break;
        case TermKind::Sel:
            h = mix(h, term_hash(t->a));
            h = mix(h, term_hash(t->b));
            h = mix(h, term_hash(t->c));
            h = mix(h, term_hash(t->d));
            break;
        default:
            h = mix(h, term_hash(t->a));
            h = mix(h, term_hash(t->b));
    }
    if (!h) h = 1;
    t->hash_cache = h;
    return h;
}

bool term_eq(const Term& a, const Term& b) {
    if (a.get() == b.get()) return true;
    if (a->kind != b->kind) return false;
    if (term_hash(a) != term_hash(b)) return false;
    switch (a->kind) {
        case TermKind::Num: return a->num == b->num;
        case TermKind::Var: return a->var == b->var;
        case TermKind::DivConst: return a->num == b->num && term_eq(a->a, b->a);
        case TermKind::Sel:
            return term_eq(a->a, b->a) && term_eq(a->b, b->b) && term_eq(a->c, b->c) &&
                   term_eq(a->d, b->d);
        default: return term_eq(a->a, b->a) && term_eq(a->b, b->b);
    }
}

Term subst(const Term& t, VarId x, const Term& r) {
    switch (t->kind) {
        case TermKind::Num: return t;
        case TermKind::Var: return t->var == x ? r : t;
        case TermKind::Add: return add(subst(t->a, x, r), subst(t->b, x, r));
        case TermKind::Sub: return sub(subst(t->a, x, r), subst(t->b, x, r));
        case TermKind::Mul: return mul(subst(t->a, x, r), subst(t->b, x, r));
        case TermKind::DivConst: return div_const(subst(t->a, x, r), t->num);
        case TermKind::Max: return tmax(subst(t->a, x, r), subst(t->b, x, r));
        case TermKind::Sel:
            return sel(subst(t->a, x, r), subst(t->b, x, r), subst(t->c, x, r), subst(t->d, x, r));
    }
    throw std::logic_error("bad term kind");
}

void collect_vars(const Term& t, std::vector<VarId>& out) {
    switch (t->kind) {
        case TermKind::Num: return;
        case TermKind::Var: out.push_back(t->var); return;
        case TermKind::DivConst: collect_vars(t->a, out); return;
        case TermKind::Sel:
            collect_vars(t->a, out);
            collect_vars(t->b, out);
            collect_vars(t->c, out);
            collect_vars(t->d, out);
            return;
        default:
            collect_vars(t->a, out);
            collect_vars(t->b, out);
    }
}

namespace {

int precedence(TermKind k) {
    switch (k) {
        case TermKind::Add:
        case TermKind::Sub: return 1;
        case TermKind::Mul:
        case TermKind::DivConst: return 2;
        default: return 3;
    }
}

void print(std::ostringstream& os, const Term& t, const Vocabulary& vocab, int parent_prec,
           bool right_side) {
    int prec = precedence(t->kind);
    bool parens = prec < parent_prec || (prec == parent_prec && right_side && prec <= 2);
    switch (t->kind) {
        case TermKind::Num: {
            if (t->num < 0 || denominator(t->num) != 1) {
                os << "(" << t->num.str() << ")";
            } else {
                os << t->num.str();
            }
            return;
        }
        case TermKind::Var: os << vocab.name(t->var); return;
        case TermKind::Max:
            os << "max(";
            print(os, t->a, vocab, 0, false);
            os << ", ";
            print(os, t->b, vocab, 0, false);
            os << ")";
            return;
        case TermKind::Sel:
            os << "sel(";
            print(os, t->a, vocab, 0, false);
            os << ", ";
            print(os, t->b, vocab, 0, false);
            os << ", ";
            print(os, t->c, vocab, 0, false);
            os << ", ";
            print(os, t->d, vocab, 0, false);
            os << ")";
            return;
        default: break;
    }
    if (parens) os << "(";
    print(os, t->a, vocab, prec, false);
    switch (t->kind) {
        case TermKind::Add: os << " + "; break;
        case TermKind::Sub: os << " - "; break;
        case TermKind::Mul: os << " * "; break;
        case TermKind::DivConst: os << " / "; break;
        default: break;
    }
    if (t->kind == TermKind::DivConst) {
        if (t->num < 0 || denominator(t->num) != 1)
            os << "(" << t->num.str() << ")";
        else
            os << t->num.str();
    } else {
        print(os, t->b, vocab, prec, true);
    }
    if (parens) os << ")";
}

}  // namespace

std::string to_string(const Term& t, const Vocabulary& vocab) {
    std::ostringstream os;
    print(os, t, vocab, 0, false);
    return os.str();
}

Term partial_derivative(const Term& t, VarId x) {
    switch (t->kind) {
        case TermKind::Num: return num(0);
        case TermKind::Var: return num(t->var == x ? 1 : 0);
        case TermKind::Add: return add(partial_derivative(t->a, x), partial_derivative(t->b, x));
        case TermKind::Sub: return sub(partial_derivative(t->a, x), partial_derivative(t->b, x));
        case TermKind::Mul:
            return add(mul(partial_derivative(t->a, x), t->b), mul(t->a, partial_derivative(t->b, x)));
        case TermKind::DivConst: return div_const(partial_derivative(t->a, x), t->num);
        case TermKind::Max:
            // one-sided convention: the first argument wins on ties
            return sel(t->a, t->b, partial_derivative(t->a, x), partial_derivative(t->b, x));
        case TermKind::Sel:
            // the guard is piecewise-constant; differentiate per branch
            return sel(t->a, t->b, partial_derivative(t->c, x), partial_derivative(t->d, x));
    }
    throw std::logic_error("bad term kind");
}

namespace {
bool mentions(const Term& t, VarId x) {
    switch (t->kind) {
        case TermKind::Num: return false;
        case TermKind::Var: return t->var == x;
        case TermKind::DivConst: return mentions(t->a, x);
        case TermKind::Sel:
            return mentions(t->a, x) || mentions(t->b, x) || mentions(t->c, x) || mentions(t->d, x);
        default: return mentions(t->a, x) || mentions(t->b, x);
    }
}
}  // namespace

Term lie_derivative(const Term& t, const Dynamics& d) {
    Term acc = num(0);
    bool first = true;
    for (const auto& [x, f] : d.odes) {
        if (!mentions(t, x)) continue;
        Term piece = mul(partial_derivative(t, x), f);
        acc = first ? piece : add(acc, piece);
        first = false;
    }
    return acc;
}

}  // namespace hhl
