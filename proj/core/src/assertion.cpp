#include "hhl/assertion.hpp"

#include <sstream>

namespace hhl {

namespace {
Assertion make(AssertNode n) { return std::make_shared<const AssertNode>(std::move(n)); }
}  // namespace

Assertion atrue() {
    AssertNode n;
    n.kind = AssertKind::True;
    return make(std::move(n));
}

Assertion cmp(CmpOp op, Term l, Term r) {
    AssertNode n;
    n.kind = AssertKind::Cmp;
    n.op = op;
    n.lhs = std::move(l);
    n.rhs = std::move(r);
    return make(std::move(n));
}

static Assertion binary(AssertKind k, Assertion a, Assertion b) {
    AssertNode n;
    n.kind = k;
    n.a = std::move(a);
    n.b = std::move(b);
    return make(std::move(n));
}

Assertion aand(Assertion a, Assertion b) { return binary(AssertKind::And, std::move(a), std::move(b)); }
Assertion aor(Assertion a, Assertion b) { return binary(AssertKind::Or, std::move(a), std::move(b)); }
Assertion implies(Assertion a, Assertion b) {
    return binary(AssertKind::Implies, std::move(a), std::move(b));
}

Assertion anot(Assertion a) {
    AssertNode n;
    n.kind = AssertKind::Not;
    n.a = std::move(a);
    return make(std::move(n));
}

Assertion aand_all(const std::vector<Assertion>& xs) {
    if (xs.empty()) return atrue();
    Assertion acc = xs.front();
    for (std::size_t i = 1; i < xs.size(); ++i) acc = aand(acc, xs[i]);
    return acc;
}

Assertion aor_all(const std::vector<Assertion>& xs) {
    if (xs.empty()) return anot(atrue());
    Assertion acc = xs.front();
    for (std::size_t i = 1; i < xs.size(); ++i) acc = aor(acc, xs[i]);
    return acc;
}

bool satisfies(const Store& store, const Assertion& a) {
    switch (a->kind) {
        case AssertKind::True: return true;
        case AssertKind::Cmp: {
            double l = eval(a->lhs, store), r = eval(a->rhs, store);
            switch (a->op) {
                case CmpOp::Eq: return l == r;
                case CmpOp::Le: return l <= r;
                case CmpOp::Lt: return l < r;
                case CmpOp::Ne: return l != r;
            }
            return false;
        }
        case AssertKind::And: return satisfies(store, a->a) && satisfies(store, a->b);
        case AssertKind::Or: return satisfies(store, a->a) || satisfies(store, a->b);
        case AssertKind::Not: return !satisfies(store, a->a);
        case AssertKind::Implies: return !satisfies(store, a->a) || satisfies(store, a->b);
    }
    throw std::logic_error("bad assertion kind");
}

bool satisfies_exact(const Store& store, const Assertion& a) {
    switch (a->kind) {
        case AssertKind::True: return true;
        case AssertKind::Cmp: {
            Rational l = eval_exact(a->lhs, store), r = eval_exact(a->rhs, store);
            switch (a->op) {
                case CmpOp::Eq: return l == r;
                case CmpOp::Le: return l <= r;
                case CmpOp::Lt: return l < r;
                case CmpOp::Ne: return l != r;
            }
            return false;
        }
        case AssertKind::And: return satisfies_exact(store, a->a) && satisfies_exact(store, a->b);
        case AssertKind::Or: return satisfies_exact(store, a->a) || satisfies_exact(store, a->b);
        case AssertKind::Not: return !satisfies_exact(store, a->a);
        case AssertKind::Implies:
            return !satisfies_exact(store, a->a) || satisfies_exact(store, a->b);
    }
    throw std::logic_error("bad assertion kind");
}

Openness classify(const Assertion& a) {
    switch (a->kind) {
        case AssertKind::True: return Openness::Both;
        case AssertKind::Cmp:
            switch (a->op) {
                case CmpOp::Lt:
                case CmpOp::Ne: return Openness::Open;
                case CmpOp::Le:
                case CmpOp::Eq: return Openness::Closed;
            }
            return Openness::Neither;
        case AssertKind::And:
        case AssertKind::Or: {
            Openness l = classify(a->a), r = classify(a->b);
            bool open = (l == Openness::Open || l == Openness::Both) &&
                        (r == Openness::Open || r == Openness::Both);
            bool closed = (l == Openness::Closed || l == Openness::Both) &&
                          (r == Openness::Closed || r == Openness::Both);
            if (open && closed) return Openness::Both;
            if (open) return Openness::Open;
            if (closed) return Openness::Closed;
            return Openness::Neither;
        }
        case AssertKind::Not: {
            Openness l = classify(a->a);
            switch (l) {
                case Openness::Open: return Openness::Closed;
                case Openness::Closed: return Openness::Open;
                default: return l;
            }
        }
        case AssertKind::Implies: {
            // open iff premise closed and conclusion open, dually for closed
            Openness l = classify(a->a), r = classify(a->b);
            bool open = (l == Openness::Closed || l == Openness::Both) &&
                        (r == Openness::Open || r == Openness::Both);
            bool closed = (l == Openness::Open || l == Openness::Both) &&
                          (r == Openness::Closed || r == Openness::Both);
            if (open && closed) return Openness::Both;
            if (open) return Openness::Open;
            if (closed) return Openness::Closed;
            return Openness::Neither;
        }
    }
    throw std::logic_error("bad assertion kind");
}

Assertion subst(const Assertion& a, VarId x, const Term& r) {
    switch (a->kind) {
        case AssertKind::True: return a;
        case AssertKind::Cmp: return cmp(a->op, subst(a->lhs, x, r), subst(a->rhs, x, r));
        case AssertKind::And: return aand(subst(a->a, x, r), subst(a->b, x, r));
        case AssertKind::Or: return aor(subst(a->a, x, r), subst(a->b, x, r));
        case AssertKind::Not: return anot(subst(a->a, x, r));
        case AssertKind::Implies: return implies(subst(a->a, x, r), subst(a->b, x, r));
    }
    throw std::logic_error("bad assertion kind");
}

static std::size_t mix(std::size_t h, std::size_t v) {
    return h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
}

std::size_t assertion_hash(const Assertion& a) {
    if (a->hash_cache) return a->hash_cache;
    std::size_t h = static_cast<std::size_t>(a->kind) * 2654435761u;
    switch (a->kind) {
        case AssertKind::True: break;
        case AssertKind::Cmp:
            h = mix(h, static_cast<std::size_t>(a->op));
            h = mix(h, term_hash(a->lhs));
            h = mix(h, term_hash(a->rhs));
            break;
        case AssertKind::Not: h = mix(h, assertion_hash(a->a)); break;
        default:
            h = mix(h, assertion_hash(a->a));
            h = mix(h, assertion_hash(a->b));
    }
    if (!h) h = 1;
    a->hash_cache = h;
    return h;
}

bool assertion_eq(const Assertion& a, const Assertion& b) {
    if (a.get() == b.get()) return true;
    if (a->kind != b->kind) return false;
    if (assertion_hash(a) != assertion_hash(b)) return false;
    switch (a->kind) {
        case AssertKind::True: return true;
        case AssertKind::Cmp:
            return a->op == b->op && term_eq(a->lhs, b->lhs) && term_eq(a->rhs, b->rhs);
        case AssertKind::Not: return assertion_eq(a->a, b->a);
        default: return assertion_eq(a->a, b->a) && assertion_eq(a->b, b->b);
    }
}

void collect_vars(const Assertion& a, std::vector<VarId>& out) {
    switch (a->kind) {
        case AssertKind::True: return;
        case AssertKind::Cmp:
            collect_vars(a->lhs, out);
            collect_vars(a->rhs, out);
            return;
        case AssertKind::Not: collect_vars(a->a, out); return;
        default:
            collect_vars(a->a, out);
            collect_vars(a->b, out);
    }
}

namespace {

int aprec(AssertKind k) {
    switch (k) {
        case AssertKind::Implies: return 1;
        case AssertKind::Or: return 2;
        case AssertKind::And: return 3;
        default: return 4;
    }
}

void print(std::ostringstream& os, const Assertion& a, const Vocabulary& vocab, int parent_prec) {
    int prec = aprec(a->kind);
    bool parens = prec < parent_prec;
    switch (a->kind) {
        case AssertKind::True: os << "true"; return;
        case AssertKind::Cmp: {
            // flip constant-on-the-left comparisons so ge/gt print naturally
            bool flip = (a->op == CmpOp::Le || a->op == CmpOp::Lt) &&
                        a->lhs->kind == TermKind::Num && a->rhs->kind != TermKind::Num;
            const Term& l = flip ? a->rhs : a->lhs;
            const Term& r = flip ? a->lhs : a->rhs;
            os << to_string(l, vocab);
            switch (a->op) {
                case CmpOp::Eq: os << " = "; break;
                case CmpOp::Le: os << (flip ? " >= " : " <= "); break;
                case CmpOp::Lt: os << (flip ? " > " : " < "); break;
                case CmpOp::Ne: os << " != "; break;
            }
            os << to_string(r, vocab);
            return;
        }
        case AssertKind::Not:
            os << "!(";
            print(os, a->a, vocab, 0);
            os << ")";
            return;
        default: break;
    }
    if (parens) os << "(";
    // and/or associate left, implication associates right
    bool rassoc = a->kind == AssertKind::Implies;
    print(os, a->a, vocab, rassoc ? prec + 1 : prec);
    os << (a->kind == AssertKind::And ? " && " : a->kind == AssertKind::Or ? " || " : " -> ");
    print(os, a->b, vocab, rassoc ? prec : prec + 1);
    if (parens) os << ")";
}

}  // namespace

std::string to_string(const Assertion& a, const Vocabulary& vocab) {
    std::ostringstream os;
    print(os, a, vocab, 0);
    return os.str();
}

}  // namespace hhl
