#include "hhl/interval.hpp"

namespace hhl {

namespace {
const double kInf = std::numeric_limits<double>::infinity();

double down(double v) { return std::isfinite(v) ? std::nextafter(v, -kInf) : v; }
double up(double v) { return std::isfinite(v) ? std::nextafter(v, kInf) : v; }

// widen only inexact results so exact zeros and small integers stay tight
double add_down(double a, double b) {
    double r = a + b;
    return (r - a == b && r - b == a) ? r : down(r);
}
double add_up(double a, double b) {
    double r = a + b;
    return (r - a == b && r - b == a) ? r : up(r);
}
double sub_down(double a, double b) {
    double r = a - b;
    return (a - r == b && r + b == a) ? r : down(r);
}
double sub_up(double a, double b) {
    double r = a - b;
    return (a - r == b && r + b == a) ? r : up(r);
}
bool mul_exact(double a, double b, double r) {
    return std::isfinite(r) && std::fma(a, b, -r) == 0.0;
}
}  // namespace

Interval iadd(Interval a, Interval b) { return {add_down(a.lo, b.lo), add_up(a.hi, b.hi)}; }
Interval isub(Interval a, Interval b) { return {sub_down(a.lo, b.hi), sub_up(a.hi, b.lo)}; }

Interval imul(Interval a, Interval b) {
    double as[2] = {a.lo, a.hi}, bs[2] = {b.lo, b.hi};
    double lo = kInf, hi = -kInf;
    double lo_x = 0, lo_y = 0, hi_x = 0, hi_y = 0;
    for (double x : as)
        for (double y : bs) {
            double v = x * y;
            if (std::isnan(v)) v = 0;  // 0 * inf at interval corners
            if (v < lo) {
                lo = v;
                lo_x = x;
                lo_y = y;
            }
            if (v > hi) {
                hi = v;
                hi_x = x;
                hi_y = y;
            }
        }
    if (!mul_exact(lo_x, lo_y, lo)) lo = down(lo);
    if (!mul_exact(hi_x, hi_y, hi)) hi = up(hi);
    return {lo, hi};
}

Interval idiv_const(Interval a, double q_lo, double q_hi) {
    // divisor is a nonzero rational constant enclosed by [q_lo, q_hi]
    double as[2] = {a.lo, a.hi}, qs[2] = {q_lo, q_hi};
    double lo = kInf, hi = -kInf;
    double lo_x = 0, lo_q = 1, hi_x = 0, hi_q = 1;
    for (double x : as)
        for (double q : qs) {
            double v = x / q;
            if (v < lo) {
                lo = v;
                lo_x = x;
                lo_q = q;
            }
            if (v > hi) {
                hi = v;
                hi_x = x;
                hi_q = q;
            }
        }
    if (!(std::isfinite(lo) && std::fma(lo, lo_q, -lo_x) == 0.0)) lo = down(lo);
    if (!(std::isfinite(hi) && std::fma(hi, hi_q, -hi_x) == 0.0)) hi = up(hi);
    return {lo, hi};
}

Interval imax(Interval a, Interval b) { return {std::max(a.lo, b.lo), std::max(a.hi, b.hi)}; }

Interval ipow(Interval a, unsigned e) {
    if (e == 0) return Interval::point(1);
    Interval r = a;
    for (unsigned k = 1; k < e; ++k) {
        if (k % 2 == 1 && a.lo < 0 && a.hi > 0 && r.lo >= 0) {
            // even power so far: keep tight nonnegative lower bound
        }
        r = imul(r, a);
    }
    if (e % 2 == 0 && a.lo < 0 && a.hi > 0) r.lo = std::max(r.lo, 0.0);
    return r;
}

Interval from_rational(const Rational& q) {
    double v = q.convert_to<double>();
    if (Rational(v) == q) return Interval::point(v);
    return {down(v), up(v)};
}

Interval eval_interval(const Term& t, const Box& box) {
    switch (t->kind) {
        case TermKind::Num: return from_rational(t->num);
        case TermKind::Var: return box.get(t->var);
        case TermKind::Add: return iadd(eval_interval(t->a, box), eval_interval(t->b, box));
        case TermKind::Sub: return isub(eval_interval(t->a, box), eval_interval(t->b, box));
        case TermKind::Mul: return imul(eval_interval(t->a, box), eval_interval(t->b, box));
        case TermKind::DivConst: {
            Interval q = from_rational(t->num);
            return idiv_const(eval_interval(t->a, box), q.lo, q.hi);
        }
        case TermKind::Max: return imax(eval_interval(t->a, box), eval_interval(t->b, box));
        case TermKind::Sel: {
            Interval a = eval_interval(t->a, box), b = eval_interval(t->b, box);
            if (a.lo >= b.hi) return eval_interval(t->c, box);
            if (a.hi < b.lo) return eval_interval(t->d, box);
            return eval_interval(t->c, box).hull(eval_interval(t->d, box));
        }
    }
    throw std::logic_error("bad term kind");
}

static Tri tri_not(Tri t) {
    if (t == Tri::True) return Tri::False;
    if (t == Tri::False) return Tri::True;
    return Tri::Unknown;
}

Tri eval_tri(const Assertion& a, const Box& box) {
    switch (a->kind) {
        case AssertKind::True: return Tri::True;
        case AssertKind::Cmp: {
            Interval l = eval_interval(a->lhs, box), r = eval_interval(a->rhs, box);
            switch (a->op) {
                case CmpOp::Le:
                    if (l.hi <= r.lo) return Tri::True;
                    if (l.lo > r.hi) return Tri::False;
                    return Tri::Unknown;
                case CmpOp::Lt:
                    if (l.hi < r.lo) return Tri::True;
                    if (l.lo >= r.hi) return Tri::False;
                    return Tri::Unknown;
                case CmpOp::Eq:
                    if (l.lo > r.hi || r.lo > l.hi) return Tri::False;
                    if (l.degenerate() && r.degenerate() && l.lo == r.lo) return Tri::True;
                    return Tri::Unknown;
                case CmpOp::Ne:
                    if (l.lo > r.hi || r.lo > l.hi) return Tri::True;
                    if (l.degenerate() && r.degenerate() && l.lo == r.lo) return Tri::False;
                    return Tri::Unknown;
            }
            return Tri::Unknown;
        }
        case AssertKind::And: {
            Tri l = eval_tri(a->a, box), r = eval_tri(a->b, box);
            if (l == Tri::False || r == Tri::False) return Tri::False;
            if (l == Tri::True && r == Tri::True) return Tri::True;
            return Tri::Unknown;
        }
        case AssertKind::Or: {
            Tri l = eval_tri(a->a, box), r = eval_tri(a->b, box);
            if (l == Tri::True || r == Tri::True) return Tri::True;
            if (l == Tri::False && r == Tri::False) return Tri::False;
            return Tri::Unknown;
        }
        case AssertKind::Not: return tri_not(eval_tri(a->a, box));
        case AssertKind::Implies: {
            Tri l = eval_tri(a->a, box), r = eval_tri(a->b, box);
            if (l == Tri::False || r == Tri::True) return Tri::True;
            if (l == Tri::True && r == Tri::False) return Tri::False;
            return Tri::Unknown;
        }
    }
    throw std::logic_error("bad assertion kind");
}

}  // namespace hhl
