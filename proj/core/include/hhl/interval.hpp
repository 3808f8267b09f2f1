// Closed interval arithmetic with outward rounding, plus interval evaluation
// of terms and three-valued evaluation of assertions over boxes.
#pragma once

#include "hhl/assertion.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace hhl {

struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    static Interval point(double v) { return {v, v}; }
    static Interval whole() { return {}; }
    bool empty() const { return lo > hi; }
    bool degenerate() const { return lo == hi; }
    double width() const { return hi - lo; }
    double mid() const { return lo + (hi - lo) / 2; }
    bool contains(double v) const { return lo <= v && v <= hi; }

    Interval intersect(const Interval& o) const { return {std::max(lo, o.lo), std::min(hi, o.hi)}; }
    Interval hull(const Interval& o) const { return {std::min(lo, o.lo), std::max(hi, o.hi)}; }
};

Interval iadd(Interval a, Interval b);
Interval isub(Interval a, Interval b);
Interval imul(Interval a, Interval b);
Interval idiv_const(Interval a, double q_lo, double q_hi);
Interval imax(Interval a, Interval b);
Interval ipow(Interval a, unsigned e);
Interval from_rational(const Rational& q);

// Per-variable closed bounds; every obligation variable is covered.
struct Box {
    std::map<VarId, Interval> dims;

    Interval get(VarId v) const {
        auto it = dims.find(v);
        return it == dims.end() ? Interval::whole() : it->second;
    }
    void set(VarId v, Interval iv) { dims[v] = iv; }
    bool empty() const {
        for (auto& [v, iv] : dims)
            if (iv.empty()) return true;
        return false;
    }
};

Interval eval_interval(const Term& t, const Box& box);

enum class Tri : std::uint8_t { False, True, Unknown };
Tri eval_tri(const Assertion& a, const Box& box);

}  // namespace hhl
