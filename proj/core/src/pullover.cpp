#include "hhl/pullover.hpp"

#include "hhl/parser.hpp"
#include "hhl/poly.hpp"

#include <fstream>
#include <functional>
#include <sstream>

namespace hhl::pullover {

using rss::RssParams;

namespace {

constexpr VarId kExtBase = 1u << 24;

// --------------------------------------------------------- builder context

struct Bld {
    const Scenario& sc;
    const RssParams& p;
    Term y, v, a, l, ytgt;
    std::array<Term, 3> yi, vi, ai, li;

    explicit Bld(const Scenario& s)
        : sc(s), p(s.params), y(var(s.var.y)), v(var(s.var.v)), a(var(s.var.a)), l(var(s.var.l)),
          ytgt(var(s.var.y_tgt)) {
        for (int i = 0; i < 3; ++i) {
            yi[i] = var(s.var.yi[i]);
            vi[i] = var(s.var.vi[i]);
            ai[i] = var(s.var.ai[i]);
            li[i] = var(s.var.li[i]);
        }
    }

    Term drss(Term vf, Term vr) const { return rss::d_rss_term(vf, vr, num(p.rho), p); }
    Term drss_pm(Term vf, Term vr) const { return rss::d_rss_pm_term(vf, vr, num(p.rho), p); }

    Assertion ahead_sl(int i) const {
        return aand(lt(y, yi[i]), le(tmax(sub(li[i], l), sub(l, li[i])), num(1, 2)));
    }
    Assertion behind_sl(int i) const {
        return aand(lt(yi[i], y), le(tmax(sub(li[i], l), sub(l, li[i])), num(1, 2)));
    }
    Assertion v_bounds() const { return aand(le(num(0), v), le(v, num(p.v_max))); }
    Assertion a_bounds() const { return aand(le(num(-p.b_min), a), le(a, num(p.a_max))); }

    // remaining distance before the comfortable-braking envelope binds
    Term brake_margin() const {
        return sub(sub(ytgt, y), div_const(mul(v, v), 2 * p.b_min));
    }
};

Assertion gap_ge(const Bld& b, const Term& front_y, const Term& front_v, const Term& rear_y,
                 const Term& rear_v) {
    return ge(sub(front_y, rear_y), b.drss(front_v, rear_v));
}

// ---------------------------------------------- rational substitution engine

// value num / den^k for a shared denominator that is positive on the domain
struct RV {
    Term n;
    int k = 0;
};

RV rv_align(RV x, int k, const Term& den) {
    while (x.k < k) {
        x.n = mul(x.n, den);
        ++x.k;
    }
    return x;
}

RV rv_term(const Term& t, const std::map<VarId, RV>& m, const Term& den) {
    switch (t->kind) {
        case TermKind::Num: return {t, 0};
        case TermKind::Var: {
            auto it = m.find(t->var);
            return it == m.end() ? RV{t, 0} : it->second;
        }
        case TermKind::Add:
        case TermKind::Sub:
        case TermKind::Max: {
            RV a = rv_term(t->a, m, den), b = rv_term(t->b, m, den);
            int k = std::max(a.k, b.k);
            a = rv_align(a, k, den);
            b = rv_align(b, k, den);
            Term n = t->kind == TermKind::Add   ? add(a.n, b.n)
                     : t->kind == TermKind::Sub ? sub(a.n, b.n)
                                                : tmax(a.n, b.n);
            return {n, k};
        }
        case TermKind::Mul: {
            RV a = rv_term(t->a, m, den), b = rv_term(t->b, m, den);
            return {mul(a.n, b.n), a.k + b.k};
        }
        case TermKind::DivConst: {
            RV a = rv_term(t->a, m, den);
            return {div_const(a.n, t->num), a.k};
        }
        case TermKind::Sel: {
            RV a = rv_term(t->a, m, den), b = rv_term(t->b, m, den);
            RV c = rv_term(t->c, m, den), d = rv_term(t->d, m, den);
            int kg = std::max(a.k, b.k), kv = std::max(c.k, d.k);
            a = rv_align(a, kg, den);
            b = rv_align(b, kg, den);
            c = rv_align(c, kv, den);
            d = rv_align(d, kv, den);
            return {sel(a.n, b.n, c.n, d.n), kv};
        }
    }
    throw std::logic_error("bad term kind");
}

// substitute with positive-denominator values; comparisons are multiplied
// through by den^k, which preserves them because den > 0 on the guarded case
Assertion subst_rv(const Assertion& as, const std::map<VarId, RV>& m, const Term& den) {
    switch (as->kind) {
        case AssertKind::True: return as;
        case AssertKind::Cmp: {
            RV l = rv_term(as->lhs, m, den), r = rv_term(as->rhs, m, den);
            int k = std::max(l.k, r.k);
            l = rv_align(l, k, den);
            r = rv_align(r, k, den);
            return cmp(as->op, l.n, r.n);
        }
        case AssertKind::And: return aand(subst_rv(as->a, m, den), subst_rv(as->b, m, den));
        case AssertKind::Or: return aor(subst_rv(as->a, m, den), subst_rv(as->b, m, den));
        case AssertKind::Not: return anot(subst_rv(as->a, m, den));
        case AssertKind::Implies:
            return implies(subst_rv(as->a, m, den), subst_rv(as->b, m, den));
    }
    throw std::logic_error("bad assertion kind");
}

Assertion subst_plain(const Assertion& as, const std::map<VarId, Term>& m) {
    std::map<VarId, RV> rv;
    for (auto& [k, t] : m) rv[k] = {t, 0};
    return subst_rv(as, rv, num(1));
}

// -------------------------------------------------------- radical elimination

// polynomials with max/sel subterms abstracted behind extension variables
struct ExtTable {
    std::vector<Term> terms;
    std::map<std::size_t, VarId> by_hash;

    VarId intern(const Term& t) {
        std::size_t h = term_hash(t);
        auto it = by_hash.find(h);
        if (it != by_hash.end()) return it->second;
        VarId id = kExtBase + static_cast<VarId>(terms.size());
        terms.push_back(t);
        by_hash.emplace(h, id);
        return id;
    }
};

Poly to_poly_ext(const Term& t, ExtTable& ext, VarId forbidden) {
    switch (t->kind) {
        case TermKind::Num: return Poly::constant(t->num);
        case TermKind::Var: return Poly::variable(t->var);
        case TermKind::Add: return to_poly_ext(t->a, ext, forbidden) + to_poly_ext(t->b, ext, forbidden);
        case TermKind::Sub: return to_poly_ext(t->a, ext, forbidden) - to_poly_ext(t->b, ext, forbidden);
        case TermKind::Mul: return to_poly_ext(t->a, ext, forbidden) * to_poly_ext(t->b, ext, forbidden);
        case TermKind::DivConst:
            return to_poly_ext(t->a, ext, forbidden).scaled(Rational(1) / t->num);
        case TermKind::Max:
        case TermKind::Sel: {
            std::vector<VarId> vs;
            collect_vars(t, vs);
            for (VarId v : vs)
                if (v == forbidden)
                    throw std::logic_error("max term depends on the eliminated radical");
            return Poly::variable(ext.intern(t));
        }
    }
    throw std::logic_error("bad term kind");
}

// Rewrite atoms polynomial in s (where s = sqrt(Q), s >= 0) into radical-free
// conditions. Every atom becomes P + S*s ~ 0 after reducing s^2 to Q.
Assertion eliminate_sqrt(const Assertion& as, VarId s_var, const Poly& q, ExtTable& ext) {
    std::function<Assertion(const Assertion&)> go = [&](const Assertion& f) -> Assertion {
        switch (f->kind) {
            case AssertKind::True: return f;
            case AssertKind::And: return aand(go(f->a), go(f->b));
            case AssertKind::Or: return aor(go(f->a), go(f->b));
            case AssertKind::Not: return anot(go(f->a));
            case AssertKind::Implies: return implies(go(f->a), go(f->b));
            case AssertKind::Cmp: break;
        }
        Poly e = to_poly_ext(f->lhs, ext, s_var) - to_poly_ext(f->rhs, ext, s_var);
        std::vector<Poly> by_pow = e.coefficients_in(s_var);
        Poly P, S;
        Poly qpow = Poly::constant(1);
        for (std::size_t d = 0; d < by_pow.size(); ++d) {
            if (d >= 2 && d % 2 == 0) qpow = qpow * q;
            if (d % 2 == 0) {
                P = P + by_pow[d] * (d == 0 ? Poly::constant(1) : qpow);
            } else {
                // s^d = s * Q^{(d-1)/2}
                Poly qq = Poly::constant(1);
                for (std::size_t k = 0; k < (d - 1) / 2; ++k) qq = qq * q;
                S = S + by_pow[d] * qq;
            }
        }
        Term Pt = P.to_term(&ext.terms), St = S.to_term(&ext.terms);
        Term P2 = mul(Pt, Pt), S2Q = mul(mul(St, St), q.to_term(&ext.terms));
        Term z = num(0);
        auto ge0 = [&](Term t) { return ge(t, z); };
        auto gt0 = [&](Term t) { return gt(t, z); };
        auto lt0 = [&](Term t) { return lt(t, z); };
        auto le0 = [&](Term t) { return le(t, z); };
        // E := P + S s with s = sqrt(Q) >= 0
        Assertion e_ge0 = aor(aand(ge0(St), aor(ge0(Pt), ge(S2Q, P2))),
                              aand(lt0(St), aand(ge0(Pt), ge(P2, S2Q))));
        Assertion e_gt0 = aor(aand(ge0(St), aor(gt0(Pt), aand(gt0(St), gt(S2Q, P2)))),
                              aand(lt0(St), aand(gt0(Pt), gt(P2, S2Q))));
        Assertion e_eq0 = aand(le0(mul(Pt, St)), eq(P2, S2Q));
        switch (f->op) {
            case CmpOp::Le: {
                // -E >= 0
                Term nP = sub(z, Pt), nS = sub(z, St);
                return aor(aand(ge0(nS), aor(ge0(nP), ge(S2Q, P2))),
                           aand(lt0(nS), aand(ge0(nP), ge(P2, S2Q))));
            }
            case CmpOp::Lt: {
                Term nP = sub(z, Pt), nS = sub(z, St);
                return aor(aand(ge0(nS), aor(gt0(nP), aand(gt0(nS), gt(S2Q, P2)))),
                           aand(lt0(nS), aand(gt0(nP), gt(P2, S2Q))));
            }
            case CmpOp::Eq: return e_eq0;
            case CmpOp::Ne: return anot(e_eq0);
        }
        (void)e_ge0;
        (void)e_gt0;
        throw std::logic_error("bad op");
    };
    return go(as);
}

}  // namespace

// ------------------------------------------------------------------ scenario

Scenario scenario(const RssParams& p) {
    p.validate();
    Scenario sc;
    sc.params = p;
    sc.vocab = std::make_shared<Vocabulary>();
    Vars& vr = sc.var;
    vr.y = sc.vocab->intern("y");
    vr.v = sc.vocab->intern("v");
    vr.a = sc.vocab->intern("a");
    vr.l = sc.vocab->intern("l");
    for (int i = 0; i < 3; ++i) {
        std::string s = std::to_string(i + 1);
        vr.yi[i] = sc.vocab->intern("y_" + s);
        vr.vi[i] = sc.vocab->intern("v_" + s);
        vr.ai[i] = sc.vocab->intern("a_" + s);
        vr.li[i] = sc.vocab->intern("l_" + s);
    }
    vr.y_tgt = sc.vocab->intern("y_tgt");
    vr.t = sc.vocab->intern("t");

    Bld b(sc);
    std::vector<Assertion> safe;
    for (int i = 0; i < 3; ++i)
        safe.push_back(implies(b.ahead_sl(i), gap_ge(b, b.yi[i], b.vi[i], b.y, b.v)));
    safe.push_back(b.v_bounds());
    safe.push_back(b.a_bounds());
    sc.safe = aand_all(safe);

    std::vector<Assertion> env;
    for (int i = 0; i < 3; ++i) {
        env.push_back(le(num(p.v_min), b.vi[i]));
        env.push_back(le(b.vi[i], num(p.v_max)));
        env.push_back(eq(b.ai[i], num(0)));
    }
    env.push_back(eq(b.li[0], num(2)));
    env.push_back(eq(b.li[1], num(2)));
    env.push_back(eq(b.li[2], num(1)));
    env.push_back(gt(b.yi[1], b.yi[0]));
    sc.env = aand_all(env);

    sc.goal = aand_all({eq(b.l, num(3)), eq(b.y, b.ytgt), eq(b.v, num(0))});
    return sc;
}

const Subscenario& SubscenarioTree::node(const std::string& label) const {
    for (const Subscenario& s : nodes)
        if (s.label == label) return s;
    throw UnknownLabel(label);
}

SubscenarioTree subscenario_tree(const Scenario& sc) {
    Bld b(sc);
    const RssParams& p = sc.params;
    SubscenarioTree tree{sc, {}};
    auto lane_is = [&](double two_x) { return eq(b.l, num((long long)(two_x), 2)); };
    Assertion l15or2 = aor(lane_is(3), lane_is(4));
    Assertion l25or3 = aor(lane_is(5), lane_is(6));
    Assertion abound = b.a_bounds();
    Term z = num(0);

    auto gap2 = gap_ge(b, b.yi[1], b.vi[1], b.y, b.v);
    auto gap1 = gap_ge(b, b.yi[0], b.vi[0], b.y, b.v);
    auto gap3 = gap_ge(b, b.yi[2], b.vi[2], b.y, b.v);

    tree.nodes.push_back(
        {"1", "",
         aand_all({eq(b.l, num(3)), b.v_bounds(), abound}),
         sc.env,
         aand(eq(b.y, b.ytgt), eq(b.v, z))});

    tree.nodes.push_back(
        {"11", "1",
         aand_all({l25or3, le(z, b.v), le(b.v, b.vi[1]), gap2, abound}),
         aand(sc.env, implies(lane_is(5), aand(b.behind_sl(0), b.ahead_sl(1)))),
         eq(b.l, num(3))});

    tree.nodes.push_back(
        {"12", "1",
         aand_all({l25or3, le(z, b.v), le(b.v, b.vi[0]), gap1, abound}),
         aand(sc.env, implies(lane_is(5), b.ahead_sl(0))),
         eq(b.l, num(3))});

    tree.nodes.push_back(
        {"111", "11",
         aand_all({l15or2, le(z, b.v), le(b.v, b.vi[1]), gap2, gap3, abound}),
         aand_all({sc.env, b.behind_sl(0), b.ahead_sl(1)}),
         eq(b.l, num(2))});

    tree.nodes.push_back(
        {"121", "12",
         aand_all({l15or2, le(z, b.v), le(b.v, b.vi[0]), gap1, gap3, abound}),
         aand(sc.env, b.ahead_sl(0)),
         eq(b.l, num(2))});

    tree.nodes.push_back(
        {"1111", "111",
         aand_all({eq(b.l, num(1)), gap3, b.v_bounds(), abound}),
         sc.env,
         aand_all({gap2, gap_ge(b, b.y, b.v, b.yi[0], b.vi[0]), eq(b.vi[1], b.v)})});

    tree.nodes.push_back(
        {"1211", "121",
         aand_all({eq(b.l, num(1)), gap3, b.v_bounds(), abound}),
         sc.env,
         aand(gap1, eq(num(p.v_min), b.v))});

    (void)p;
    return tree;
}

// ------------------------------------------------------------------ programs

namespace {

Dynamics dyn_yv(const Scenario& sc) {
    return Dynamics{{{sc.var.y, var(sc.var.v)}, {sc.var.v, var(sc.var.a)}}};
}
Dynamics dyn_tyv(const Scenario& sc) {
    return Dynamics{
        {{sc.var.t, num(1)}, {sc.var.y, var(sc.var.v)}, {sc.var.v, var(sc.var.a)}}};
}

// cruise while stopping is still possible, then brake through the rest of the
// lane change; the lane jumps to the half value first and the integer last
Program lane_change_stage(const Scenario& sc, const Rational& half_lane,
                          const Rational& to_lane) {
    Bld b(sc);
    const RssParams& p = sc.params;
    return pseq({passign(sc.var.l, num(half_lane)), passign(sc.var.t, num(0)),
                 passign(sc.var.a, num(0)),
                 pdwhile(aand(gt(b.brake_margin(), num(0)), lt(var(sc.var.t), num(p.t_lc))),
                         dyn_tyv(sc)),
                 passign(sc.var.a, num(-p.b_min)),
                 pdwhile(lt(var(sc.var.t), num(p.t_lc)), dyn_tyv(sc)),
                 passign(sc.var.l, num(to_lane))});
}

// predicted rear gap over POV1 after braking from the current speed to v_2
Term rear_gap_predicted(const Bld& b) {
    const RssParams& p = b.p;
    return add(sub(b.y, b.yi[0]),
               sub(div_const(sub(mul(b.v, b.v), mul(b.vi[1], b.vi[1])), 2 * p.b_min),
                   div_const(mul(b.vi[0], sub(b.v, b.vi[1])), p.b_min)));
}

}  // namespace

Program proper_response(const Scenario& sc, const std::string& w, int i) {
    Bld b(sc);
    const RssParams& p = sc.params;
    if (w == "1" && i == 1) {
        return pseq({passign(sc.var.a, num(0)),
                     pdwhile(gt(b.brake_margin(), num(0)), dyn_yv(sc)),
                     passign(sc.var.a, num(-p.b_min)),
                     pdwhile(gt(var(sc.var.v), num(0)), dyn_yv(sc))});
    }
    if (w == "11" && i == 1) return lane_change_stage(sc, {5, 2}, 3);
    if (w == "12" && i == 1) return lane_change_stage(sc, {5, 2}, 3);
    if (w == "111" && i == 1) return lane_change_stage(sc, {3, 2}, 2);
    if (w == "121" && i == 1) return lane_change_stage(sc, {3, 2}, 2);
    if (w == "1111") {
        Term d21 = b.drss(b.vi[1], b.vi[0]);
        Assertion need_gap = lt(rear_gap_predicted(b), d21);
        switch (i) {
            case 1:
                return pseq({passign(sc.var.a, num(p.a_max)), pdwhile(need_gap, dyn_yv(sc)),
                             passign(sc.var.a, num(-p.b_min)),
                             pdwhile(lt(b.vi[1], b.v), dyn_yv(sc))});
            case 2:
                return pseq({passign(sc.var.a, num(p.a_max)),
                             pdwhile(aand(need_gap, lt(b.v, num(p.v_max))), dyn_yv(sc)),
                             passign(sc.var.a, num(0)), pdwhile(need_gap, dyn_yv(sc)),
                             passign(sc.var.a, num(-p.b_min)),
                             pdwhile(lt(b.vi[1], b.v), dyn_yv(sc))});
            case 3:
                return pseq({passign(sc.var.a, num(p.a_max)),
                             pdwhile(lt(b.v, b.vi[1]), dyn_yv(sc))});
            case 4:
                return pseq({passign(sc.var.a, num(-p.b_min)),
                             pdwhile(lt(b.vi[1], b.v), dyn_yv(sc))});
            default: break;
        }
    }
    if (w == "1211") {
        Assertion gap_small = lt(sub(b.yi[0], b.y), b.drss(b.vi[0], b.v));
        switch (i) {
            case 1:
                return pseq({passign(sc.var.a, num(-p.b_min)),
                             pdwhile(lt(num(p.v_min), b.v), dyn_yv(sc)), passign(sc.var.a, num(0)),
                             pdwhile(gap_small, dyn_yv(sc))});
            case 2:
                return pseq({passign(sc.var.a, num(-p.b_min)),
                             pdwhile(lt(num(p.v_min), b.v), dyn_yv(sc))});
            default: break;
        }
    }
    throw UnknownLabel(w + "," + std::to_string(i));
}

// -------------------------------------------------------------- preconditions

namespace {

// conjuncts of A_{w,u} that transport through substitution (everything except
// the environment, the acceleration bounds and the lane pin)
struct CoreParts {
    std::vector<Assertion> atoms;
    Assertion all() const { return aand_all(atoms); }
};

struct PreBuilder {
    const Scenario& sc;
    Bld b;
    const RssParams& p;
    Term z = num(0);

    explicit PreBuilder(const Scenario& s) : sc(s), b(s), p(s.params) {}

    Assertion structural(long long lane2x) {
        return aand_all({sc.env, b.a_bounds(), eq(b.l, num(lane2x, 2))});
    }

    // exit of a cruise-then-brake lane-change stage, case split on whether
    // braking engages before the change completes
    Assertion chain_through_lane_change(const Assertion& target) {
        Term F0 = b.brake_margin();
        Term tlcv = mul(num(p.t_lc), b.v);
        // no braking: the whole change happens at the initial speed
        std::map<VarId, Term> nb;
        nb[sc.var.y] = add(b.y, tlcv);
        for (int i = 0; i < 3; ++i) nb[sc.var.yi[i]] = add(b.yi[i], mul(num(p.t_lc), b.vi[i]));
        Assertion nb_case = implies(ge(F0, tlcv), subst_plain(target, nb));
        // braking engages at the stopping envelope; the envelope is invariant
        // under the braking flow, so the exit sits exactly on it
        Term nv = add(sub(mul(b.v, b.v), mul(num(p.b_min * p.t_lc), b.v)), mul(num(p.b_min), F0));
        std::map<VarId, RV> br;
        br[sc.var.v] = {nv, 1};
        br[sc.var.y] = {sub(mul(mul(b.ytgt, b.v), b.v), div_const(mul(nv, nv), 2 * p.b_min)), 2};
        for (int i = 0; i < 3; ++i)
            br[sc.var.yi[i]] = {add(b.yi[i], mul(num(p.t_lc), b.vi[i])), 0};
        Assertion br_case = implies(lt(F0, tlcv), subst_rv(target, br, b.v));
        return aand(nb_case, br_case);
    }

    // front gap to the lane-1 leader at the moment braking starts (the worst
    // point of the cruise portion of a lane-change stage)
    Assertion pov3_at_brake_onset() {
        Term F0 = b.brake_margin();
        Term tlcv = mul(num(p.t_lc), b.v);
        Assertion nb = implies(ge(F0, tlcv),
                               ge(sub(add(b.yi[2], mul(num(p.t_lc), b.vi[2])), add(b.y, tlcv)),
                                  b.drss(b.vi[2], b.v)));
        // multiplied through by v > 0: gap(t0) = y3 + v3 F0 / v - (y_tgt - v^2/2b)
        Term lhs = add(mul(b.v, sub(b.yi[2], sub(b.ytgt, div_const(mul(b.v, b.v), 2 * p.b_min)))),
                       mul(b.vi[2], F0));
        Assertion br = implies(lt(F0, tlcv), ge(lhs, mul(b.v, b.drss(b.vi[2], b.v))));
        return aand(nb, br);
    }

    CoreParts core_1() {
        CoreParts c;
        c.atoms = {gt(b.v, z), le(b.v, num(p.v_max)), ge(b.brake_margin(), z)};
        return c;
    }

    CoreParts core_11() {
        CoreParts c;
        c.atoms = {gt(b.v, z),
                   le(b.v, b.vi[1]),
                   lt(b.y, b.yi[1]),
                   gap_ge(b, b.yi[1], b.vi[1], b.y, b.v),
                   lt(b.yi[0], b.y),
                   ge(b.brake_margin(), z),
                   chain_through_lane_change(aand(core_1().all(), lt(b.yi[0], b.y)))};
        return c;
    }

    CoreParts core_12() {
        CoreParts c;
        c.atoms = {gt(b.v, z),
                   le(b.v, b.vi[0]),
                   lt(b.y, b.yi[0]),
                   gap_ge(b, b.yi[0], b.vi[0], b.y, b.v),
                   ge(b.brake_margin(), z),
                   chain_through_lane_change(core_1().all())};
        return c;
    }

    CoreParts core_111() {
        CoreParts c;
        c.atoms = {gt(b.v, z),
                   le(b.v, b.vi[1]),
                   lt(b.y, b.yi[1]),
                   gap_ge(b, b.yi[1], b.vi[1], b.y, b.v),
                   gap_ge(b, b.yi[2], b.vi[2], b.y, b.v),
                   lt(b.yi[0], b.y),
                   ge(b.brake_margin(), z),
                   pov3_at_brake_onset(),
                   chain_through_lane_change(core_11().all())};
        return c;
    }

    CoreParts core_121() {
        CoreParts c;
        c.atoms = {gt(b.v, z),
                   le(b.v, b.vi[0]),
                   lt(b.y, b.yi[0]),
                   gap_ge(b, b.yi[0], b.vi[0], b.y, b.v),
                   gap_ge(b, b.yi[2], b.vi[2], b.y, b.v),
                   ge(b.brake_margin(), z),
                   pov3_at_brake_onset(),
                   chain_through_lane_change(core_12().all())};
        return c;
    }

    // target checked at the exit state of every speed-adjustment stage: the
    // next stage's core plus the rear-gap subgoal over POV1
    Assertion merge_front_target() {
        return aand(core_111().all(), gap_ge(b, b.y, b.v, b.yi[0], b.vi[0]));
    }

    Assertion pre_1111(int variant) {
        Term v2 = b.vi[1], v1 = b.vi[0], v3 = b.vi[2], y1 = b.yi[0], y3 = b.yi[2];
        Term r0 = rear_gap_predicted(b);
        Term pm21 = b.drss_pm(v2, v1);
        Assertion entry_gap3 = gap_ge(b, y3, v3, b.y, b.v);
        Assertion target = merge_front_target();

        switch (variant) {
            case 3: {  // accelerate until the speeds match
                Term T = div_const(sub(v2, b.v), p.a_max);
                std::map<VarId, Term> m;
                m[sc.var.v] = v2;
                m[sc.var.y] = add(b.y, div_const(sub(mul(v2, v2), mul(b.v, b.v)), 2 * p.a_max));
                for (int i = 0; i < 3; ++i) m[sc.var.yi[i]] = add(b.yi[i], mul(b.vi[i], T));
                Assertion exit_gap3 =
                    ge(sub(m[sc.var.yi[2]], m[sc.var.y]), b.drss(v3, v2));
                return aand_all({structural(2), gt(b.v, z), le(b.v, v2), entry_gap3, exit_gap3,
                                 subst_plain(target, m)});
            }
            case 4: {  // brake until the speeds match
                Term T = div_const(sub(b.v, v2), p.b_min);
                std::map<VarId, Term> m;
                m[sc.var.v] = v2;
                m[sc.var.y] = add(b.y, div_const(sub(mul(b.v, b.v), mul(v2, v2)), 2 * p.b_min));
                for (int i = 0; i < 3; ++i) m[sc.var.yi[i]] = add(b.yi[i], mul(b.vi[i], T));
                return aand_all({structural(2), gt(b.v, z), le(v2, b.v), le(b.v, num(p.v_max)),
                                 entry_gap3, subst_plain(target, m)});
            }
            case 1: {  // accelerate for rear room, then brake to match
                // peak speed v1 + s with s = sqrt(Q)
                Rational kap_inv = 2 * p.a_max * p.b_min / (p.b_min + p.a_max);
                auto q_poly = [&](const Poly& d21) {
                    Poly dv = Poly::variable(sc.var.v) - Poly::variable(sc.var.vi[0]);
                    auto r0p = to_poly(r0);
                    return dv * dv + (d21 - *r0p).scaled(kap_inv);
                };
                VarId s_id = sc.vocab->intern("_s_peak");
                Term s = var(s_id);
                Term vp = add(v1, s);
                Term T = add(div_const(sub(vp, b.v), p.a_max), div_const(sub(vp, v2), p.b_min));
                std::map<VarId, Term> m;
                m[sc.var.v] = v2;
                m[sc.var.y] =
                    add(add(b.y, div_const(sub(mul(vp, vp), mul(b.v, b.v)), 2 * p.a_max)),
                        div_const(sub(mul(vp, vp), mul(v2, v2)), 2 * p.b_min));
                for (int i = 0; i < 3; ++i) m[sc.var.yi[i]] = add(b.yi[i], mul(b.vi[i], T));
                // peak-point state for the lane-1 leader check
                Term y_peak = add(b.y, div_const(sub(mul(vp, vp), mul(b.v, b.v)), 2 * p.a_max));
                Term y3_peak = add(y3, mul(v3, div_const(sub(vp, b.v), p.a_max)));
                Assertion peak_gap3 =
                    aand(ge(sub(y3_peak, y_peak), z),
                         ge(sub(y3_peak, y_peak), b.drss_pm(v3, vp)));
                Assertion vp_cap =
                    le(mul(s, s), mul(sub(num(p.v_max), v1), sub(num(p.v_max), v1)));
                Assertion vp_ge_v2 = aor(le(v2, v1), ge(mul(s, s), mul(sub(v2, v1), sub(v2, v1))));
                Assertion raw = aand_all(
                    {vp_cap, vp_ge_v2, peak_gap3, subst_plain(target, m)});
                auto pm21p = to_poly(pm21);
                ExtTable ext;
                Assertion elim = eliminate_sqrt(raw, s_id, q_poly(*pm21p), ext);
                return aand_all({structural(2), gt(b.v, z), gt(pm21, z), le(r0, pm21),
                                 entry_gap3, elim});
            }
            case 2: {  // accelerate to the limit, cruise for rear room, brake
                Term vmax = num(p.v_max);
                Term T_a = div_const(sub(vmax, b.v), p.a_max);
                Term y_a = add(b.y, div_const(sub(mul(vmax, vmax), mul(b.v, b.v)), 2 * p.a_max));
                auto yi_a = [&](int i) { return add(b.yi[i], mul(b.vi[i], T_a)); };
                Term d21 = b.drss(v2, v1);
                // rear-room shortfall at the speed limit, then the cruise runs
                // (d21 - r_a) / (vmax - v1) seconds
                Term r_a = add(sub(y_a, yi_a(0)),
                               sub(div_const(sub(mul(vmax, vmax), mul(v2, v2)), 2 * p.b_min),
                                   div_const(mul(v1, sub(vmax, v2)), p.b_min)));
                Term den = sub(vmax, v1);
                Term tc_num = sub(d21, r_a);  // cruise time times den
                std::map<VarId, RV> m;
                m[sc.var.v] = {v2, 0};
                m[sc.var.y] = {add(mul(add(y_a, div_const(sub(mul(vmax, vmax), mul(v2, v2)),
                                                          2 * p.b_min)),
                                       den),
                                   mul(vmax, tc_num)),
                               1};
                for (int i = 0; i < 3; ++i)
                    m[sc.var.yi[i]] = {add(mul(yi_a(i), den), mul(b.vi[i], tc_num)), 1};
                Term T_b = div_const(sub(vmax, v2), p.b_min);
                for (int i = 0; i < 3; ++i)
                    m[sc.var.yi[i]] = {add(m[sc.var.yi[i]].n, mul(mul(b.vi[i], T_b), den)), 1};
                Assertion vmax_gap3 = ge(sub(yi_a(2), y_a), b.drss(v3, vmax));
                Assertion cruise_gap3 = subst_rv(
                    ge(sub(y3, b.y), b.drss(v3, vmax)),
                    std::map<VarId, RV>{{sc.var.y, {add(mul(y_a, den), mul(vmax, tc_num)), 1}},
                                        {sc.var.yi[2],
                                         {add(mul(yi_a(2), den), mul(v3, tc_num)), 1}}},
                    den);
                return aand_all({structural(2), gt(b.v, z), gt(pm21, z), le(r0, d21),
                                 le(r_a, d21), lt(v1, vmax), entry_gap3, vmax_gap3, cruise_gap3,
                                 subst_rv(merge_front_target(), m, den)});
            }
            default: break;
        }
        throw UnknownLabel("1111 variant " + std::to_string(variant));
    }

    Assertion pre_1211(int variant) {
        Term v1 = b.vi[0], v3 = b.vi[2], y1 = b.yi[0], y3 = b.yi[2];
        Term vmin = num(p.v_min);
        Assertion entry_gap3 = gap_ge(b, y3, v3, b.y, b.v);
        Assertion target = core_121().all();
        // state after braking down to the legal minimum
        Term T_b = div_const(sub(b.v, vmin), p.b_min);
        std::map<VarId, Term> brake;
        brake[sc.var.v] = vmin;
        brake[sc.var.y] = add(b.y, div_const(sub(mul(b.v, b.v), mul(vmin, vmin)), 2 * p.b_min));
        for (int i = 0; i < 3; ++i) brake[sc.var.yi[i]] = add(b.yi[i], mul(b.vi[i], T_b));
        Term gap_b = sub(brake[sc.var.yi[0]], brake[sc.var.y]);
        Term d1m = b.drss(v1, vmin);
        Assertion common =
            aand_all({structural(2), ge(b.v, vmin), le(b.v, num(p.v_max)), entry_gap3});

        if (variant == 2) {
            return aand_all({common, gt(gap_b, z), ge(gap_b, d1m), subst_plain(target, brake)});
        }
        if (variant == 1) {
            Assertion skip_case =
                implies(ge(gap_b, d1m), aand(gt(gap_b, z), subst_plain(target, brake)));
            // the cruise closes the gap at rate v1 - vmin and stops exactly at
            // the required distance, which must be positive for strictness
            Term den = sub(v1, vmin);
            Term pm1m = b.drss_pm(v1, vmin);
            Term tc_num = sub(pm1m, gap_b);  // cruise time times den
            std::map<VarId, RV> m;
            m[sc.var.v] = {vmin, 0};
            m[sc.var.y] = {add(mul(brake[sc.var.y], den), mul(vmin, tc_num)), 1};
            for (int i = 0; i < 3; ++i)
                m[sc.var.yi[i]] = {add(mul(brake[sc.var.yi[i]], den), mul(b.vi[i], tc_num)), 1};
            Assertion cruise_case =
                implies(lt(gap_b, d1m),
                        aand_all({gt(pm1m, z), lt(vmin, v1), subst_rv(target, m, den)}));
            return aand_all({common, skip_case, cruise_case});
        }
        throw UnknownLabel("1211 variant " + std::to_string(variant));
    }
};

}  // namespace

Assertion precondition(const Scenario& sc, const std::string& w, const std::string& u) {
    PreBuilder pb(sc);
    if (w == "1" && u == "1") return aand(pb.structural(6), pb.core_1().all());
    if (w == "11" && u == "11") return aand(pb.structural(4), pb.core_11().all());
    if (w == "12" && u == "11") return aand(pb.structural(4), pb.core_12().all());
    if (w == "111" && u == "111") return aand(pb.structural(2), pb.core_111().all());
    if (w == "121" && u == "111") return aand(pb.structural(2), pb.core_121().all());
    if (w == "1111" && u.size() == 4 && u.substr(0, 3) == "111")
        return pb.pre_1111(u[3] - '0');
    if (w == "1211" && (u == "1111" || u == "1112")) return pb.pre_1211(u[3] - '0');
    throw UnknownLabel(w + "," + u);
}

// ------------------------------------------------------------------ catalogue

namespace {

std::string parent_label(const std::string& w) {
    return w.size() <= 1 ? std::string() : w.substr(0, w.size() - 1);
}

Program chain_program(const Scenario& sc, const std::string& w, const std::string& u) {
    std::vector<Program> stages;
    std::string label = w;
    std::string idx = u;
    while (!label.empty()) {
        stages.push_back(proper_response(sc, label, idx.back() - '0'));
        label = parent_label(label);
        idx.pop_back();
    }
    return pseq(std::move(stages));
}

}  // namespace

const RssRule& RuleCatalogue::rule(const std::string& w, const std::string& u) const {
    for (const RssRule& r : rules)
        if (r.w == w && r.u == u) return r;
    throw UnknownLabel(w + "," + u);
}

RuleCatalogue build_catalogue(const RssParams& p) {
    RuleCatalogue cat{scenario(p), {}, {}};
    cat.tree = subscenario_tree(cat.sc);
    struct Row {
        const char* w;
        const char* u;
        Priority pr;
        const char* note;
    };
    const Row rows[] = {
        {"1", "1", Priority::High,
         "printed closed form: cruise until the braking envelope binds, then stop"},
        {"11", "11", Priority::High,
         "printed core plus derived conjuncts: strict ordering around the gap, no stall "
         "through the change, and the rear vehicle stays behind for the whole change"},
        {"12", "11", Priority::Low,
         "derived by the same backward analysis as the merge-ahead change"},
        {"111", "111", Priority::High,
         "derived: lane-1 leader gap checked at the brake onset, chained through both changes"},
        {"121", "111", Priority::Low, "derived: merge-behind counterpart"},
        {"1111", "1111", Priority::High,
         "derived with the peak-speed radical eliminated; applies when a positive rear "
         "envelope must be opened by accelerating"},
        {"1111", "1112", Priority::High,
         "derived: speed-limited variant; cruise time appears through a positive multiplier"},
        {"1111", "1113", Priority::High, "derived: plain acceleration to the leader speed"},
        {"1111", "1114", Priority::High, "derived: plain braking to the leader speed"},
        {"1211", "1111", Priority::Low,
         "derived: brake to the minimum then let the gap open; requires a positive envelope "
         "or an already-sufficient gap"},
        {"1211", "1112", Priority::Low, "derived: braking alone already opens the gap"},
    };
    for (const Row& r : rows) {
        RssRule rule;
        rule.w = r.w;
        rule.u = r.u;
        rule.pre = precondition(cat.sc, r.w, r.u);
        rule.response = chain_program(cat.sc, r.w, r.u);
        rule.priority = r.pr;
        rule.note = r.note;
        cat.rules.push_back(std::move(rule));
    }
    return cat;
}

GlobalRule global_rule(const RuleCatalogue& cat) {
    std::vector<Assertion> pres;
    std::vector<std::pair<Assertion, Program>> cases;
    for (const RssRule& r : cat.rules) {
        pres.push_back(r.pre);
        cases.emplace_back(r.pre, r.response);
    }
    return {aor_all(pres), pcase(std::move(cases))};
}

std::string print_catalogue(const RuleCatalogue& cat) {
    std::ostringstream os;
    os << "catalogue {\n";
    for (const RssRule& r : cat.rules) {
        os << "  rule \"" << r.w << "\" \"" << r.u << "\" "
           << (r.priority == Priority::High ? "high" : "low") << " {\n";
        os << "    note \"" << r.note << "\"\n";
        os << "    pre { " << to_string(r.pre, *cat.sc.vocab) << " }\n";
        os << "    response {\n" << to_string(r.response, *cat.sc.vocab, 3) << "\n    }\n";
        os << "  }\n";
    }
    os << "}\n";
    return os.str();
}

RuleCatalogue parse_catalogue(const std::string& text, const RssParams& p) {
    RuleCatalogue cat{scenario(p), {}, {}};
    cat.tree = subscenario_tree(cat.sc);
    Parser ps(text, cat.sc.vocab);
    ps.expect("catalogue");
    ps.expect("{");
    while (!ps.peek_is("}")) {
        ps.expect("rule");
        RssRule r;
        r.w = ps.expect_string();
        r.u = ps.expect_string();
        if (ps.accept("high"))
            r.priority = Priority::High;
        else if (ps.accept("low"))
            r.priority = Priority::Low;
        else
            ps.fail("expected priority");
        ps.expect("{");
        while (!ps.peek_is("}")) {
            if (ps.accept("note")) {
                r.note = ps.expect_string();
            } else if (ps.accept("pre")) {
                ps.expect("{");
                r.pre = ps.parse_assertion();
                ps.expect("}");
            } else if (ps.accept("response")) {
                r.response = ps.parse_block();
            } else {
                ps.fail("unknown rule field");
            }
        }
        ps.expect("}");
        if (!r.pre || !r.response) ps.fail("rule missing pre or response");
        cat.rules.push_back(std::move(r));
    }
    ps.expect("}");
    return cat;
}

RuleCatalogue load_catalogue(const std::string& path, const RssParams& p) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open catalogue file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_catalogue(ss.str(), p);
}

// ---------------------------------------------------------------- misc

Box physical_box(const Scenario& sc) {
    const RssParams& p = sc.params;
    Box box;
    box.set(sc.var.y, {-50, 500});
    box.set(sc.var.v, {0, p.v_max_d()});
    box.set(sc.var.a, {-p.b_min_d(), p.a_max_d()});
    box.set(sc.var.l, {1, 3});
    for (int i = 0; i < 3; ++i) {
        box.set(sc.var.yi[i], {-50, 500});
        box.set(sc.var.vi[i], {0, p.v_max_d()});
        box.set(sc.var.ai[i], {-p.b_min_d(), p.a_max_d()});
        box.set(sc.var.li[i], {1, 3});
    }
    box.set(sc.var.y_tgt, {-50, 500});
    box.set(sc.var.t, {0, p.t_lc_d()});
    return box;
}

RunOptions scenario_run_options(const Scenario& sc) {
    RunOptions opts;
    for (int i = 0; i < 3; ++i)
        opts.pov_augment.push_back({sc.var.yi[i], sc.var.vi[i], sc.var.ai[i]});
    return opts;
}

bool satisfies_tol(const Store& s, const Assertion& a, double atol) {
    switch (a->kind) {
        case AssertKind::True: return true;
        case AssertKind::Cmp: {
            double l = eval(a->lhs, s), r = eval(a->rhs, s);
            switch (a->op) {
                case CmpOp::Eq: return std::abs(l - r) <= atol;
                case CmpOp::Le: return l <= r + atol;
                case CmpOp::Lt: return l < r + atol;
                case CmpOp::Ne: return l != r;
            }
            return false;
        }
        case AssertKind::And: return satisfies_tol(s, a->a, atol) && satisfies_tol(s, a->b, atol);
        case AssertKind::Or: return satisfies_tol(s, a->a, atol) || satisfies_tol(s, a->b, atol);
        case AssertKind::Not: return !satisfies_tol(s, a->a, -atol);
        case AssertKind::Implies:
            return !satisfies_tol(s, a->a, -atol) || satisfies_tol(s, a->b, atol);
    }
    throw std::logic_error("bad assertion kind");
}

// ------------------------------------------------------------- stage-1 proof

ProofTree stage1_proof(const Scenario& sc, bool weaken_terminator) {
    Bld b(sc);
    const RssParams& p = sc.params;
    Term z = num(0);
    Term F0 = b.brake_margin();

    // context rows that the flow leaves untouched
    std::vector<InvariantRow> ctx_rows;
    auto row = [&](Term e, InvRel r) { ctx_rows.push_back({std::move(e), r}); };
    row(sub(b.l, num(3)), InvRel::Eq);
    row(sub(num(p.v_max), b.v), InvRel::Ge);
    for (int i = 0; i < 3; ++i) {
        row(sub(b.vi[i], num(p.v_min)), InvRel::Ge);
        row(sub(num(p.v_max), b.vi[i]), InvRel::Ge);
        row(b.ai[i], InvRel::Eq);
    }
    row(sub(b.li[0], num(2)), InvRel::Eq);
    row(sub(b.li[1], num(2)), InvRel::Eq);
    row(sub(b.li[2], num(1)), InvRel::Eq);
    row(sub(b.yi[1], b.yi[0]), InvRel::Gt);
    row(add(b.a, num(p.b_min)), InvRel::Ge);
    row(sub(num(p.a_max), b.a), InvRel::Ge);

    auto dwh_post = [&](const std::vector<VariantRow>& vars) {
        std::vector<Assertion> posts;
        for (std::size_t i = 0; i < vars.size(); ++i) {
            std::vector<Assertion> conj{eq(vars[i].variant, z)};
            for (std::size_t j = 0; j < vars.size(); ++j)
                if (j != i) conj.push_back(ge(vars[j].variant, z));
            posts.push_back(aand_all(conj));
        }
        return aor_all(posts);
    };
    auto dwh_safety = [&](const std::vector<InvariantRow>& invs,
                          const std::vector<VariantRow>& vars) {
        std::vector<Assertion> saf;
        for (auto& r2 : invs)
            saf.push_back(r2.rel == InvRel::Eq   ? eq(r2.e, z)
                          : r2.rel == InvRel::Gt ? gt(r2.e, z)
                                                 : ge(r2.e, z));
        for (auto& v2 : vars) saf.push_back(ge(v2.variant, z));
        return aand_all(saf);
    };
    auto dwh = [&](Assertion pre, Program prog, std::vector<InvariantRow> invs,
                   std::vector<VariantRow> vars) {
        ProofNode n;
        n.rule = RuleName::DWhMulti;
        n.conclusion = {std::move(pre), std::move(prog), dwh_post(vars), dwh_safety(invs, vars)};
        n.invariants = std::move(invs);
        n.variants = std::move(vars);
        return make_proof_node(std::move(n));
    };
    auto limp = [&](Assertion pre, Assertion post, Assertion safety, ProofTree prem) {
        ProofNode n;
        n.rule = RuleName::LImp;
        n.conclusion = {std::move(pre), prem->conclusion.program, std::move(post),
                        std::move(safety)};
        n.premises.push_back(std::move(prem));
        return make_proof_node(std::move(n));
    };

    Assertion ctx = aand_all({sc.env, eq(b.l, num(3)), b.a_bounds()});
    Assertion pre_cruise = aand_all({ctx, gt(b.v, z), le(b.v, num(p.v_max)), ge(F0, z)});
    Assertion mid = aand_all({ctx, gt(b.v, z), le(b.v, num(p.v_max)), eq(F0, z)});
    Assertion post = aand_all({ctx, eq(b.v, z), eq(b.y, b.ytgt)});
    Assertion safety = aand_all({ctx, le(z, b.v), le(b.v, num(p.v_max)), le(b.y, b.ytgt)});

    // cruise with the constant substituted, as in the printed derivation
    Dynamics cruise{{{sc.var.y, var(sc.var.v)}, {sc.var.v, z}}};
    Dynamics brake{{{sc.var.y, var(sc.var.v)}, {sc.var.v, num(-p.b_min)}}};
    Program prog_cruise = pdwhile(gt(F0, z), cruise);
    Program prog_brake = pdwhile(gt(b.v, z), brake);

    std::vector<InvariantRow> inv1 = ctx_rows;
    inv1.insert(inv1.begin(), {b.v, InvRel::Gt});
    Term ter = weaken_terminator ? div_const(sub(z, b.v), 2) : sub(z, b.v);
    ProofTree n1 = dwh(pre_cruise, prog_cruise, inv1, {{F0, ter}});
    ProofTree n2 = limp(pre_cruise, mid, safety, n1);

    std::vector<InvariantRow> inv3 = ctx_rows;
    inv3.insert(inv3.begin(), {F0, InvRel::Eq});
    ProofTree n3 = dwh(mid, prog_brake, inv3, {{b.v, num(-p.b_min)}});
    ProofTree n4 = limp(mid, post, safety, n3);

    ProofNode seq;
    seq.rule = RuleName::Seq;
    seq.conclusion = {pre_cruise, pseq(prog_cruise, prog_brake), post, safety};
    seq.premises = {n2, n4};
    ProofTree n5 = make_proof_node(std::move(seq));

    Assertion safe1env1 =
        aand(aand_all({eq(b.l, num(3)), b.v_bounds(), b.a_bounds()}), sc.env);
    return limp(pre_cruise, aand(eq(b.y, b.ytgt), eq(b.v, z)), safe1env1, n5);
}

}  // namespace hhl::pullover
