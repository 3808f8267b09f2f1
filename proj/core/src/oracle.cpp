#include "hhl/oracle.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <unordered_map>

namespace hhl {

namespace {

// A branch constraint l op r with op in {Le, Lt, Eq}; Ne is split away.
struct Atom {
    Term l, r;
    CmpOp op;
};

bool sat_atom(const Atom& a, const Store& s) {
    double l = eval(a.l, s), r = eval(a.r, s);
    switch (a.op) {
        case CmpOp::Le: return l <= r;
        case CmpOp::Lt: return l < r;
        case CmpOp::Eq: return l == r;
        default: return l != r;
    }
}

std::size_t term_size(const Term& t) {
    switch (t->kind) {
        case TermKind::Num:
        case TermKind::Var: return 1;
        case TermKind::DivConst: return 1 + term_size(t->a);
        case TermKind::Sel:
            return 1 + term_size(t->a) + term_size(t->b) + term_size(t->c) + term_size(t->d);
        default: return 1 + term_size(t->a) + term_size(t->b);
    }
}

bool find_maxsel(const Term& t, Term& out) {
    switch (t->kind) {
        case TermKind::Num:
        case TermKind::Var: return false;
        case TermKind::DivConst: return find_maxsel(t->a, out);
        case TermKind::Max:
        case TermKind::Sel:
            // innermost first so selector conditions come out max-free
            if (find_maxsel(t->a, out)) return true;
            if (find_maxsel(t->b, out)) return true;
            if (t->kind == TermKind::Sel) {
                if (find_maxsel(t->c, out)) return true;
                if (find_maxsel(t->d, out)) return true;
            }
            out = t;
            return true;
        default: return find_maxsel(t->a, out) || find_maxsel(t->b, out);
    }
}

Term replace_sub(const Term& t, const Term& what, const Term& with) {
    if (term_eq(t, what)) return with;
    switch (t->kind) {
        case TermKind::Num:
        case TermKind::Var: return t;
        case TermKind::Add: return add(replace_sub(t->a, what, with), replace_sub(t->b, what, with));
        case TermKind::Sub: return sub(replace_sub(t->a, what, with), replace_sub(t->b, what, with));
        case TermKind::Mul: return mul(replace_sub(t->a, what, with), replace_sub(t->b, what, with));
        case TermKind::DivConst: return div_const(replace_sub(t->a, what, with), t->num);
        case TermKind::Max: return tmax(replace_sub(t->a, what, with), replace_sub(t->b, what, with));
        case TermKind::Sel:
            return sel(replace_sub(t->a, what, with), replace_sub(t->b, what, with),
                       replace_sub(t->c, what, with), replace_sub(t->d, what, with));
    }
    throw std::logic_error("bad term kind");
}

// ------------------------------------------------------------- HC4 contractor

using NodeBounds = std::unordered_map<const TermNode*, Interval>;

Interval hc4_forward(const Term& t, const Box& box, NodeBounds& nb) {
    Interval r;
    switch (t->kind) {
        case TermKind::Num: r = from_rational(t->num); break;
        case TermKind::Var: r = box.get(t->var); break;
        case TermKind::Add: r = iadd(hc4_forward(t->a, box, nb), hc4_forward(t->b, box, nb)); break;
        case TermKind::Sub: r = isub(hc4_forward(t->a, box, nb), hc4_forward(t->b, box, nb)); break;
        case TermKind::Mul: r = imul(hc4_forward(t->a, box, nb), hc4_forward(t->b, box, nb)); break;
        case TermKind::DivConst: {
            Interval q = from_rational(t->num);
            r = idiv_const(hc4_forward(t->a, box, nb), q.lo, q.hi);
            break;
        }
        default: r = eval_interval(t, box); break;  // max/sel removed before HC4
    }
    nb[t.get()] = r;
    return r;
}

bool hc4_backward(const Term& t, Interval want, Box& box, const NodeBounds& nb) {
    Interval cur = nb.at(t.get());
    Interval tight = cur.intersect(want);
    if (tight.empty()) return false;
    switch (t->kind) {
        case TermKind::Num: return true;
        case TermKind::Var: {
            Interval nv = box.get(t->var).intersect(tight);
            if (nv.empty()) return false;
            box.set(t->var, nv);
            return true;
        }
        case TermKind::Add: {
            Interval a = nb.at(t->a.get()), b = nb.at(t->b.get());
            return hc4_backward(t->a, isub(tight, b), box, nb) &&
                   hc4_backward(t->b, isub(tight, a), box, nb);
        }
        case TermKind::Sub: {
            Interval a = nb.at(t->a.get()), b = nb.at(t->b.get());
            return hc4_backward(t->a, iadd(tight, b), box, nb) &&
                   hc4_backward(t->b, isub(a, tight), box, nb);
        }
        case TermKind::Mul: {
            Interval a = nb.at(t->a.get()), b = nb.at(t->b.get());
            auto inv = [](Interval prod, Interval co) -> std::optional<Interval> {
                if (co.lo > 0 || co.hi < 0) {
                    double c[4] = {prod.lo / co.lo, prod.lo / co.hi, prod.hi / co.lo,
                                   prod.hi / co.hi};
                    double lo = c[0], hi = c[0];
                    for (double v : c) {
                        if (std::isnan(v)) continue;
                        lo = std::min(lo, v);
                        hi = std::max(hi, v);
                    }
                    double inf = std::numeric_limits<double>::infinity();
                    return Interval{std::isfinite(lo) ? std::nextafter(lo, -inf) : lo,
                                    std::isfinite(hi) ? std::nextafter(hi, inf) : hi};
                }
                return std::nullopt;
            };
            if (auto na = inv(tight, b))
                if (!hc4_backward(t->a, *na, box, nb)) return false;
            if (auto nb2 = inv(tight, a))
                if (!hc4_backward(t->b, *nb2, box, nb)) return false;
            return true;
        }
        case TermKind::DivConst: {
            Interval q = from_rational(t->num);
            return hc4_backward(t->a, imul(tight, q), box, nb);
        }
        default: return true;
    }
}

bool hc4_revise(const Atom& at, Box& box) {
    NodeBounds nb;
    Interval l = hc4_forward(at.l, box, nb);
    Interval r = hc4_forward(at.r, box, nb);
    const double inf = std::numeric_limits<double>::infinity();
    Interval wl = l, wr = r;
    switch (at.op) {
        case CmpOp::Le:
        case CmpOp::Lt:
            if (at.op == CmpOp::Lt && l.lo >= r.hi) return false;
            wl = l.intersect({-inf, r.hi});
            wr = r.intersect({l.lo, inf});
            break;
        case CmpOp::Eq:
            wl = wr = l.intersect(r);
            break;
        default: break;
    }
    if (wl.empty() || wr.empty()) return false;
    return hc4_backward(at.l, wl, box, nb) && hc4_backward(at.r, wr, box, nb);
}

// --------------------------------------------------------------- poly algebra

struct PAtom {
    Poly p;  // constraint p op 0, op in {Le, Lt, Eq}
    CmpOp op;
};

std::string poly_key(const Poly& p) {
    std::string key;
    for (auto& [m, c] : p.terms()) {
        for (auto& [v, e] : m) key += std::to_string(v) + "^" + std::to_string(e) + ".";
        key += c.str() + ";";
    }
    return key;
}

Rational binom(unsigned n, unsigned k) {
    Rational r = 1;
    for (unsigned i = 0; i < k; ++i) r = r * Rational(n - i) / Rational(i + 1);
    return r;
}

// Exact Bernstein lower bound of p over the box (doubles convert exactly to
// rationals). Returns nullopt when the polynomial is too big to be worth it.
std::optional<Rational> bernstein_lo(const Poly& p, const Box& box) {
    std::vector<VarId> vs;
    p.collect_vars(vs);
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    if (vs.size() > 5 || p.terms().size() > 80) return std::nullopt;
    unsigned degsum = 0;
    for (VarId v : vs) degsum += p.degree_in(v);
    if (degsum > 10) return std::nullopt;

    std::function<Rational(const Poly&, std::size_t)> rec = [&](const Poly& q,
                                                                std::size_t i) -> Rational {
        if (q.is_constant()) return q.constant_value();
        if (i >= vs.size()) return q.constant_value();
        VarId v = vs[i];
        unsigned d = q.degree_in(v);
        if (d == 0) return rec(q, i + 1);
        Interval iv = box.get(v);
        if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) return Rational(-1);
        Rational lo(iv.lo), w = Rational(iv.hi) - Rational(iv.lo);
        std::vector<Poly> a = q.coefficients_in(v);
        // substitute v = lo + w*u and collect powers of u
        std::vector<Poly> au(d + 1);
        for (unsigned j = 0; j <= d; ++j) {
            Rational lp = 1;
            for (unsigned i2 = 0; i2 <= j; ++i2) {
                // contribution of a_j to u^i2: C(j,i2) lo^(j-i2) w^i2
                Rational c = binom(j, i2);
                Rational lo_pow = 1, w_pow = 1;
                for (unsigned k = 0; k < j - i2; ++k) lo_pow *= lo;
                for (unsigned k = 0; k < i2; ++k) w_pow *= w;
                au[i2] = au[i2] + a[j].scaled(c * lo_pow * w_pow);
            }
            (void)lp;
        }
        // Bernstein coefficients over u in [0,1]
        Rational best;
        bool first = true;
        for (unsigned i2 = 0; i2 <= d; ++i2) {
            Poly b;
            for (unsigned j = 0; j <= i2; ++j)
                b = b + au[j].scaled(binom(i2, j) / binom(d, j));
            Rational cand = rec(b, i + 1);
            if (first || cand < best) {
                best = cand;
                first = false;
            }
        }
        return best;
    };
    return rec(p, 0);
}

// polynomial with per-monomial double coefficient enclosures, so leaf-level
// interval tests avoid repeated rational conversions
struct CPoly {
    std::vector<std::pair<Monomial, Interval>> monos;

    static CPoly compile(const Poly& p) {
        CPoly c;
        for (auto& [m, q] : p.terms()) c.monos.emplace_back(m, from_rational(q));
        return c;
    }
    Interval eval(const Box& box) const {
        Interval acc = Interval::point(0);
        for (auto& [m, cf] : monos) {
            Interval t = cf;
            for (auto& [v, e] : m) t = imul(t, ipow(box.get(v), e));
            acc = iadd(acc, t);
        }
        return acc;
    }
};

struct PreparedBranch {
    std::vector<Atom> atoms;    // term atoms for HC4 and witness checks
    std::vector<PAtom> patoms;  // polynomial atoms, squares and derived combinations
    std::vector<CPoly> compiled;
    bool contradictory = false;
};

Atom normalize_atom(Atom a) {
    for (int guard = 0; guard < 8; ++guard) {
        if (a.l->kind == TermKind::Sub && a.r->kind == TermKind::Num) {
            Term nl = a.l->a;
            Term nr = add(a.l->b, a.r);
            a.l = nl;
            a.r = nr;
            continue;
        }
        if (a.r->kind == TermKind::Sub && a.l->kind == TermKind::Num) {
            Term nl = add(a.r->b, a.l);
            Term nr = a.r->a;
            a.l = nl;
            a.r = nr;
            continue;
        }
        break;
    }
    return a;
}

PreparedBranch prepare_branch(const std::vector<Atom>& atoms_in, const Box& box) {
    PreparedBranch br;
    for (const Atom& a0 : atoms_in) br.atoms.push_back(normalize_atom(a0));

    // squared comparisons for atoms whose sides are nonnegative over the box
    std::size_t base = br.atoms.size();
    std::vector<Atom> squared;
    for (std::size_t i = 0; i < base; ++i) {
        const Atom& a = br.atoms[i];
        if (term_size(a.l) + term_size(a.r) > 48) continue;
        if (eval_interval(a.l, box).lo >= 0 && eval_interval(a.r, box).lo >= 0)
            squared.push_back({mul(a.l, a.l), mul(a.r, a.r), a.op});
    }

    auto push_poly = [&](const Atom& a) {
        auto pl = to_poly(a.l), pr = to_poly(a.r);
        if (!pl || !pr) return;
        br.patoms.push_back({*pl - *pr, a.op});
    };
    for (const Atom& a : br.atoms) push_poly(a);
    for (const Atom& a : squared) push_poly(a);

    // eliminate variables pinned by linear equations with constant coefficient
    for (int round = 0; round < 8; ++round) {
        int src = -1;
        VarId var = 0;
        Poly value;
        for (std::size_t i = 0; i < br.patoms.size() && src < 0; ++i) {
            if (br.patoms[i].op != CmpOp::Eq) continue;
            std::vector<VarId> vs;
            br.patoms[i].p.collect_vars(vs);
            std::sort(vs.begin(), vs.end());
            vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
            for (VarId v : vs) {
                if (br.patoms[i].p.degree_in(v) != 1) continue;
                auto coeffs = br.patoms[i].p.coefficients_in(v);
                if (!coeffs[1].is_constant()) continue;
                Rational c1 = coeffs[1].constant_value();
                value = coeffs[0].scaled(Rational(-1) / c1);
                var = v;
                src = static_cast<int>(i);
                break;
            }
        }
        if (src < 0) break;
        Interval bv = box.get(var);
        for (auto& pa : br.patoms) pa.p = pa.p.substituted(var, value);
        // preserve the box bounds of the eliminated variable
        if (std::isfinite(bv.hi)) br.patoms.push_back({value - Poly::constant(Rational(bv.hi)), CmpOp::Le});
        if (std::isfinite(bv.lo)) br.patoms.push_back({Poly::constant(Rational(bv.lo)) - value, CmpOp::Le});
    }

    // same-polynomial contradiction bookkeeping; every asserted or derived
    // atom flows through here
    struct Entry {
        bool lt = false, le = false, eq = false, gt = false, ge = false;
    };
    std::map<std::string, Entry> seen;
    auto note_atom = [&](const PAtom& pa) -> bool {  // true when contradictory
        Poly p = pa.p;
        if (p.is_constant()) {
            Rational c = p.constant_value();
            return (pa.op == CmpOp::Le && c > 0) || (pa.op == CmpOp::Lt && c >= 0) ||
                   (pa.op == CmpOp::Eq && c != 0);
        }
        bool flipped = p.normalize_primitive();
        Entry& e = seen[poly_key(p)];
        switch (pa.op) {
            case CmpOp::Le: (flipped ? e.ge : e.le) = true; break;
            case CmpOp::Lt: (flipped ? e.gt : e.lt) = true; break;
            case CmpOp::Eq: e.eq = true; break;
            default: break;
        }
        return (e.lt && (e.eq || e.ge || e.gt)) || (e.gt && (e.eq || e.le)) ||
               (e.eq && (e.lt || e.gt));
    };
    for (auto& pa : br.patoms)
        if (note_atom(pa)) {
            br.contradictory = true;
            return br;
        }

    // derived positive combinations p_i + lam p_j; each is itself a valid
    // nonpositivity atom of the branch, so chained contradictions (three-way
    // and deeper) fall out of re-scanning them
    std::size_t base_atoms = br.patoms.size();
    for (std::size_t i = 0; i < base_atoms && br.patoms.size() < 400; ++i) {
        if (br.patoms[i].p.is_constant()) continue;
        if (br.patoms[i].op != CmpOp::Le && br.patoms[i].op != CmpOp::Lt) continue;
        for (std::size_t j = 0; j < base_atoms; ++j) {
            if (i == j || br.patoms[j].p.is_constant()) continue;
            bool j_neg = br.patoms[j].op == CmpOp::Le || br.patoms[j].op == CmpOp::Lt;
            bool j_eq = br.patoms[j].op == CmpOp::Eq;
            if (!j_neg && !j_eq) continue;
            std::vector<Rational> cands;
            for (auto& [mi, ci] : br.patoms[i].p.terms()) {
                auto it = br.patoms[j].p.terms().find(mi);
                if (it == br.patoms[j].p.terms().end()) continue;
                Rational lam = -ci / it->second;
                if (lam > 0 || (j_eq && lam != 0)) cands.push_back(lam);
            }
            std::sort(cands.begin(), cands.end());
            cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
            for (const Rational& lam : cands) {
                if (lam < 0 && !j_eq) continue;
                bool strict =
                    br.patoms[i].op == CmpOp::Lt || (!j_eq && br.patoms[j].op == CmpOp::Lt);
                PAtom derived{br.patoms[i].p + br.patoms[j].p.scaled(lam),
                              strict ? CmpOp::Lt : CmpOp::Le};
                if (derived.p.is_zero()) {
                    if (strict) {
                        br.contradictory = true;
                        return br;
                    }
                    continue;
                }
                if (note_atom(derived)) {
                    br.contradictory = true;
                    return br;
                }
                br.patoms.push_back(std::move(derived));
            }
        }
    }
    for (auto& pa : br.patoms) br.compiled.push_back(CPoly::compile(pa.p));
    return br;
}

struct SolveStats {
    bool unknown = false;
    int max_depth_used = 0;
    std::optional<Store> witness;
};

class Refuter {
public:
    Refuter(VocabPtr vocab, const OracleConfig& cfg, std::uint64_t salt, int max_depth,
            Assertion negated_target)
        : vocab_(std::move(vocab)), cfg_(cfg), rng_(cfg.seed ^ salt), max_depth_(max_depth),
          target_(std::move(negated_target)) {}

    bool run(SolveStats& st) {
        std::vector<std::pair<Assertion, bool>> todo{{target_, true}};
        std::vector<Atom> acc;
        bool refuted = solve(todo, acc, st);
        return refuted && !st.unknown && !st.witness;
    }

private:
    VocabPtr vocab_;
    const OracleConfig& cfg_;
    std::mt19937_64 rng_;
    int max_depth_;
    Assertion target_;

    bool solve(std::vector<std::pair<Assertion, bool>> todo, std::vector<Atom>& acc,
               SolveStats& st) {
        while (!todo.empty()) {
            if (st.witness) return false;
            auto [f, pos] = todo.back();
            todo.pop_back();
            switch (f->kind) {
                case AssertKind::True:
                    if (!pos) return true;
                    continue;
                case AssertKind::Not:
                    todo.emplace_back(f->a, !pos);
                    continue;
                case AssertKind::And:
                case AssertKind::Or: {
                    bool conj = (f->kind == AssertKind::And) == pos;
                    if (conj) {
                        todo.emplace_back(f->a, pos);
                        todo.emplace_back(f->b, pos);
                        continue;
                    }
                    return branch2(f->a, pos, f->b, pos, todo, acc, st);
                }
                case AssertKind::Implies:
                    if (!pos) {
                        todo.emplace_back(f->a, true);
                        todo.emplace_back(f->b, false);
                        continue;
                    }
                    return branch2(f->a, false, f->b, true, todo, acc, st);
                case AssertKind::Cmp: {
                    CmpOp op = f->op;
                    Term l = f->lhs, r = f->rhs;
                    if (!pos) {
                        switch (op) {
                            case CmpOp::Le: op = CmpOp::Lt; std::swap(l, r); break;
                            case CmpOp::Lt: op = CmpOp::Le; std::swap(l, r); break;
                            case CmpOp::Eq: op = CmpOp::Ne; break;
                            case CmpOp::Ne: op = CmpOp::Eq; break;
                        }
                    }
                    if (op == CmpOp::Ne) {
                        std::size_t n = acc.size();
                        acc.push_back({l, r, CmpOp::Lt});
                        bool ok1 = solve(todo, acc, st);
                        acc.resize(n);
                        if (st.witness) return false;
                        acc.push_back({r, l, CmpOp::Lt});
                        bool ok2 = solve(todo, acc, st);
                        acc.resize(n);
                        return ok1 && ok2;
                    }
                    acc.push_back({l, r, op});
                    bool ok = solve(todo, acc, st);
                    acc.pop_back();
                    return ok;
                }
            }
        }
        return leaf(acc, st);
    }

    bool branch2(const Assertion& x, bool px, const Assertion& y, bool py,
                 const std::vector<std::pair<Assertion, bool>>& todo, std::vector<Atom>& acc,
                 SolveStats& st) {
        auto t1 = todo;
        t1.emplace_back(x, px);
        bool ok1 = solve(std::move(t1), acc, st);
        if (st.witness) return false;
        auto t2 = todo;
        t2.emplace_back(y, py);
        bool ok2 = solve(std::move(t2), acc, st);
        return ok1 && ok2;
    }

    bool leaf(std::vector<Atom>& atoms, SolveStats& st) {
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            for (const Term& side : {atoms[i].l, atoms[i].r}) {
                Term ms;
                if (!find_maxsel(side, ms)) continue;
                std::vector<Atom> hi = substituted_atoms(atoms, ms, true);
                bool ok1 = leaf(hi, st);
                if (st.witness) return false;
                std::vector<Atom> lo = substituted_atoms(atoms, ms, false);
                bool ok2 = leaf(lo, st);
                return ok1 && ok2;
            }
        }
        PreparedBranch br = prepare_branch(atoms, cfg_.box);
        if (br.contradictory) return true;
        return refute_leaf(br, cfg_.box, max_depth_, st);
    }

    std::vector<Atom> substituted_atoms(const std::vector<Atom>& atoms, const Term& ms,
                                        bool first_branch) {
        Term repl = ms->kind == TermKind::Max ? (first_branch ? ms->a : ms->b)
                                              : (first_branch ? ms->c : ms->d);
        std::vector<Atom> out;
        if (first_branch)
            out.push_back({ms->b, ms->a, CmpOp::Le});  // a >= b
        else
            out.push_back({ms->a, ms->b, ms->kind == TermKind::Sel ? CmpOp::Lt : CmpOp::Le});
        for (const Atom& a : atoms)
            out.push_back({replace_sub(a.l, ms, repl), replace_sub(a.r, ms, repl), a.op});
        return out;
    }

    Store point_store(const Box& box, bool midpoint) {
        Store s(vocab_);
        for (auto& [v, iv] : box.dims) {
            double lo = std::max(iv.lo, -1e12), hi = std::min(iv.hi, 1e12);
            if (midpoint || lo == hi) {
                s.set(v, lo + (hi - lo) / 2);
            } else {
                std::uniform_real_distribution<double> d(lo, hi);
                s.set(v, d(rng_));
            }
        }
        return s;
    }

    bool refute_leaf(const PreparedBranch& br, Box box, int depth, SolveStats& st) {
        st.max_depth_used = std::max(st.max_depth_used, max_depth_ - depth);
        bool shallow = (max_depth_ - depth) <= 3 || depth <= 1;

        for (int round = 0; round < 3; ++round) {
            Box before = box;
            for (const Atom& a : br.atoms)
                if (!hc4_revise(a, box)) return true;
            bool changed = false;
            for (auto& [v, iv] : box.dims) {
                Interval old = before.get(v);
                if (iv.lo != old.lo || iv.hi != old.hi) changed = true;
            }
            if (!changed) break;
        }

        for (std::size_t i = 0; i < br.patoms.size(); ++i) {
            const PAtom& pa = br.patoms[i];
            Interval iv = br.compiled[i].eval(box);
            bool bad = false;
            switch (pa.op) {
                case CmpOp::Le: bad = iv.lo > 0; break;
                case CmpOp::Lt: bad = iv.lo >= 0; break;
                case CmpOp::Eq: bad = iv.lo > 0 || iv.hi < 0; break;
                default: break;
            }
            if (bad) return true;
            if (!bad && shallow && (pa.op == CmpOp::Le || pa.op == CmpOp::Lt)) {
                auto blo = bernstein_lo(pa.p, box);
                if (blo && (*blo > 0 || (pa.op == CmpOp::Lt && *blo >= 0))) return true;
            }
        }

        for (int k = 0; k < cfg_.witness_probes; ++k) {
            Store s = point_store(box, k == 0);
            bool all = true;
            for (const Atom& a : br.atoms)
                if (!sat_atom(a, s)) {
                    all = false;
                    break;
                }
            if (all && satisfies(s, target_)) {
                Box pt;
                for (auto& [v, iv] : cfg_.box.dims) pt.set(v, Interval::point(s.get(v)));
                Tri tri = eval_tri(target_, pt);
                if (tri == Tri::True || (tri == Tri::Unknown && satisfies_exact(s, target_))) {
                    st.witness = s;
                    return false;
                }
            }
        }

        if (depth <= 0) {
            st.unknown = true;
            return false;
        }

        VarId split_v = 0;
        double best = -1;
        for (auto& [v, iv] : box.dims) {
            if (iv.degenerate()) continue;
            Interval orig = cfg_.box.get(v);
            double denom = orig.width() > 0 ? orig.width() : 1;
            double w = iv.width() / denom;
            if (w > best) {
                best = w;
                split_v = v;
            }
        }
        if (best <= 0) {
            st.unknown = true;
            return false;
        }
        Interval iv = box.get(split_v);
        double mid = iv.mid();
        Box left = box, right = box;
        left.set(split_v, {iv.lo, mid});
        right.set(split_v, {mid, iv.hi});
        bool ok1 = refute_leaf(br, left, depth - 1, st);
        if (st.witness) return false;
        bool ok2 = refute_leaf(br, right, depth - 1, st);
        return ok1 && ok2;
    }
};

void check_box_coverage(const Assertion& a, const OracleConfig& cfg, const Vocabulary& vocab) {
    std::vector<VarId> vs;
    collect_vars(a, vs);
    for (VarId v : vs)
        if (!cfg.box.dims.count(v))
            throw std::invalid_argument("oracle box does not cover variable: " + vocab.name(v));
}

}  // namespace

std::optional<Store> ArithOracle::falsify(const Assertion& a) const {
    return falsify(a, cfg_.falsify_budget);
}

std::optional<Store> ArithOracle::falsify(const Assertion& a, int budget) const {
    check_box_coverage(a, cfg_, *vocab_);
    std::mt19937_64 rng(cfg_.seed ^ assertion_hash(a));
    std::vector<std::pair<VarId, Interval>> dims(cfg_.box.dims.begin(), cfg_.box.dims.end());
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    // candidates flagged by double evaluation are confirmed before being
    // returned, so cancellation noise on boundary regions cannot fake a
    // counterexample: interval evaluation settles clear violations, exact
    // rationals settle a bounded number of ambiguous ones
    int exact_budget = 24;
    for (int k = 0; k < budget; ++k) {
        Store s(vocab_);
        int mode = k % 3;
        for (auto& [v, iv] : dims) {
            double lo = std::max(iv.lo, -1e12), hi = std::min(iv.hi, 1e12);
            double x;
            if (mode == 1 && u01(rng) < 0.4) {
                x = u01(rng) < 0.5 ? lo : hi;
            } else if (mode == 2) {
                int steps = 8;
                x = lo + (hi - lo) * (static_cast<int>(u01(rng) * (steps + 1)) / double(steps));
            } else {
                x = lo + (hi - lo) * u01(rng);
            }
            s.set(v, x);
        }
        if (!satisfies(s, a)) {
            Box pt;
            for (auto& [v, iv] : dims) pt.set(v, Interval::point(s.get(v)));
            Tri tri = eval_tri(a, pt);
            if (tri == Tri::False) return s;
            if (tri == Tri::Unknown && exact_budget > 0) {
                --exact_budget;
                if (!satisfies_exact(s, a)) return s;
            }
        }
    }
    // targeted: search for a model of the negation
    SolveStats st;
    Refuter ref(vocab_, cfg_, assertion_hash(a), std::min(cfg_.max_depth, 8), anot(a));
    ref.run(st);
    if (st.witness && !satisfies_exact(*st.witness, a)) return st.witness;
    return std::nullopt;
}

std::optional<int> ArithOracle::certify(const Assertion& a) const {
    return certify(a, cfg_.max_depth);
}

std::optional<int> ArithOracle::certify(const Assertion& a, int max_depth) const {
    check_box_coverage(a, cfg_, *vocab_);
    SolveStats st;
    Refuter ref(vocab_, cfg_, assertion_hash(a), max_depth, anot(a));
    if (ref.run(st)) return st.max_depth_used;
    return std::nullopt;
}

Verdict ArithOracle::decide(const Assertion& a) const {
    check_box_coverage(a, cfg_, *vocab_);
    // one refutation pass doubles as certification and witness search
    SolveStats st;
    Refuter ref(vocab_, cfg_, assertion_hash(a), cfg_.max_depth, anot(a));
    bool refuted = ref.run(st);
    if (st.witness) return VerdictFalsified{std::move(*st.witness)};
    if (refuted) return VerdictValid{st.max_depth_used};
    if (auto w = falsify(a)) return VerdictFalsified{std::move(*w)};
    return VerdictUnknown{"not certified within depth and no counterexample found"};
}

}  // namespace hhl
