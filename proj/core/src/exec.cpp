#include "hhl/exec.hpp"

#include "hhl/poly.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace hhl {

namespace {

// ----------------------------------------------------------- flow solutions

// Univariate polynomial in flow time with double coefficients.
struct PolyT {
    std::vector<double> c;  // c[k] * t^k

    double eval(double t) const {
        double acc = 0;
        for (std::size_t k = c.size(); k-- > 0;) acc = acc * t + c[k];
        return acc;
    }
    int degree() const {
        for (std::size_t k = c.size(); k-- > 0;)
            if (c[k] != 0.0) return static_cast<int>(k);
        return -1;
    }
};

PolyT pt_const(double v) { return {{v}}; }

PolyT pt_add(const PolyT& a, const PolyT& b) {
    PolyT r;
    r.c.resize(std::max(a.c.size(), b.c.size()), 0.0);
    for (std::size_t i = 0; i < a.c.size(); ++i) r.c[i] += a.c[i];
    for (std::size_t i = 0; i < b.c.size(); ++i) r.c[i] += b.c[i];
    return r;
}

PolyT pt_sub(const PolyT& a, const PolyT& b) {
    PolyT r;
    r.c.resize(std::max(a.c.size(), b.c.size()), 0.0);
    for (std::size_t i = 0; i < a.c.size(); ++i) r.c[i] += a.c[i];
    for (std::size_t i = 0; i < b.c.size(); ++i) r.c[i] -= b.c[i];
    return r;
}

PolyT pt_mul(const PolyT& a, const PolyT& b) {
    PolyT r;
    if (a.c.empty() || b.c.empty()) return r;
    r.c.resize(a.c.size() + b.c.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c.size(); ++i)
        for (std::size_t j = 0; j < b.c.size(); ++j) r.c[i + j] += a.c[i] * b.c[j];
    return r;
}

PolyT pt_scale(const PolyT& a, double s) {
    PolyT r = a;
    for (double& v : r.c) v *= s;
    return r;
}

// real roots of p in the open interval (lo, hi)
void pt_roots(const PolyT& p, double lo, double hi, std::vector<double>& out) {
    int deg = p.degree();
    if (deg <= 0) return;
    if (deg == 1) {
        double r = -p.c[0] / p.c[1];
        if (r > lo && r < hi) out.push_back(r);
        return;
    }
    if (deg == 2) {
        double a = p.c[2], b = p.c[1], c = p.c[0];
        double disc = b * b - 4 * a * c;
        if (disc < 0) return;
        double sq = std::sqrt(disc);
        double q = -(b + (b >= 0 ? sq : -sq)) / 2;
        double r1 = q / a;
        double r2 = (q != 0) ? c / q : r1;
        for (double r : {std::min(r1, r2), std::max(r1, r2)})
            if (r > lo && r < hi) out.push_back(r);
        return;
    }
    // scan + bisection for higher degrees
    int n = 4096;
    double prev_t = lo, prev_v = p.eval(lo);
    for (int i = 1; i <= n; ++i) {
        double t = lo + (hi - lo) * i / n;
        double v = p.eval(t);
        if (prev_v == 0.0 && prev_t > lo) out.push_back(prev_t);
        if ((prev_v < 0 && v > 0) || (prev_v > 0 && v < 0)) {
            double a = prev_t, b = t;
            for (int k = 0; k < 80 && b - a > 1e-12; ++k) {
                double m = a + (b - a) / 2;
                double mv = p.eval(m);
                if ((p.eval(a) < 0) == (mv < 0))
                    a = m;
                else
                    b = m;
            }
            out.push_back(a + (b - a) / 2);
        }
        prev_t = t;
        prev_v = v;
    }
}

// piecewise polynomial over [0, T]
struct Seg {
    double lo, hi;
    PolyT p;
};
using Pw = std::vector<Seg>;

Pw pw_const(double v, double T) { return {{0.0, T, pt_const(v)}}; }
Pw pw_poly(PolyT p, double T) { return {{0.0, T, std::move(p)}}; }

template <typename F>
Pw pw_combine(const Pw& a, const Pw& b, F&& f) {
    Pw out;
    std::size_t i = 0, j = 0;
    double lo = a.front().lo;
    while (i < a.size() && j < b.size()) {
        double hi = std::min(a[i].hi, b[j].hi);
        if (hi > lo) out.push_back({lo, hi, f(a[i].p, b[j].p)});
        lo = hi;
        if (a[i].hi <= hi) ++i;
        if (j < b.size() && b[j].hi <= hi) ++j;
    }
    return out;
}

Pw pw_max_like(const Pw& a, const Pw& b, const Pw& sel_c, const Pw& sel_d, bool is_max) {
    // value is (a >= b) ? X : Y where for max X=a, Y=b and for sel X=c, Y=d
    Pw merged = pw_combine(a, b, [](const PolyT& x, const PolyT& y) { return pt_sub(x, y); });
    Pw out;
    for (const Seg& s : merged) {
        std::vector<double> cuts;
        pt_roots(s.p, s.lo, s.hi, cuts);
        cuts.push_back(s.hi);
        double lo = s.lo;
        for (double hi : cuts) {
            if (hi <= lo) continue;
            double mid = lo + (hi - lo) / 2;
            bool ge = s.p.eval(mid) >= 0;
            const Pw& src = is_max ? (ge ? a : b) : (ge ? sel_c : sel_d);
            for (const Seg& t : src) {
                double l2 = std::max(lo, t.lo), h2 = std::min(hi, t.hi);
                if (h2 > l2) out.push_back({l2, h2, t.p});
            }
            lo = hi;
        }
    }
    return out;
}

struct FlowBasis {
    // symbolic Taylor coefficient terms per flowed variable (before /k!)
    std::vector<std::pair<VarId, std::vector<Term>>> taylor;
    bool nilpotent = true;
};

FlowBasis solve_basis(const Dynamics& dyn, int max_order = 7) {
    FlowBasis fb;
    for (auto& [x, f] : dyn.odes) {
        std::vector<Term> coeffs;
        coeffs.push_back(var(x));
        Term cur = f;
        for (int k = 1; k <= max_order; ++k) {
            auto p = to_poly(cur);
            if (p && p->is_zero()) break;
            coeffs.push_back(cur);
            if (k == max_order) fb.nilpotent = false;
            cur = lie_derivative(cur, dyn);
        }
        fb.taylor.emplace_back(x, std::move(coeffs));
    }
    return fb;
}

// cache keyed by owning node pointer; dynamics of a node never change
struct BasisCache {
    std::unordered_map<const ProgNode*, std::pair<Program, FlowBasis>> map;
    const FlowBasis& get(const Program& p, const Dynamics& dyn) {
        auto it = map.find(p.get());
        if (it != map.end()) return it->second.second;
        if (map.size() > 4096) map.clear();
        auto [it2, ok] = map.emplace(p.get(), std::make_pair(p, solve_basis(dyn)));
        return it2->second.second;
    }
};

thread_local BasisCache g_basis_cache;

struct FlowEval {
    std::vector<std::pair<VarId, PolyT>> sol;

    const PolyT* find(VarId v) const {
        for (auto& [x, p] : sol)
            if (x == v) return &p;
        return nullptr;
    }
    void write(Store& s, double t) const {
        for (auto& [x, p] : sol) s.set(x, p.eval(t));
    }
};

FlowEval instantiate(const FlowBasis& fb, const Store& s) {
    FlowEval fe;
    for (auto& [x, coeffs] : fb.taylor) {
        PolyT p;
        double fact = 1;
        for (std::size_t k = 0; k < coeffs.size(); ++k) {
            if (k > 0) fact *= static_cast<double>(k);
            p.c.push_back(eval(coeffs[k], s) / fact);
        }
        fe.sol.emplace_back(x, std::move(p));
    }
    return fe;
}

Pw term_pw(const Term& t, const FlowEval& fe, const Store& s, double T) {
    switch (t->kind) {
        case TermKind::Num: return pw_const(t->num.convert_to<double>(), T);
        case TermKind::Var: {
            if (const PolyT* p = fe.find(t->var)) return pw_poly(*p, T);
            return pw_const(s.get(t->var), T);
        }
        case TermKind::Add:
            return pw_combine(term_pw(t->a, fe, s, T), term_pw(t->b, fe, s, T), pt_add);
        case TermKind::Sub:
            return pw_combine(term_pw(t->a, fe, s, T), term_pw(t->b, fe, s, T), pt_sub);
        case TermKind::Mul:
            return pw_combine(term_pw(t->a, fe, s, T), term_pw(t->b, fe, s, T), pt_mul);
        case TermKind::DivConst: {
            Pw a = term_pw(t->a, fe, s, T);
            double q = t->num.convert_to<double>();
            for (Seg& seg : a) seg.p = pt_scale(seg.p, 1.0 / q);
            return a;
        }
        case TermKind::Max: {
            Pw a = term_pw(t->a, fe, s, T), b = term_pw(t->b, fe, s, T);
            return pw_max_like(a, b, a, b, true);
        }
        case TermKind::Sel: {
            Pw a = term_pw(t->a, fe, s, T), b = term_pw(t->b, fe, s, T);
            Pw c = term_pw(t->c, fe, s, T), d = term_pw(t->d, fe, s, T);
            return pw_max_like(a, b, c, d, false);
        }
    }
    throw std::logic_error("bad term kind");
}

void collect_atoms(const Assertion& a, std::vector<const AssertNode*>& out) {
    switch (a->kind) {
        case AssertKind::True: return;
        case AssertKind::Cmp: out.push_back(a.get()); return;
        case AssertKind::Not: collect_atoms(a->a, out); return;
        default:
            collect_atoms(a->a, out);
            collect_atoms(a->b, out);
    }
}

Dynamics augment(const Dynamics& dyn, const RunOptions& opts) {
    Dynamics d = dyn;
    for (const PovTriple& pov : opts.pov_augment) {
        if (!d.rhs(pov.pos)) d.odes.emplace_back(pov.pos, var(pov.vel));
        if (!d.rhs(pov.vel)) d.odes.emplace_back(pov.vel, var(pov.acc));
    }
    return d;
}

// candidate event times for guard truth changes in (0, T]
std::vector<double> guard_events(const Assertion& guard, const FlowEval& fe, const Store& s,
                                 double T) {
    std::vector<const AssertNode*> atoms;
    collect_atoms(guard, atoms);
    std::vector<double> times;
    for (const AssertNode* at : atoms) {
        Pw diff = pw_combine(term_pw(at->lhs, fe, s, T), term_pw(at->rhs, fe, s, T), pt_sub);
        for (const Seg& seg : diff) {
            if (seg.lo > 0 && seg.lo < T) times.push_back(seg.lo);
            pt_roots(seg.p, seg.lo, seg.hi, times);
        }
    }
    times.push_back(T);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-15; }),
                times.end());
    return times;
}

struct FlowPlan {
    FlowEval fe;
    std::optional<double> exit;  // within budget
};

FlowPlan plan_flow(const Program& dwhile_node, const Store& s, double budget,
                   const RunOptions& opts) {
    Dynamics dyn = augment(dwhile_node->dyn, opts);
    const FlowBasis& fb = g_basis_cache.get(dwhile_node, dyn);
    if (!fb.nilpotent) throw std::runtime_error("non-polynomial flow: RK4 path not wired here");
    FlowPlan plan{instantiate(fb, s), std::nullopt};
    if (budget <= 0) return plan;
    std::vector<double> times = guard_events(dwhile_node->guard, plan.fe, s, budget);
    Store probe = s;
    double prev = 0;
    auto guard_at = [&](double t) {
        plan.fe.write(probe, t);
        return satisfies(probe, dwhile_node->guard);
    };
    for (double t : times) {
        if (t > prev) {
            if (!guard_at(prev + (t - prev) / 2)) {
                plan.exit = prev;
                return plan;
            }
        }
        if (!guard_at(t)) {
            plan.exit = t;
            return plan;
        }
        prev = t;
    }
    return plan;
}

// ------------------------------------------------------------------ executor

struct Ctx {
    const RunOptions& opts;
    const TraceObserver* obs = nullptr;
    Trace* trace = nullptr;
    double time = 0;
    std::size_t steps = 0;
    bool timeout = false;

    void emit(const Store& s, TraceTag tag) {
        if (trace) trace->entries.push_back({time, s, tag});
        if (obs) (*obs)(time, s, tag);
    }
    void bump() {
        if (++steps > opts.max_discrete_steps)
            throw StuckState("discrete step limit exceeded (diverging loop?)");
    }
};

// returns false when the time budget ran out mid-flow
bool exec_prog(const Program& p, Store& s, Ctx& c) {
    switch (p->kind) {
        case ProgKind::Skip: return true;
        case ProgKind::Hole: throw HoleInProgram("cannot execute program with hole " + p->hole);
        case ProgKind::Seq: return exec_prog(p->a, s, c) && exec_prog(p->b, s, c);
        case ProgKind::Assign: {
            s.set(p->var, eval(p->rhs, s));
            c.bump();
            c.emit(s, TraceTag::DiscreteStep);
            return true;
        }
        case ProgKind::If: {
            bool g = satisfies(s, p->guard);
            c.bump();
            c.emit(s, TraceTag::DiscreteStep);
            return exec_prog(g ? p->a : p->b, s, c);
        }
        case ProgKind::While: {
            while (satisfies(s, p->guard)) {
                c.bump();
                c.emit(s, TraceTag::DiscreteStep);
                if (!exec_prog(p->a, s, c)) return false;
            }
            c.bump();
            c.emit(s, TraceTag::DiscreteStep);
            return true;
        }
        case ProgKind::Case: {
            c.bump();
            c.emit(s, TraceTag::DiscreteStep);
            for (auto& [g, q] : p->cases)
                if (satisfies(s, g)) return exec_prog(q, s, c);
            return true;
        }
        case ProgKind::DWhile: {
            if (!satisfies(s, p->guard)) {
                c.bump();
                c.emit(s, TraceTag::DWhileExit);
                return true;
            }
            double remaining = c.opts.time_budget - c.time;
            if (remaining <= 0) {
                c.timeout = true;
                return false;
            }
            FlowPlan plan = plan_flow(p, s, remaining, c.opts);
            double horizon = plan.exit.value_or(remaining);
            double dt = c.opts.max_sample_dt;
            if (horizon / dt > static_cast<double>(c.opts.max_flow_samples))
                dt = horizon / static_cast<double>(c.opts.max_flow_samples);
            double t0 = c.time;
            for (double t = dt; t < horizon - 1e-15; t += dt) {
                plan.fe.write(s, t);
                c.time = t0 + t;
                c.emit(s, TraceTag::FlowSample);
            }
            plan.fe.write(s, horizon);
            c.time = t0 + horizon;
            if (!plan.exit) {
                c.emit(s, TraceTag::FlowSample);
                c.timeout = true;
                return false;
            }
            c.emit(s, TraceTag::DWhileExit);
            return true;
        }
    }
    throw std::logic_error("bad program kind");
}

RunResult run_impl(const Program& p, const Store& init, const RunOptions& opts, Trace* trace,
                   const TraceObserver* obs) {
    Ctx c{opts};
    c.trace = trace;
    c.obs = obs;
    Store s = init;
    RunResult rr;
    bool done = exec_prog(p, s, c);
    rr.final_store = s;
    rr.total_time = c.time;
    rr.status = done ? RunStatus::Converged : RunStatus::Timeout;
    if (done) c.emit(s, TraceTag::Converged);
    if (trace) rr.trace = std::move(*trace);
    return rr;
}

}  // namespace

RunResult run(const Program& p, const Store& init, const RunOptions& opts) {
    Trace t;
    return run_impl(p, init, opts, &t, nullptr);
}

RunResult run_observed(const Program& p, const Store& init, const RunOptions& opts,
                       const TraceObserver& obs) {
    return run_impl(p, init, opts, nullptr, &obs);
}

std::optional<double> flow_exit_time(const Assertion& guard, const Dynamics& dyn,
                                     const Store& store, double budget, const RunOptions& opts) {
    Program node = pdwhile(guard, dyn);
    if (!satisfies(store, guard)) return 0.0;
    FlowPlan plan = plan_flow(node, store, budget, opts);
    return plan.exit;
}

Store flow_evolve(const Dynamics& dyn, const Store& store, double dt, const RunOptions& opts) {
    Dynamics d = augment(dyn, opts);
    FlowBasis fb = solve_basis(d);
    if (!fb.nilpotent) throw std::runtime_error("non-polynomial flow");
    FlowEval fe = instantiate(fb, store);
    Store out = store;
    fe.write(out, dt);
    return out;
}

std::variant<ExecState, Converged> step(const ExecState& st, const RunOptions& opts) {
    struct Step1 {
        const RunOptions& opts;
        double now;

        // one Fig.-1 style reduction
        std::tuple<Program, Store, double, TraceTag> go(const Program& p, const Store& s) {
            switch (p->kind) {
                case ProgKind::Skip: throw StuckState("step on terminal state");
                case ProgKind::Hole:
                    throw HoleInProgram("cannot execute program with hole " + p->hole);
                case ProgKind::Seq: {
                    if (p->a->kind == ProgKind::Skip)
                        return {p->b, s, 0, TraceTag::DiscreteStep};
                    auto [a2, s2, dt, tag] = go(p->a, s);
                    return {pseq(a2, p->b), s2, dt, tag};
                }
                case ProgKind::Assign: {
                    Store s2 = s;
                    s2.set(p->var, eval(p->rhs, s));
                    return {pskip(), s2, 0, TraceTag::DiscreteStep};
                }
                case ProgKind::If:
                    return {satisfies(s, p->guard) ? p->a : p->b, s, 0, TraceTag::DiscreteStep};
                case ProgKind::While:
                    if (satisfies(s, p->guard))
                        return {pseq(p->a, p), s, 0, TraceTag::DiscreteStep};
                    return {pskip(), s, 0, TraceTag::DiscreteStep};
                case ProgKind::Case: {
                    for (auto& [g, q] : p->cases)
                        if (satisfies(s, g)) return {q, s, 0, TraceTag::DiscreteStep};
                    return {pskip(), s, 0, TraceTag::DiscreteStep};
                }
                case ProgKind::DWhile: {
                    if (!satisfies(s, p->guard)) return {pskip(), s, 0, TraceTag::DWhileExit};
                    double remaining = opts.time_budget - now;
                    if (remaining <= 0)
                        throw StuckState("flow guard not falsified within time budget");
                    FlowPlan plan = plan_flow(p, s, remaining, opts);
                    if (!plan.exit && remaining <= opts.max_sample_dt)
                        throw StuckState("flow guard not falsified within time budget");
                    double exit = plan.exit.value_or(remaining + 1);
                    double dt = std::min(opts.max_sample_dt, remaining);
                    Store s2 = s;
                    if (exit <= dt) {
                        plan.fe.write(s2, exit);
                        return {pskip(), s2, exit, TraceTag::DWhileExit};
                    }
                    plan.fe.write(s2, dt);
                    return {p, s2, dt, TraceTag::FlowSample};
                }
            }
            throw std::logic_error("bad program kind");
        }
    };
    if (st.program->kind == ProgKind::Skip) return Converged{st.store, st.time};
    Step1 s1{opts, st.time};
    auto [p2, store2, dt, tag] = s1.go(st.program, st.store);
    (void)tag;
    if (p2->kind == ProgKind::Skip) return Converged{store2, st.time + dt};
    return ExecState{p2, store2, st.time + dt};
}

std::optional<Violation> check_along(const Trace& trace, const Assertion& safe) {
    for (const TraceEntry& e : trace.entries)
        if (!satisfies(e.store, safe)) return Violation{e.time, e.store};
    return std::nullopt;
}

}  // namespace hhl
