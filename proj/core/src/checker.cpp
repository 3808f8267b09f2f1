#include "hhl/checker.hpp"

#include "hhl/poly.hpp"

#include <atomic>
#include <sstream>
#include <thread>

namespace hhl {

ProofTree make_proof_node(ProofNode n) { return std::make_shared<const ProofNode>(std::move(n)); }

std::string rule_name_str(RuleName r) {
    switch (r) {
        case RuleName::Skip: return "skip";
        case RuleName::Seq: return "seq";
        case RuleName::Assign: return "assign";
        case RuleName::If: return "if";
        case RuleName::Wh: return "wh";
        case RuleName::DWh: return "dwh";
        case RuleName::DWhMulti: return "dwhmulti";
        case RuleName::LImp: return "limp";
        case RuleName::Conj: return "conj";
        case RuleName::Case: return "case";
        case RuleName::DWhSol: return "dwhsol";
    }
    return "?";
}

// ------------------------------------------------- canonical atom comparison

namespace {

constexpr VarId kExtBase = 1u << 24;

struct ExtTable {
    std::vector<Term> terms;
    std::map<std::string, VarId> keys;
};

std::string poly_sig(const Poly& p);

std::optional<Poly> to_poly_ext(const Term& t, ExtTable& ext) {
    switch (t->kind) {
        case TermKind::Num: return Poly::constant(t->num);
        case TermKind::Var: return Poly::variable(t->var);
        case TermKind::Add: {
            auto a = to_poly_ext(t->a, ext), b = to_poly_ext(t->b, ext);
            if (!a || !b) return std::nullopt;
            return *a + *b;
        }
        case TermKind::Sub: {
            auto a = to_poly_ext(t->a, ext), b = to_poly_ext(t->b, ext);
            if (!a || !b) return std::nullopt;
            return *a - *b;
        }
        case TermKind::Mul: {
            auto a = to_poly_ext(t->a, ext), b = to_poly_ext(t->b, ext);
            if (!a || !b) return std::nullopt;
            return *a * *b;
        }
        case TermKind::DivConst: {
            auto a = to_poly_ext(t->a, ext);
            if (!a) return std::nullopt;
            return a->scaled(Rational(1) / t->num);
        }
        case TermKind::Max:
        case TermKind::Sel: {
            std::string key = t->kind == TermKind::Max ? "max(" : "sel(";
            for (const Term& child : {t->a, t->b, t->c, t->d}) {
                if (!child) break;
                auto p = to_poly_ext(child, ext);
                if (!p) return std::nullopt;
                key += poly_sig(*p) + "|";
            }
            auto it = ext.keys.find(key);
            VarId id;
            if (it == ext.keys.end()) {
                id = kExtBase + static_cast<VarId>(ext.terms.size());
                ext.terms.push_back(t);
                ext.keys.emplace(key, id);
            } else {
                id = it->second;
            }
            return Poly::variable(id);
        }
    }
    return std::nullopt;
}

std::string poly_sig(const Poly& p) {
    std::string s;
    for (auto& [m, c] : p.terms()) {
        for (auto& [v, e] : m) s += std::to_string(v) + "^" + std::to_string(e) + ".";
        s += c.str() + ";";
    }
    return s;
}

enum class CanonRel : std::uint8_t { Eq0, Ne0, Le0, Lt0, Ge0, Gt0 };

struct CanonAtom {
    std::string sig;
    CanonRel rel;
    bool operator==(const CanonAtom& o) const { return sig == o.sig && rel == o.rel; }
};

std::optional<CanonAtom> canon_atom(const AssertNode* a, ExtTable& ext) {
    auto l = to_poly_ext(a->lhs, ext), r = to_poly_ext(a->rhs, ext);
    if (!l || !r) return std::nullopt;
    Poly p = *l - *r;
    bool flip = p.normalize_primitive();
    CanonRel rel;
    switch (a->op) {
        case CmpOp::Eq: rel = CanonRel::Eq0; break;
        case CmpOp::Ne: rel = CanonRel::Ne0; break;
        case CmpOp::Le: rel = flip ? CanonRel::Ge0 : CanonRel::Le0; break;
        case CmpOp::Lt: rel = flip ? CanonRel::Gt0 : CanonRel::Lt0; break;
        default: return std::nullopt;
    }
    return CanonAtom{poly_sig(p), rel};
}

bool equiv_rec(const Assertion& a, const Assertion& b, ExtTable& ext) {
    if (a->kind != b->kind) {
        if (a->kind == AssertKind::Cmp && b->kind == AssertKind::Cmp) return false;
        return false;
    }
    switch (a->kind) {
        case AssertKind::True: return true;
        case AssertKind::Cmp: {
            if (a->op == b->op && term_eq(a->lhs, b->lhs) && term_eq(a->rhs, b->rhs)) return true;
            auto ca = canon_atom(a.get(), ext), cb = canon_atom(b.get(), ext);
            return ca && cb && *ca == *cb;
        }
        case AssertKind::Not: return equiv_rec(a->a, b->a, ext);
        default: return equiv_rec(a->a, b->a, ext) && equiv_rec(a->b, b->b, ext);
    }
}

}  // namespace

bool assertion_equiv(const Assertion& a, const Assertion& b) {
    if (assertion_eq(a, b)) return true;
    ExtTable ext;
    return equiv_rec(a, b, ext);
}

// -------------------------------------------------------------- schema check

namespace {

Assertion inv_atom(const InvariantRow& row) {
    switch (row.rel) {
        case InvRel::Eq: return eq(row.e, num(0));
        case InvRel::Gt: return gt(row.e, num(0));
        case InvRel::Ge: return ge(row.e, num(0));
    }
    throw std::logic_error("bad invariant relation");
}

Assertion inv_lie_atom(const InvariantRow& row, const Term& lie) {
    return row.rel == InvRel::Eq ? eq(lie, num(0)) : ge(lie, num(0));
}

struct SchemaWalker {
    const VocabPtr& vocab;
    std::vector<Obligation> obligations;

    void need(bool cond, const std::string& path, const std::string& reason) {
        if (!cond) throw SchemaError(path, reason);
    }

    void emit(Assertion a, const std::string& path, const std::string& what) {
        obligations.push_back({std::move(a), path + ": " + what});
    }

    void walk(const ProofTree& t, const std::string& path) {
        const HoareQuadruple& c = t->conclusion;
        switch (t->rule) {
            case RuleName::Skip: {
                need(t->premises.empty(), path, "skip takes no premises");
                need(c.program->kind == ProgKind::Skip, path, "program must be skip");
                need(assertion_equiv(c.pre, c.post) && assertion_equiv(c.pre, c.safety), path,
                     "skip concludes {A} skip {A} : A");
                return;
            }
            case RuleName::Assign: {
                need(t->premises.empty(), path, "assign takes no premises");
                need(c.program->kind == ProgKind::Assign, path, "program must be an assignment");
                Assertion substituted = subst(c.post, c.program->var, c.program->rhs);
                need(assertion_equiv(c.pre, substituted), path,
                     "precondition must be the substituted postcondition");
                need(assertion_equiv(c.safety, aor(c.post, substituted)), path,
                     "safety must be post or substituted post");
                return;
            }
            case RuleName::Seq: {
                need(t->premises.size() == 2, path, "seq takes two premises");
                need(c.program->kind == ProgKind::Seq, path, "program must be a composition");
                const auto& p1 = t->premises[0]->conclusion;
                const auto& p2 = t->premises[1]->conclusion;
                need(program_eq(p1.program, c.program->a), path, "first premise program mismatch");
                need(program_eq(p2.program, c.program->b), path, "second premise program mismatch");
                need(assertion_equiv(p1.pre, c.pre), path, "first premise precondition mismatch");
                need(assertion_equiv(p1.post, p2.pre), path, "mid-assertion mismatch");
                need(assertion_equiv(p2.post, c.post), path, "second premise postcondition mismatch");
                need(assertion_equiv(p1.safety, c.safety) && assertion_equiv(p2.safety, c.safety),
                     path, "safety condition must match premises");
                break;
            }
            case RuleName::If: {
                need(t->premises.size() == 2, path, "if takes two premises");
                need(c.program->kind == ProgKind::If, path, "program must be a conditional");
                const auto& p1 = t->premises[0]->conclusion;
                const auto& p2 = t->premises[1]->conclusion;
                need(program_eq(p1.program, c.program->a), path, "then-branch program mismatch");
                need(program_eq(p2.program, c.program->b), path, "else-branch program mismatch");
                need(assertion_equiv(p1.pre, aand(c.program->guard, c.pre)), path,
                     "then premise precondition must be guard and pre");
                need(assertion_equiv(p2.pre, aand(anot(c.program->guard), c.pre)), path,
                     "else premise precondition must be negated guard and pre");
                need(assertion_equiv(p1.post, c.post) && assertion_equiv(p2.post, c.post), path,
                     "branch postconditions must match");
                need(assertion_equiv(p1.safety, c.safety) && assertion_equiv(p2.safety, c.safety),
                     path, "branch safety conditions must match");
                break;
            }
            case RuleName::Wh: {
                need(t->premises.size() == 1, path, "wh takes one premise");
                need(c.program->kind == ProgKind::While, path, "program must be a while loop");
                need(t->wh_variant != nullptr, path, "missing loop variant");
                const auto& p = t->premises[0]->conclusion;
                need(program_eq(p.program, c.program->a), path, "premise program must be the body");
                Assertion relv = t->wh_strict ? gt(t->wh_variant, num(0)) : ge(t->wh_variant, num(0));
                // conclusion pre must be  B && e_var >~ 0
                need(c.pre->kind == AssertKind::And && assertion_equiv(c.pre->b, relv), path,
                     "conclusion precondition must end with the variant bound");
                Assertion B = c.pre->a;
                need(assertion_equiv(c.post, aand(aand(anot(c.program->guard), B), relv)), path,
                     "conclusion postcondition shape mismatch");
                Term xv = var(t->wh_fresh);
                need(assertion_equiv(p.pre, aand(aand(aand(c.program->guard, B), relv),
                                                 eq(t->wh_variant, xv))),
                     path, "premise precondition shape mismatch");
                need(assertion_equiv(
                         p.post, aand(aand(B, relv), le(t->wh_variant, sub(xv, num(1))))),
                     path, "premise postcondition shape mismatch");
                need(assertion_equiv(p.safety, c.safety), path, "safety mismatch");
                std::vector<VarId> used;
                collect_vars(c.pre, used);
                collect_vars(c.post, used);
                collect_vars(t->wh_variant, used);
                for (VarId v : used)
                    need(v != t->wh_fresh, path, "wh snapshot variable is not fresh");
                break;
            }
            case RuleName::DWh:
            case RuleName::DWhMulti: {
                need(t->premises.empty(), path, "dwhile rules take no premises");
                if (t->rule == RuleName::DWh)
                    need(t->invariants.size() == 1 && t->variants.size() == 1, path,
                         "dwh uses one invariant and one variant");
                need(!t->variants.empty(), path, "at least one variant required");
                need(c.program->kind == ProgKind::DWhile, path, "program must be a dwhile");
                // guard: conjunction of variant > 0
                std::vector<Assertion> gs;
                for (auto& v : t->variants) gs.push_back(gt(v.variant, num(0)));
                need(assertion_equiv(c.program->guard, aand_all(gs)), path,
                     "guard must be the conjunction of variant > 0");
                // post: some variant hits zero, the others stay nonnegative
                std::vector<Assertion> posts;
                for (std::size_t i = 0; i < t->variants.size(); ++i) {
                    std::vector<Assertion> conj{eq(t->variants[i].variant, num(0))};
                    for (std::size_t j = 0; j < t->variants.size(); ++j)
                        if (j != i) conj.push_back(ge(t->variants[j].variant, num(0)));
                    posts.push_back(aand_all(conj));
                }
                need(assertion_equiv(c.post, aor_all(posts)), path,
                     "postcondition shape mismatch");
                // safety: invariants and variant nonnegativity
                std::vector<Assertion> saf;
                for (auto& row : t->invariants) saf.push_back(inv_atom(row));
                for (auto& v : t->variants) saf.push_back(ge(v.variant, num(0)));
                need(assertion_equiv(c.safety, aand_all(saf)), path, "safety shape mismatch");

                // obligations
                std::vector<Assertion> ctx_list;
                for (auto& v : t->variants) ctx_list.push_back(ge(v.variant, num(0)));
                for (auto& row : t->invariants) ctx_list.push_back(inv_atom(row));
                Assertion ctx = aand_all(ctx_list);
                const Dynamics& dyn = c.program->dyn;
                int idx = 1;
                for (auto& row : t->invariants) {
                    emit(implies(c.pre, inv_atom(row)), path,
                         "inv " + std::to_string(idx) + " holds initially");
                    emit(implies(ctx, inv_lie_atom(row, lie_derivative(row.e, dyn))), path,
                         "inv " + std::to_string(idx) + " preserved by the flow");
                    ++idx;
                }
                idx = 1;
                for (auto& v : t->variants) {
                    emit(implies(c.pre, ge(v.variant, num(0))), path,
                         "var " + std::to_string(idx) + " nonnegative initially");
                    emit(implies(ctx, le(lie_derivative(v.variant, dyn), v.terminator)), path,
                         "var " + std::to_string(idx) + " decreases at the terminator rate");
                    emit(implies(c.pre, lt(v.terminator, num(0))), path,
                         "ter " + std::to_string(idx) + " negative initially");
                    emit(implies(ctx, le(lie_derivative(v.terminator, dyn), num(0))), path,
                         "ter " + std::to_string(idx) + " non-increasing");
                    ++idx;
                }
                return;
            }
            case RuleName::LImp: {
                need(t->premises.size() == 1, path, "limp takes one premise");
                const auto& p = t->premises[0]->conclusion;
                need(program_eq(p.program, c.program), path, "limp premise program mismatch");
                emit(implies(c.pre, p.pre), path, "precondition strengthening");
                emit(implies(aand(p.safety, p.post), c.post), path, "postcondition weakening");
                emit(implies(p.safety, c.safety), path, "safety weakening");
                break;
            }
            case RuleName::Conj: {
                need(t->premises.size() == 2, path, "conj takes two premises");
                const auto& p1 = t->premises[0]->conclusion;
                const auto& p2 = t->premises[1]->conclusion;
                need(program_eq(p1.program, c.program) && program_eq(p2.program, c.program), path,
                     "conj premises must share the conclusion program");
                need(assertion_equiv(p1.pre, c.pre) && assertion_equiv(p2.pre, c.pre), path,
                     "conj premises must share the precondition");
                need(assertion_equiv(c.post, aand(p1.post, p2.post)), path,
                     "conclusion post must be the conjunction");
                need(assertion_equiv(c.safety, aand(p1.safety, p2.safety)), path,
                     "conclusion safety must be the conjunction");
                break;
            }
            case RuleName::Case: {
                need(c.program->kind == ProgKind::Case, path, "program must be a case block");
                need(t->premises.size() == c.program->cases.size(), path,
                     "one premise per case branch");
                std::vector<Assertion> pres;
                for (std::size_t i = 0; i < t->premises.size(); ++i) {
                    const auto& p = t->premises[i]->conclusion;
                    need(assertion_equiv(p.pre, c.program->cases[i].first), path,
                         "branch guard must equal premise precondition");
                    need(program_eq(p.program, c.program->cases[i].second), path,
                         "branch program mismatch");
                    need(assertion_equiv(p.post, c.post), path, "branch postcondition mismatch");
                    need(assertion_equiv(p.safety, c.safety), path, "branch safety mismatch");
                    pres.push_back(p.pre);
                }
                need(assertion_equiv(c.pre, aor_all(pres)), path,
                     "conclusion precondition must be the disjunction of branch preconditions");
                break;
            }
            case RuleName::DWhSol: {
                need(t->premises.empty(), path, "dwhsol takes no premises");
                need(c.program->kind == ProgKind::DWhile, path, "program must be a dwhile");
                need(t->sol_witness != nullptr, path, "missing witness time expression");
                const Dynamics& dyn = c.program->dyn;
                need(t->solutions.size() == dyn.odes.size(), path,
                     "solutions must cover the flowed variables");
                // verify the closed form symbolically: d sol/dt == f[sol], sol(0) == x
                for (auto& [x, solx] : t->solutions) {
                    const Term* f = dyn.rhs(x);
                    need(f != nullptr, path, "solution for a variable that does not flow");
                    Term rhs_sub = *f;
                    for (auto& [y, soly] : t->solutions) rhs_sub = subst(rhs_sub, y, soly);
                    Term diff = sub(partial_derivative(solx, t->sol_time), rhs_sub);
                    auto dp = to_poly(diff);
                    need(dp && dp->is_zero(), path,
                         "closed-form solution does not satisfy the dynamics");
                    auto ip = to_poly(sub(subst(solx, t->sol_time, num(0)), var(x)));
                    need(ip && ip->is_zero(), path, "closed-form solution wrong at time zero");
                }
                return;  // discharged by sampling in check_proof
            }
        }
        for (std::size_t i = 0; i < t->premises.size(); ++i)
            walk(t->premises[i], path + "." + std::to_string(i));
    }
};

void collect_dwhsol(const ProofTree& t, std::vector<ProofTree>& out) {
    if (t->rule == RuleName::DWhSol) out.push_back(t);
    for (auto& p : t->premises) collect_dwhsol(p, out);
}

}  // namespace

std::vector<Obligation> check_schema(const ProofTree& t, const VocabPtr& vocab) {
    SchemaWalker w{vocab, {}};
    w.walk(t, rule_name_str(t->rule));
    return w.obligations;
}

CheckResult check_proof(const ProofTree& t, const ArithOracle& oracle, const CheckOptions& opts) {
    std::vector<Obligation> obs = check_schema(t, oracle.vocab());
    CheckResult res;
    res.obligation_count = obs.size();

    std::vector<Verdict> verdicts(obs.size());
    std::atomic<std::size_t> next{0};
    int jobs = std::max(1, opts.jobs);
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= obs.size()) return;
            verdicts[i] = oracle.decide(obs[i].assertion);
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (auto* f = std::get_if<VerdictFalsified>(&verdicts[i])) {
            res.kind = CheckResult::Kind::Rejected;
            res.violated = obs[i];
            res.counterexample = f->store;
            return res;
        }
    }
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (std::holds_alternative<VerdictUnknown>(verdicts[i]))
            res.undischarged.push_back(obs[i]);
        else if (auto* v = std::get_if<VerdictValid>(&verdicts[i]))
            res.max_certificate_depth = std::max(res.max_certificate_depth, v->depth);
    }

    // sampled discharge of explicit-solution nodes
    std::vector<ProofTree> sols;
    collect_dwhsol(t, sols);
    for (const ProofTree& node : sols) {
        const HoareQuadruple& c = node->conclusion;
        BoxSampler sampler(oracle.vocab(), oracle.config().box,
                           oracle.config().seed ^ assertion_hash(c.pre));
        for (int k = 0; k < opts.dwhsol_samples; ++k) {
            Store rho;
            try {
                rho = sampler.sample_satisfying(c.pre, 20000);
            } catch (const SampleError&) {
                break;  // vacuous over this box
            }
            double tw = eval(node->sol_witness, rho);
            auto at = [&](double tt) {
                Store s = rho;
                Store with_time = rho;
                with_time.set(node->sol_time, tt);
                for (auto& [x, solx] : node->solutions) s.set(x, eval(solx, with_time));
                return s;
            };
            bool ok = tw >= 0 && !satisfies(at(tw), c.program->guard) && satisfies(at(tw), c.post);
            for (double tt = 0; ok && tt < tw; tt += opts.dwhsol_dt) {
                Store s = at(tt);
                ok = satisfies(s, c.program->guard) && satisfies(s, c.safety);
            }
            if (ok) ok = satisfies(at(tw), c.safety);
            if (!ok) {
                res.kind = CheckResult::Kind::Rejected;
                res.violated = Obligation{c.pre, "dwhsol: premise fails at sampled store"};
                res.counterexample = rho;
                return res;
            }
        }
    }

    res.kind = res.undischarged.empty() ? CheckResult::Kind::Accepted : CheckResult::Kind::Unknown;
    return res;
}

// ------------------------------------------------------------------ sampling

BoxSampler::BoxSampler(VocabPtr vocab, Box box, std::uint64_t seed)
    : vocab_(std::move(vocab)), box_(std::move(box)), rng_(seed) {}

Store BoxSampler::sample() {
    Store s(vocab_);
    for (auto& [v, iv] : box_.dims) {
        double lo = std::max(iv.lo, -1e12), hi = std::min(iv.hi, 1e12);
        std::uniform_real_distribution<double> d(lo, hi);
        s.set(v, lo == hi ? lo : d(rng_));
    }
    return s;
}

Store BoxSampler::sample_satisfying(const Assertion& a, int max_tries) {
    for (int k = 0; k < max_tries; ++k) {
        Store s = sample();
        if (satisfies(s, a)) return s;
    }
    throw SampleError("no store in the box satisfies the constraint (after " +
                      std::to_string(max_tries) + " tries)");
}

FuzzReport soundness_fuzz(const HoareQuadruple& q, const Box& box, const VocabPtr& vocab, int n,
                          std::uint64_t seed, const RunOptions& ropts, int jobs) {
    FuzzReport rep;
    rep.runs = n;
    std::mutex mu;
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= n) return;
            BoxSampler sampler(vocab, box, seed + 0x9e3779b97f4a7c15ull * (i + 1));
            Store start;
            try {
                start = sampler.sample_satisfying(q.pre);
            } catch (const SampleError&) {
                std::lock_guard<std::mutex> lk(mu);
                rep.post_failures++;  // cannot even sample the precondition
                rep.failures.push_back({FuzzFailure::Kind::Postcondition, Store(), 0});
                return;
            }
            std::optional<FuzzFailure> fail;
            TraceObserver obs = [&](double time, const Store& s, TraceTag) {
                if (!fail && !satisfies(s, q.safety))
                    fail = FuzzFailure{FuzzFailure::Kind::Safety, start, time};
            };
            RunResult rr = run_observed(q.program, start, ropts, obs);
            if (!fail && rr.status == RunStatus::Timeout)
                fail = FuzzFailure{FuzzFailure::Kind::Timeout, start, rr.total_time};
            if (!fail && !satisfies(rr.final_store, q.post))
                fail = FuzzFailure{FuzzFailure::Kind::Postcondition, start, rr.total_time};
            if (fail) {
                std::lock_guard<std::mutex> lk(mu);
                switch (fail->kind) {
                    case FuzzFailure::Kind::Timeout: rep.timeouts++; break;
                    case FuzzFailure::Kind::Postcondition: rep.post_failures++; break;
                    case FuzzFailure::Kind::Safety: rep.safety_violations++; break;
                }
                if (rep.failures.size() < 32) rep.failures.push_back(*fail);
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return rep;
}

}  // namespace hhl
