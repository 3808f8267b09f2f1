#include "hhl/pullover.hpp"

#include <atomic>
#include <mutex>
#include <thread>

namespace hhl::pullover {

namespace {

// variables pinned by equalities on the conjunctive spine (lane assignments
// and the constant-speed assumption make pure rejection sampling hopeless)
void collect_pins(const Assertion& a, std::vector<std::pair<VarId, double>>& out) {
    if (a->kind == AssertKind::And) {
        collect_pins(a->a, out);
        collect_pins(a->b, out);
        return;
    }
    if (a->kind != AssertKind::Cmp || a->op != CmpOp::Eq) return;
    const Term &l = a->lhs, &r = a->rhs;
    if (l->kind == TermKind::Var && r->kind == TermKind::Num)
        out.emplace_back(l->var, r->num.convert_to<double>());
    else if (r->kind == TermKind::Var && l->kind == TermKind::Num)
        out.emplace_back(r->var, l->num.convert_to<double>());
}

}  // namespace

ConstrainedSampler::ConstrainedSampler(const Scenario& sc, Box box, Assertion constraint,
                                       std::uint64_t seed)
    : sc_(sc), box_(std::move(box)), constraint_(std::move(constraint)), rng_(seed) {
    collect_pins(constraint_, pinned_);
    std::vector<VarId> pinned_ids;
    for (auto& [v, val] : pinned_) pinned_ids.push_back(v);
    for (auto& [v, iv] : box_.dims)
        if (std::find(pinned_ids.begin(), pinned_ids.end(), v) == pinned_ids.end())
            free_vars_.push_back(v);
}

Store ConstrainedSampler::next(int max_tries) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int k = 0; k < max_tries; ++k) {
        Store s(sc_.vocab);
        bool perturb = !pool_.empty() && u01(rng_) < 0.7;
        if (perturb) {
            const Store& base = pool_[rng_() % pool_.size()];
            double scale = std::pow(10.0, -1.0 - 2.0 * u01(rng_));
            for (VarId v : free_vars_) {
                Interval iv = box_.get(v);
                double w = iv.width() * scale;
                std::normal_distribution<double> g(base.get(v), w);
                double x = std::clamp(g(rng_), iv.lo, iv.hi);
                s.set(v, x);
            }
        } else {
            for (VarId v : free_vars_) {
                Interval iv = box_.get(v);
                s.set(v, iv.lo + (iv.hi - iv.lo) * u01(rng_));
            }
        }
        for (auto& [v, val] : pinned_) s.set(v, val);
        if (satisfies(s, constraint_)) {
            pool_.push_back(s);
            if (pool_.size() > 64) pool_.erase(pool_.begin());
            return s;
        }
    }
    throw SampleError("no store satisfying the precondition found");
}

std::vector<BackpropEdge> backprop_edges(const RuleCatalogue& cat) {
    std::vector<BackpropEdge> out;
    for (const RssRule& r : cat.rules) {
        BackpropEdge e;
        e.wj = r.w;
        e.ui = r.u;
        e.w = r.w.size() > 1 ? r.w.substr(0, r.w.size() - 1) : "";
        e.u = r.u.size() > 1 ? r.u.substr(0, r.u.size() - 1) : "";
        out.push_back(std::move(e));
    }
    return out;
}

BackpropReport check_backprop(const RuleCatalogue& cat, const BackpropEdge& e,
                              const BackpropOptions& opts) {
    const Scenario& sc = cat.sc;
    const Subscenario& sub = cat.tree.node(e.wj);
    Assertion start_pre = cat.rule(e.wj, e.ui).pre;
    Assertion parent_pre = e.w.empty() ? atrue() : cat.rule(e.w, e.u).pre;
    Assertion final_req = aand(sub.goal, parent_pre);
    Assertion along = aand(sub.safe, sub.env);
    Program stage = proper_response(sc, e.wj, e.ui.back() - '0');

    BackpropReport rep;
    rep.edge = e;
    rep.samples = opts.samples;

    // deterministic start set, then embarrassingly parallel runs
    std::vector<Store> starts;
    {
        ConstrainedSampler sampler(sc, physical_box(sc), start_pre,
                                   opts.seed ^ std::hash<std::string>{}(e.wj + ":" + e.ui));
        for (int i = 0; i < opts.samples; ++i) {
            try {
                starts.push_back(sampler.next());
            } catch (const SampleError&) {
                rep.sample_shortfall = opts.samples - static_cast<int>(starts.size());
                break;
            }
        }
    }

    RunOptions ropts = scenario_run_options(sc);
    ropts.time_budget = opts.time_budget;
    ropts.max_flow_samples = 20000;

    std::mutex mu;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= starts.size()) return;
            const Store& start = starts[i];
            bool safety_bad = false;
            TraceObserver obs = [&](double, const Store& s, TraceTag) {
                if (!safety_bad && !satisfies_tol(s, along, opts.atol)) safety_bad = true;
            };
            RunResult rr = run_observed(stage, start, ropts, obs);
            std::lock_guard<std::mutex> lk(mu);
            if (safety_bad) rep.safety_violations++;
            if (rr.status == RunStatus::Timeout) {
                rep.timeouts++;
            } else {
                if (!satisfies_tol(rr.final_store, sub.goal, opts.atol)) rep.goal_failures++;
                else if (!satisfies_tol(rr.final_store, parent_pre, opts.atol))
                    rep.next_pre_failures++;
            }
            if ((safety_bad || rr.status == RunStatus::Timeout ||
                 !satisfies_tol(rr.final_store, final_req, opts.atol)) &&
                rep.witnesses.size() < 8)
                rep.witnesses.push_back(start);
        }
    };
    int jobs = std::max(1, opts.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return rep;
}

std::vector<BackpropReport> check_backprop_all(const RuleCatalogue& cat,
                                               const BackpropOptions& opts) {
    std::vector<BackpropReport> out;
    for (const BackpropEdge& e : backprop_edges(cat)) out.push_back(check_backprop(cat, e, opts));
    return out;
}

GlobalFuzzReport fuzz_global(const RuleCatalogue& cat, int n, const BackpropOptions& opts) {
    const Scenario& sc = cat.sc;
    GlobalRule g = global_rule(cat);
    GlobalFuzzReport rep;
    rep.samples = n;
    Assertion along = aand(sc.safe, sc.env);

    std::vector<Store> starts;
    {
        ConstrainedSampler sampler(sc, physical_box(sc), g.pre, opts.seed * 77 + 5);
        for (int i = 0; i < n; ++i) {
            try {
                starts.push_back(sampler.next());
            } catch (const SampleError&) {
                rep.sample_shortfall = n - static_cast<int>(starts.size());
                break;
            }
        }
    }

    RunOptions ropts = scenario_run_options(sc);
    ropts.time_budget = opts.time_budget;
    ropts.max_flow_samples = 20000;

    std::mutex mu;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= starts.size()) return;
            bool safety_bad = false;
            TraceObserver obs = [&](double, const Store& s, TraceTag) {
                if (!safety_bad && !satisfies_tol(s, along, opts.atol)) safety_bad = true;
            };
            RunResult rr = run_observed(g.response, starts[i], ropts, obs);
            std::lock_guard<std::mutex> lk(mu);
            if (safety_bad) rep.safety_violations++;
            if (rr.status == RunStatus::Timeout)
                rep.timeouts++;
            else if (!satisfies_tol(rr.final_store, sc.goal, 1e-4))
                rep.goal_failures++;
        }
    };
    int jobs = std::max(1, opts.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return rep;
}

}  // namespace hhl::pullover
