// The pull-over scenario: subscenario tree, proper responses, derived
// preconditions, the rule catalogue with its global dispatch, and the
// backward-propagation checks that validate every edge behaviourally.
#pragma once

#include "hhl/proof_io.hpp"
#include "hhl/rss.hpp"

namespace hhl::pullover {

struct Vars {
    VarId y, v, a, l;
    std::array<VarId, rss::kNumPovs> yi, vi, ai, li;
    VarId y_tgt, t;
};

struct Scenario {
    VocabPtr vocab;
    Vars var;
    Assertion safe, env, goal;
    rss::RssParams params;
};

Scenario scenario(const rss::RssParams& p);

struct UnknownLabel : std::runtime_error {
    explicit UnknownLabel(const std::string& w) : std::runtime_error("unknown label: " + w) {}
};

struct Subscenario {
    std::string label;   // tree address, e.g. "1211"
    std::string parent;  // "" for depth-1 nodes
    Assertion safe, env, goal;
};

struct SubscenarioTree {
    Scenario root;
    std::vector<Subscenario> nodes;
    const Subscenario& node(const std::string& label) const;
};

SubscenarioTree subscenario_tree(const Scenario& sc);

// single-stage responses alpha_{w,i}, holes already instantiated
Program proper_response(const Scenario& sc, const std::string& w, int i);

// preconditions A_{w,u}; the printed ones plus the derived closed forms
Assertion precondition(const Scenario& sc, const std::string& w, const std::string& u);

enum class Priority : std::uint8_t { High, Low };

struct RssRule {
    std::string w, u;
    Assertion pre;
    Program response;  // the full chain down to the stopping stage
    Priority priority;
    std::string note;
};

struct RuleCatalogue {
    Scenario sc;
    SubscenarioTree tree;
    std::vector<RssRule> rules;  // dispatch order

    const RssRule& rule(const std::string& w, const std::string& u) const;
};

RuleCatalogue build_catalogue(const rss::RssParams& p);

struct GlobalRule {
    Assertion pre;      // disjunction over the catalogue
    Program response;   // case dispatch to the chains
};
GlobalRule global_rule(const RuleCatalogue& cat);

// catalogue file format
std::string print_catalogue(const RuleCatalogue& cat);
RuleCatalogue parse_catalogue(const std::string& text, const rss::RssParams& p);
RuleCatalogue load_catalogue(const std::string& path, const rss::RssParams& p);

// default physical sampling box over the scenario variables
Box physical_box(const Scenario& sc);

// execution options with the POVs' implicit dynamics declared
RunOptions scenario_run_options(const Scenario& sc);

// tolerant satisfaction for checking stores produced by exact event handling
bool satisfies_tol(const Store& s, const Assertion& a, double atol);

// the stopping-stage proof (derived with the dwhile rule twice); the mutation
// halves the first terminator, which must be caught by the checker
ProofTree stage1_proof(const Scenario& sc, bool weaken_terminator = false);

// ------------------------------------------------------------- verification

// samples stores satisfying an assertion by rejection plus perturbation of
// previously found feasible points; deterministic for a fixed seed
class ConstrainedSampler {
public:
    ConstrainedSampler(const Scenario& sc, Box box, Assertion constraint, std::uint64_t seed);
    Store next(int max_tries = 400000);

private:
    const Scenario& sc_;
    Box box_;
    Assertion constraint_;
    std::mt19937_64 rng_;
    std::vector<Store> pool_;
    std::vector<std::pair<VarId, double>> pinned_;
    std::vector<VarId> free_vars_;
};

struct BackpropEdge {
    std::string wj, ui;  // child rule
    std::string w, u;    // parent rule ("" for the root)
};
std::vector<BackpropEdge> backprop_edges(const RuleCatalogue& cat);

struct BackpropReport {
    BackpropEdge edge;
    int samples = 0;
    int goal_failures = 0;
    int next_pre_failures = 0;
    int safety_violations = 0;
    int timeouts = 0;
    int sample_shortfall = 0;  // could not even find enough starting stores
    std::vector<Store> witnesses;
    bool ok() const {
        return goal_failures + next_pre_failures + safety_violations + timeouts +
                   sample_shortfall ==
               0;
    }
};

struct BackpropOptions {
    int samples = 1000;
    std::uint64_t seed = 7;
    int jobs = 1;
    double atol = 1e-6;
    double time_budget = 4000;  // simulated seconds; slow crawls are legal
};

BackpropReport check_backprop(const RuleCatalogue& cat, const BackpropEdge& e,
                              const BackpropOptions& opts);
std::vector<BackpropReport> check_backprop_all(const RuleCatalogue& cat,
                                               const BackpropOptions& opts);

struct GlobalFuzzReport {
    int samples = 0;
    int goal_failures = 0;
    int safety_violations = 0;
    int timeouts = 0;
    int sample_shortfall = 0;
    bool ok() const {
        return goal_failures + safety_violations + timeouts + sample_shortfall == 0;
    }
};

GlobalFuzzReport fuzz_global(const RuleCatalogue& cat, int n, const BackpropOptions& opts);

}  // namespace hhl::pullover
