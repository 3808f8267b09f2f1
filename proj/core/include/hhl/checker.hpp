// Proof trees over Hoare quadruples {A} prog {B} : S, their schema check with
// arithmetic obligation emission, and instance-level soundness fuzzing.
#pragma once

#include "hhl/exec.hpp"
#include "hhl/oracle.hpp"

namespace hhl {

struct HoareQuadruple {
    Assertion pre;
    Program program;
    Assertion post;
    Assertion safety;
};

enum class RuleName : std::uint8_t {
    Skip,
    Seq,
    Assign,
    If,
    Wh,
    DWh,       // single invariant/variant sugar for DWhMulti
    DWhMulti,
    LImp,
    Conj,
    Case,
    DWhSol
};

std::string rule_name_str(RuleName r);

// invariant relation: e ~ 0 with ~ in {=, >, >=}; the Lie row uses = for =
// and >= otherwise
enum class InvRel : std::uint8_t { Eq, Gt, Ge };

struct InvariantRow {
    Term e;
    InvRel rel;
};

struct VariantRow {
    Term variant;
    Term terminator;
};

struct ProofNode;
using ProofTree = std::shared_ptr<const ProofNode>;

struct ProofNode {
    RuleName rule;
    HoareQuadruple conclusion;
    std::vector<ProofTree> premises;

    // DWh / DWhMulti
    std::vector<InvariantRow> invariants;
    std::vector<VariantRow> variants;

    // Wh
    Term wh_variant;
    VarId wh_fresh = 0;
    bool wh_strict = false;  // variant relation > (true) or >= (false)

    // DWhSol: closed-form solutions per flowed variable over (initial vars, time)
    std::vector<std::pair<VarId, Term>> solutions;
    VarId sol_time = 0;
    Term sol_witness;
};

ProofTree make_proof_node(ProofNode n);

struct Obligation {
    Assertion assertion;
    std::string provenance;
};

struct SchemaError : std::runtime_error {
    std::string node_path;
    SchemaError(std::string path, const std::string& reason)
        : std::runtime_error("schema error at " + path + ": " + reason), node_path(std::move(path)) {}
};

// Every node must match its rule shape; returns the arithmetic obligations.
std::vector<Obligation> check_schema(const ProofTree& t, const VocabPtr& vocab);

struct CheckResult {
    enum class Kind : std::uint8_t { Accepted, Rejected, Unknown } kind;
    // Rejected
    std::optional<Obligation> violated;
    std::optional<Store> counterexample;
    // Unknown
    std::vector<Obligation> undischarged;
    std::size_t obligation_count = 0;
    int max_certificate_depth = 0;
};

struct CheckOptions {
    int jobs = 1;
    int dwhsol_samples = 200;
    double dwhsol_dt = 0.01;
};

CheckResult check_proof(const ProofTree& t, const ArithOracle& oracle, const CheckOptions& opts = {});

// Assertion equivalence up to polynomial normalization of comparison atoms
// (so t < r and r - t > 0 match).
bool assertion_equiv(const Assertion& a, const Assertion& b);

// ---------------------------------------------------------------- sampling

struct SampleError : std::runtime_error {
    explicit SampleError(const std::string& w) : std::runtime_error(w) {}
};

// rejection-samples a store in the box satisfying `constraint`
class BoxSampler {
public:
    BoxSampler(VocabPtr vocab, Box box, std::uint64_t seed);
    Store sample();                             // unconstrained
    Store sample_satisfying(const Assertion& a, int max_tries = 200000);

private:
    VocabPtr vocab_;
    Box box_;
    std::mt19937_64 rng_;
};

struct FuzzFailure {
    enum class Kind : std::uint8_t { Timeout, Postcondition, Safety } kind;
    Store start;
    double time = 0;
};

struct FuzzReport {
    int runs = 0;
    int timeouts = 0;
    int post_failures = 0;
    int safety_violations = 0;
    std::vector<FuzzFailure> failures;  // capped
    bool ok() const { return timeouts == 0 && post_failures == 0 && safety_violations == 0; }
};

FuzzReport soundness_fuzz(const HoareQuadruple& q, const Box& box, const VocabPtr& vocab, int n,
                          std::uint64_t seed, const RunOptions& ropts = {}, int jobs = 1);

}  // namespace hhl
