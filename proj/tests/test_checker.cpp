#include "doctest.h"

#include "hhl/proof_io.hpp"
#include "hhl/rss.hpp"

#include <thread>

using namespace hhl;

namespace {

OracleConfig oneway_oracle_cfg(const rss::OneWayArtifacts& art, const rss::RssParams& p) {
    OracleConfig cfg;
    cfg.box = rss::one_way_box(art, p);
    cfg.seed = 20220915;
    return cfg;
}

int hw_jobs() {
    return std::max(2u, std::thread::hardware_concurrency());
}

}  // namespace

TEST_CASE("trivial quadruples through the rules") {
    auto vocab = std::make_shared<Vocabulary>();
    VarId x = vocab->intern("x");
    OracleConfig cfg;
    cfg.box.set(x, {-10, 10});
    ArithOracle oracle(vocab, cfg);

    // {true} skip {true} : true
    ProofNode n;
    n.rule = RuleName::Skip;
    n.conclusion = {atrue(), pskip(), atrue(), atrue()};
    CHECK(check_proof(make_proof_node(std::move(n)), oracle).kind ==
          CheckResult::Kind::Accepted);

    // assign emits no obligations
    ProofNode a;
    a.rule = RuleName::Assign;
    Assertion post = gt(var(x), num(0));
    Program prog = passign(x, sub(var(x), num(1)));
    Assertion pre = subst(post, x, prog->rhs);
    a.conclusion = {pre, prog, post, aor(post, pre)};
    auto obs = check_schema(make_proof_node(std::move(a)), vocab);
    CHECK(obs.empty());

    // schema violations are reported with the node path
    ProofNode bad;
    bad.rule = RuleName::Skip;
    bad.conclusion = {atrue(), pskip(), gt(var(x), num(0)), atrue()};
    CHECK_THROWS_AS(check_schema(make_proof_node(std::move(bad)), vocab), SchemaError);
}

TEST_CASE("one-way traffic proof is accepted with no unknowns") {
    rss::RssParams p;
    rss::OneWayArtifacts art = rss::one_way_artifacts(p);
    ArithOracle oracle(art.vocab, oneway_oracle_cfg(art, p));
    CheckOptions copts;
    copts.jobs = hw_jobs();
    CheckResult res = check_proof(art.proof, oracle, copts);
    for (auto& ob : res.undischarged)
        MESSAGE("unknown: ", ob.provenance, "  :: ", to_string(ob.assertion, *art.vocab));
    CHECK(res.kind == CheckResult::Kind::Accepted);
    CHECK(res.undischarged.empty());
    CHECK(res.obligation_count > 60);
}

TEST_CASE("swapped braking rates in the invariant are rejected with a witness") {
    rss::RssParams p;
    rss::OneWayMutation mut;
    mut.swap_braking_rates = true;
    rss::OneWayArtifacts art = rss::one_way_artifacts(p, mut);
    ArithOracle oracle(art.vocab, oneway_oracle_cfg(art, p));
    CheckOptions copts;
    copts.jobs = hw_jobs();
    CheckResult res = check_proof(art.proof, oracle, copts);
    REQUIRE(res.kind == CheckResult::Kind::Rejected);
    REQUIRE(res.counterexample);
    CHECK_FALSE(satisfies(*res.counterexample, res.violated->assertion));
}

TEST_CASE("dropping the response-time quadratic is rejected with a witness") {
    rss::RssParams p;
    rss::OneWayMutation mut;
    mut.drop_response_quadratic = true;
    rss::OneWayArtifacts art = rss::one_way_artifacts(p, mut);
    ArithOracle oracle(art.vocab, oneway_oracle_cfg(art, p));
    CheckOptions copts;
    copts.jobs = hw_jobs();
    CheckResult res = check_proof(art.proof, oracle, copts);
    REQUIRE(res.kind == CheckResult::Kind::Rejected);
    REQUIRE(res.counterexample);
    CHECK_FALSE(satisfies(*res.counterexample, res.violated->assertion));
}

TEST_CASE("proof file round-trip") {
    rss::RssParams p;
    rss::OneWayArtifacts art = rss::one_way_artifacts(p);
    std::string txt = print_proof(art.proof, *art.vocab);
    ProofTree back = parse_proof(txt, art.vocab);
    CHECK(print_proof(back, *art.vocab) == txt);
    // and the parsed tree still passes the schema check
    CHECK(check_schema(back, art.vocab).size() == check_schema(art.proof, art.vocab).size());
}

TEST_CASE("soundness fuzz on simple quadruples") {
    auto vocab = std::make_shared<Vocabulary>();
    VarId x = vocab->intern("x");
    Box box;
    box.set(x, {-10, 10});

    HoareQuadruple q{gt(var(x), num(0)), pskip(), gt(var(x), num(0)), gt(var(x), num(0))};
    FuzzReport rep = soundness_fuzz(q, box, vocab, 200, 5);
    CHECK(rep.ok());

    // braking to a halt never ends at v = 1
    auto vocab2 = std::make_shared<Vocabulary>();
    VarId v = vocab2->intern("v");
    Box box2;
    box2.set(v, {0, 28});
    HoareQuadruple q2{gt(var(v), num(2)),
                      pdwhile(gt(var(v), num(0)), Dynamics{{{v, num(-294, 100)}}}),
                      eq(var(v), num(1)), atrue()};
    FuzzReport rep2 = soundness_fuzz(q2, box2, vocab2, 100, 5);
    CHECK(rep2.post_failures == 100);
}

TEST_CASE("case rule checks iff its nested conditional expansion checks") {
    auto vocab = std::make_shared<Vocabulary>();
    VarId x = vocab->intern("x");
    OracleConfig cfg;
    cfg.box.set(x, {-8, 8});
    ArithOracle oracle(vocab, cfg);

    Assertion a1 = gt(var(x), num(0)), a2 = lt(var(x), num(1));
    Assertion post = atrue();
    Assertion safe = atrue();
    Program b1 = passign(x, num(1)), b2 = passign(x, num(0));

    auto branch_proof = [&](Assertion pre, Program prog, Term val) {
        // {true[val/x]} x := val {true} : true v true, then weaken to pre/post
        ProofNode asn;
        asn.rule = RuleName::Assign;
        Assertion sub_post = subst(post, x, val);
        asn.conclusion = {sub_post, prog, post, aor(post, sub_post)};
        ProofNode li;
        li.rule = RuleName::LImp;
        li.conclusion = {pre, prog, post, safe};
        li.premises.push_back(make_proof_node(std::move(asn)));
        return make_proof_node(std::move(li));
    };

    ProofNode cn;
    cn.rule = RuleName::Case;
    cn.premises = {branch_proof(a1, b1, num(1)), branch_proof(a2, b2, num(0))};
    cn.conclusion = {aor(a1, a2), pcase({{a1, b1}, {a2, b2}}), post, safe};
    ProofTree case_tree = make_proof_node(std::move(cn));
    CHECK(check_proof(case_tree, oracle).kind == CheckResult::Kind::Accepted);

    // expansion: if a1 { b1 } else { if a2 { b2 } else skip }
    Program expanded = expand_cases(case_tree->conclusion.program);
    REQUIRE(expanded->kind == ProgKind::If);

    auto weaken = [&](Assertion pre, ProofTree inner) {
        ProofNode li;
        li.rule = RuleName::LImp;
        li.conclusion = {pre, inner->conclusion.program, post, safe};
        li.premises.push_back(inner);
        return make_proof_node(std::move(li));
    };
    // the unreachable final skip is discharged from the contradictory branch
    ProofNode sk;
    sk.rule = RuleName::Skip;
    sk.conclusion = {aand(post, safe), pskip(), aand(post, safe), aand(post, safe)};
    ProofTree skip_branch =
        weaken(aand(anot(a2), aand(anot(a1), aor(a1, a2))), make_proof_node(std::move(sk)));

    ProofNode inner_if;
    inner_if.rule = RuleName::If;
    inner_if.conclusion = {aand(anot(a1), aor(a1, a2)), expanded->b, post, safe};
    inner_if.premises = {weaken(aand(a2, aand(anot(a1), aor(a1, a2))), branch_proof(a2, b2, num(0))),
                         skip_branch};

    ProofNode outer_if;
    outer_if.rule = RuleName::If;
    outer_if.conclusion = {aor(a1, a2), expanded, post, safe};
    outer_if.premises = {weaken(aand(a1, aor(a1, a2)), branch_proof(a1, b1, num(1))),
                         make_proof_node(std::move(inner_if))};
    CHECK(check_proof(make_proof_node(std::move(outer_if)), oracle).kind ==
          CheckResult::Kind::Accepted);
}
