#include "hhl/rss.hpp"

namespace hhl::rss {

namespace {

Assertion dwh_post(const std::vector<VariantRow>& vars) {
    std::vector<Assertion> posts;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        std::vector<Assertion> conj{eq(vars[i].variant, num(0))};
        for (std::size_t j = 0; j < vars.size(); ++j)
            if (j != i) conj.push_back(ge(vars[j].variant, num(0)));
        posts.push_back(aand_all(conj));
    }
    return aor_all(posts);
}

Assertion dwh_safety(const std::vector<InvariantRow>& invs, const std::vector<VariantRow>& vars) {
    std::vector<Assertion> saf;
    for (auto& row : invs)
        saf.push_back(row.rel == InvRel::Eq   ? eq(row.e, num(0))
                      : row.rel == InvRel::Gt ? gt(row.e, num(0))
                                              : ge(row.e, num(0)));
    for (auto& v : vars) saf.push_back(ge(v.variant, num(0)));
    return aand_all(saf);
}

ProofTree dwh_node(Assertion pre, Program prog, std::vector<InvariantRow> invs,
                   std::vector<VariantRow> vars) {
    ProofNode n;
    n.rule = RuleName::DWhMulti;
    n.conclusion = {std::move(pre), std::move(prog), dwh_post(vars), dwh_safety(invs, vars)};
    n.invariants = std::move(invs);
    n.variants = std::move(vars);
    return make_proof_node(std::move(n));
}

ProofTree limp(Assertion pre, Assertion post, Assertion safety, ProofTree premise) {
    ProofNode n;
    n.rule = RuleName::LImp;
    n.conclusion = {std::move(pre), premise->conclusion.program, std::move(post),
                    std::move(safety)};
    n.premises.push_back(std::move(premise));
    return make_proof_node(std::move(n));
}

ProofTree seq_node(ProofTree p1, ProofTree p2) {
    ProofNode n;
    n.rule = RuleName::Seq;
    n.conclusion = {p1->conclusion.pre, pseq(p1->conclusion.program, p2->conclusion.program),
                    p2->conclusion.post, p1->conclusion.safety};
    n.premises = {std::move(p1), std::move(p2)};
    return make_proof_node(std::move(n));
}

ProofTree if_node(Assertion pre, Assertion guard, ProofTree then_p, ProofTree else_p) {
    ProofNode n;
    n.rule = RuleName::If;
    n.conclusion = {std::move(pre),
                    pif(guard, then_p->conclusion.program, else_p->conclusion.program),
                    then_p->conclusion.post, then_p->conclusion.safety};
    n.premises = {std::move(then_p), std::move(else_p)};
    return make_proof_node(std::move(n));
}

ProofTree assign_node(Program prog, Assertion post) {
    ProofNode n;
    n.rule = RuleName::Assign;
    Assertion substituted = subst(post, prog->var, prog->rhs);
    n.conclusion = {substituted, std::move(prog), post, aor(post, substituted)};
    return make_proof_node(std::move(n));
}

}  // namespace

OneWayArtifacts one_way_artifacts(const RssParams& p, const OneWayMutation& mut) {
    p.validate();
    OneWayArtifacts art;
    art.vocab = std::make_shared<Vocabulary>();
    VarId yf = art.y_f = art.vocab->intern("y_f");
    VarId yr = art.y_r = art.vocab->intern("y_r");
    VarId vf = art.v_f = art.vocab->intern("v_f");
    VarId vr = art.v_r = art.vocab->intern("v_r");
    VarId tv = art.t = art.vocab->intern("t");

    Term rho = num(p.rho);
    Term gap = sub(var(yf), var(yr));

    // clamped safety distance with a symbolic response time; the mutated
    // variants are only ever used inside the differential invariant
    auto drss = [&](const Term& s, bool mutated) {
        RssParams q = p;
        if (mutated && mut.swap_braking_rates) std::swap(q.b_min, q.b_max);
        Term a = num(q.a_max);
        Term reached = add(var(vr), mul(a, s));
        Term body = add(mul(var(vr), s),
                        sub(div_const(mul(reached, reached), 2 * q.b_min),
                            div_const(mul(var(vf), var(vf)), 2 * q.b_max)));
        if (!(mutated && mut.drop_response_quadratic))
            body = add(body, div_const(mul(a, mul(s, s)), 2));
        return tmax(num(0), body);
    };

    Term s_rem = sub(rho, var(tv));
    Term inv_margin = sub(gap, drss(s_rem, true));
    art.invariant_margin = inv_margin;

    // dynamics of the front car, and of the rear car before/after the
    // response time elapses
    Dynamics d_f{{{yf, var(vf)}, {vf, num(-p.b_max)}}};
    Dynamics d_r1{{{yr, var(vr)}, {vr, num(p.a_max)}, {tv, num(1)}}};
    Dynamics d_r2{{{yr, var(vr)}, {vr, num(-p.b_min)}}};
    auto merged = [](const Dynamics& a, const Dynamics& b) {
        Dynamics d = a;
        for (auto& o : b.odes) d.odes.push_back(o);
        return d;
    };

    Assertion vf_stopped = eq(var(vf), num(0));
    Program a1 = passign(tv, num(0));
    Program a2 = pdwhile(aand(gt(var(vf), num(0)), lt(var(tv), rho)), merged(d_f, d_r1));
    Program a3a = pdwhile(lt(var(tv), rho), d_r1);
    Program a3b = pdwhile(gt(var(vr), num(0)), d_r2);
    Program a3 = pseq(a3a, a3b);
    Program a5 = pdwhile(aand(gt(var(vf), num(0)), gt(var(vr), num(0))), merged(d_f, d_r2));
    Program a6 = pdwhile(gt(var(vr), num(0)), d_r2);
    Program a7 = pdwhile(gt(var(vf), num(0)), d_f);
    Program a67 = pif(vf_stopped, a6, a7);
    Program a47 = pseq(a5, a67);
    Program a37 = pif(vf_stopped, a3, a47);
    art.program = pseq(a1, pseq(a2, a37));

    Assertion A = aand_all({ge(var(vr), num(0)), ge(var(vf), num(0)), gt(gap, drss(rho, false))});
    Assertion B = aand(eq(var(vr), num(0)), vf_stopped);
    Assertion S = lt(var(yr), var(yf));
    art.quadruple = {A, art.program, B, S};

    Assertion S_inv = gt(inv_margin, num(0));
    Assertion C = aand_all(
        {ge(var(vr), num(0)), ge(var(vf), num(0)), eq(var(tv), num(0)), gt(gap, drss(rho, false))});
    Assertion D = aand_all({aor(aand(ge(var(vf), num(0)), eq(var(tv), rho)),
                                aand(vf_stopped, le(var(tv), rho))),
                            ge(var(vr), num(0)), S_inv});
    Assertion D_top = aand_all({vf_stopped, le(var(tv), rho), ge(var(vr), num(0)), S_inv});
    Assertion E = aand_all({vf_stopped, eq(var(tv), rho), ge(var(vr), num(0)), S_inv});
    Assertion D_bot = aand_all({ge(var(vf), num(0)), eq(var(tv), rho), ge(var(vr), num(0)), S_inv});
    Assertion F = aand_all({aor(aand(vf_stopped, ge(var(vr), num(0))),
                                aand(ge(var(vf), num(0)), eq(var(vr), num(0)))),
                            eq(var(tv), rho), S_inv});
    Assertion F_top = aand_all({vf_stopped, ge(var(vr), num(0)), eq(var(tv), rho), S_inv});
    Assertion F_bot = aand_all({ge(var(vf), num(0)), eq(var(vr), num(0)), eq(var(tv), rho), S_inv});

    InvariantRow inv_vr{var(vr), InvRel::Ge};
    InvariantRow inv_vf0{var(vf), InvRel::Eq};
    InvariantRow inv_vr0{var(vr), InvRel::Eq};
    InvariantRow inv_trem{s_rem, InvRel::Eq};
    InvariantRow inv_gap{inv_margin, InvRel::Gt};
    Term m_bmax = num(-p.b_max), m_bmin = num(-p.b_min);

    // line 1
    ProofTree n1 = limp(A, C, S, assign_node(a1, C));

    // line 2
    ProofTree n2raw =
        dwh_node(C, a2, {inv_vr, inv_gap}, {{var(vf), m_bmax}, {s_rem, num(-1)}});
    ProofTree n2 = limp(C, D, S, limp(C, D, S_inv, n2raw));

    // line 3 (front car already stopped)
    ProofTree n3a = limp(D_top, E, S_inv,
                         dwh_node(D_top, a3a, {inv_vr, inv_vf0, inv_gap}, {{s_rem, num(-1)}}));
    ProofTree n3b = limp(E, B, S_inv,
                         dwh_node(E, a3b, {inv_vf0, inv_trem, inv_gap}, {{var(vr), m_bmin}}));
    ProofTree n3 = limp(aand(vf_stopped, D), B, S_inv, seq_node(n3a, n3b));

    // lines 5-7 (both cars still moving)
    ProofTree n5 = limp(D_bot, F, S_inv,
                        dwh_node(D_bot, a5, {inv_trem, inv_gap},
                                 {{var(vf), m_bmax}, {var(vr), m_bmin}}));
    ProofTree n6 = limp(aand(vf_stopped, F), B, S_inv,
                        dwh_node(F_top, a6, {inv_trem, inv_vf0, inv_gap}, {{var(vr), m_bmin}}));
    ProofTree n7 = limp(aand(anot(vf_stopped), F), B, S_inv,
                        dwh_node(F_bot, a7, {inv_vr0, inv_trem, inv_gap}, {{var(vf), m_bmax}}));
    ProofTree n67 = if_node(F, vf_stopped, n6, n7);
    ProofTree n47 = limp(aand(anot(vf_stopped), D), B, S_inv, seq_node(n5, n67));

    ProofTree n37 = limp(D, B, S, if_node(D, vf_stopped, n3, n47));
    art.proof = seq_node(n1, seq_node(n2, n37));
    // share the proof's program tree so schema checks compare identical nodes
    art.program = art.proof->conclusion.program;
    art.quadruple.program = art.program;
    return art;
}

Box one_way_box(const OneWayArtifacts& art, const RssParams& p) {
    Box box;
    box.set(art.v_f, {0, p.v_max_d()});
    box.set(art.v_r, {0, p.v_max_d()});
    box.set(art.y_f, {-50, 500});
    box.set(art.y_r, {-50, 500});
    box.set(art.t, {0, p.rho_d()});
    return box;
}

}  // namespace hhl::rss
