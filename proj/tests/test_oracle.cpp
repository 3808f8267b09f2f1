#include "doctest.h"

#include "hhl/oracle.hpp"
#include "hhl/rss.hpp"

using namespace hhl;

namespace {

struct Fixture {
    VocabPtr vocab = std::make_shared<Vocabulary>();
    VarId vf, vr, t, e;
    OracleConfig cfg;

    Fixture() {
        vf = vocab->intern("v_f");
        vr = vocab->intern("v_r");
        t = vocab->intern("t");
        e = vocab->intern("e");
        cfg.box.set(vf, {0, 28});
        cfg.box.set(vr, {0, 28});
        cfg.box.set(t, {0, 0.3});
        cfg.box.set(e, {-100, 100});
        cfg.seed = 11;
    }
    ArithOracle oracle() const { return ArithOracle(vocab, cfg); }
};

}  // namespace

TEST_CASE("falsify finds easy counterexamples and respects validity") {
    Fixture fx;
    ArithOracle o = fx.oracle();

    // v >= 0 -> v^2 >= 0 has no counterexample
    Assertion valid = implies(ge(var(fx.vr), num(0)), ge(mul(var(fx.vr), var(fx.vr)), num(0)));
    CHECK_FALSE(o.falsify(valid));

    // v_r < v_f is falsifiable, and the witness really falsifies it
    auto w = o.falsify(lt(var(fx.vr), var(fx.vf)));
    REQUIRE(w);
    CHECK(w->get(fx.vr) >= w->get(fx.vf));
}

TEST_CASE("certify discharges the simple obligations") {
    Fixture fx;
    ArithOracle o = fx.oracle();
    CHECK(o.certify(le(num(0), tmax(num(0), var(fx.e)))));
    CHECK(o.certify(implies(gt(var(fx.vr), num(0)), lt(sub(num(0), var(fx.vr)), num(0)))));
}

TEST_CASE("the response-time monotonicity obligation certifies") {
    // dRSS_pm(v_f, v_r, rho - t) < 0 together with the physical bounds forces
    // the rear car to be strictly slower; this is the tangent obligation from
    // the one-way differential invariant
    Fixture fx;
    rss::RssParams p;
    Term s = sub(num(p.rho), var(fx.t));
    Term pm = rss::d_rss_pm_term(var(fx.vf), var(fx.vr), s, p);
    Assertion ob = implies(aand_all({ge(var(fx.vr), num(0)), ge(var(fx.vf), num(0)),
                                     ge(s, num(0)), lt(pm, num(0))}),
                           ge(sub(var(fx.vf), var(fx.vr)), num(0)));
    ArithOracle o = fx.oracle();
    auto depth = o.certify(ob);
    REQUIRE(depth.has_value());
    CHECK(*depth <= 12);
}

TEST_CASE("falsify and certify never both succeed") {
    Fixture fx;
    ArithOracle o = fx.oracle();
    std::vector<Assertion> cases = {
        ge(var(fx.e), num(0)),
        implies(ge(var(fx.vr), num(0)), ge(var(fx.vr), num(1))),
        le(mul(var(fx.t), var(fx.t)), num(1)),
        eq(var(fx.vf), var(fx.vr)),
    };
    for (const Assertion& a : cases) {
        bool falsified = o.falsify(a).has_value();
        bool certified = o.certify(a).has_value();
        CHECK_FALSE((falsified && certified));
    }
}

TEST_CASE("certification is monotone in depth") {
    Fixture fx;
    rss::RssParams p;
    Term s = sub(num(p.rho), var(fx.t));
    Term pm = rss::d_rss_pm_term(var(fx.vf), var(fx.vr), s, p);
    Assertion ob = implies(aand_all({ge(var(fx.vr), num(0)), ge(var(fx.vf), num(0)),
                                     ge(s, num(0)), lt(pm, num(0))}),
                           ge(sub(var(fx.vf), var(fx.vr)), num(0)));
    ArithOracle o = fx.oracle();
    auto d0 = o.certify(ob);
    REQUIRE(d0);
    for (int extra : {2, 4}) CHECK(o.certify(ob, *d0 + extra));
}

TEST_CASE("falsified witnesses evaluate false") {
    Fixture fx;
    ArithOracle o = fx.oracle();
    Assertion a = implies(ge(var(fx.vr), num(0)), le(var(fx.vr), num(14)));
    auto w = o.falsify(a);
    REQUIRE(w);
    CHECK_FALSE(satisfies(*w, a));
}
