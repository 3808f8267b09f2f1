#include "doctest.h"

#include "hhl/rss.hpp"

#include <random>

using namespace hhl;
using namespace hhl::rss;

TEST_CASE("safety distance values against an exact rational oracle") {
    RssParams p;

    // independent computation with exact rationals
    auto exact = [&](const Rational& vf, const Rational& vr, const Rational& s) {
        Rational body = vr * s + p.a_max * s * s / 2 +
                        (vr + p.a_max * s) * (vr + p.a_max * s) / (2 * p.b_min) -
                        vf * vf / (2 * p.b_max);
        return body < 0 ? Rational(0) : body;
    };

    CHECK(d_rss(0, 0, p) ==
          doctest::Approx(exact(0, 0, p.rho).convert_to<double>()).epsilon(1e-15));
    CHECK(d_rss(0, 0, p) == doctest::Approx(0.0588).epsilon(1e-3));
    CHECK(d_rss(10, 10, p) ==
          doctest::Approx(exact(10, 10, p.rho).convert_to<double>()).epsilon(1e-15));

    // with zero response time and a moving front car only the negative
    // summand survives, so the clamp engages
    RssParams p0 = p;
    p0.rho = 0;
    CHECK(d_rss(20, 0, p0) == 0.0);
    CHECK(d_rss_pm(20, 0, 0, p) == doctest::Approx(-25.0));

    CHECK_THROWS_AS(d_rss(-1, 0, p), NegativeVelocity);
}

TEST_CASE("clamp identity and monotonicity") {
    RssParams p;
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0, 28), ur(0, 0.3);
    for (int i = 0; i < 1000; ++i) {
        double vf = u(rng), vr = u(rng), s = ur(rng);
        CHECK(d_rss(vf, vr, s, p) == std::max(0.0, d_rss_pm(vf, vr, s, p)));
    }
    // decreasing in the front speed
    for (int i = 0; i < 200; ++i) {
        double vf = u(rng), vr = u(rng);
        if (vf + 0.5 > 28) continue;
        CHECK(d_rss_pm(vf + 0.5, vr, p.rho_d(), p) < d_rss_pm(vf, vr, p.rho_d(), p));
    }
    // same-speed following distance grows with speed
    for (double v = 0; v < 27; v += 1.0)
        CHECK(d_rss(v + 1, v + 1, p) > d_rss(v, v, p));
}

TEST_CASE("symbolic and numeric safety distances agree") {
    RssParams p;
    auto vocab = std::make_shared<Vocabulary>();
    VarId vf = vocab->intern("v_f"), vr = vocab->intern("v_r");
    Term t = d_rss_term(var(vf), var(vr), num(p.rho), p);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 28);
    for (int i = 0; i < 500; ++i) {
        Store s(vocab);
        double a = u(rng), b = u(rng);
        s.set(vf, a);
        s.set(vr, b);
        CHECK(eval(t, s) == doctest::Approx(d_rss(a, b, p)).epsilon(1e-12));
    }
}

TEST_CASE("collision-avoidance monitor") {
    RssParams p;
    ScenarioState s;
    s.sv = {0, 14, 0, 1};
    s.pov[0] = {-40, 14, 0, 2};
    s.pov[1] = {200, 14, 0, 2};
    s.pov[2] = {300, 14, 0, 1};
    CHECK(ca_monitor(s, p).action == CaAction::Ok);

    // a close leader in the same lane demands braking
    s.pov[2] = {5, 14, 0, 1};
    CaDecision d = ca_monitor(s, p);
    CHECK(d.action == CaAction::BrakeRequired);
    CHECK(d.pov_index == 2);

    // insufficient rear gap while straddling lanes aborts the change
    s.pov[2] = {300, 14, 0, 1};
    s.sv = {0, 14, 0, 1.5};
    s.pov[0] = {-1, 14, 0, 2};
    d = ca_monitor(s, p);
    CHECK(d.action == CaAction::AbortLaneChange);
    CHECK(d.pov_index == 0);

    s.sv.lane = 1.25;
    CHECK_THROWS_AS(ca_monitor(s, p), MalformedLane);
}

TEST_CASE("one-way artifacts expose the printed quadruple") {
    RssParams p;
    OneWayArtifacts art = one_way_artifacts(p);
    // safety is strictly no-collision
    CHECK(to_string(art.quadruple.safety, *art.vocab) == "y_r < y_f");
    CHECK(classify(art.program->a ? atrue() : atrue()) == Openness::Both);  // smoke

    // the differential invariant holds along a run from a safe start
    Store s(art.vocab);
    s.set(art.y_f, 100);
    s.set(art.y_r, 0);
    s.set(art.v_f, 20);
    s.set(art.v_r, 15);
    s.set(art.t, 0);
    REQUIRE(satisfies(s, art.quadruple.pre));
    RunResult rr = run(art.program, s, {});
    REQUIRE(rr.status == RunStatus::Converged);
    CHECK(satisfies(rr.final_store, art.quadruple.post));
    CHECK_FALSE(check_along(rr.trace, art.quadruple.safety));
    for (const TraceEntry& e : rr.trace.entries)
        if (e.tag != TraceTag::Converged)
            CHECK(eval(art.invariant_margin, e.store) > -1e-6);

    // closed-form cross-check of the final positions: both cars brake to a
    // halt, the rear after accelerating through the response time
    double bmax = p.b_max_d(), bmin = p.b_min_d(), am = p.a_max_d(), rho = p.rho_d();
    double yf_stop = 100 + 20 * 20 / (2 * bmax);
    double vr_peak = 15 + am * rho;
    double yr_stop = 0 + 15 * rho + am * rho * rho / 2 + vr_peak * vr_peak / (2 * bmin);
    CHECK(rr.final_store.get(art.y_f) == doctest::Approx(yf_stop).epsilon(1e-9));
    CHECK(rr.final_store.get(art.y_r) == doctest::Approx(yr_stop).epsilon(1e-9));
}
