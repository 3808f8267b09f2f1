#include "doctest.h"

#include "hhl/exec.hpp"
#include "hhl/parser.hpp"

using namespace hhl;

namespace {
struct World {
    VocabPtr vocab = std::make_shared<Vocabulary>();
    Store store() { return Store(vocab); }
};
}  // namespace

TEST_CASE("countdown program converges through the flow and the assignment") {
    World w;
    VarId x = w.vocab->intern("x");
    Program p = pseq(pdwhile(gt(var(x), num(0)), Dynamics{{{x, num(-1)}}}),
                     passign(x, sub(var(x), num(1))));
    Store s0 = w.store();
    s0.set(x, 2.0);
    RunResult rr = run(p, s0, {});
    CHECK(rr.status == RunStatus::Converged);
    CHECK(rr.final_store.get(x) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(rr.total_time == doctest::Approx(2.0).epsilon(1e-9));

    bool saw_exit_at_zero = false, saw_interior = false;
    for (const TraceEntry& e : rr.trace.entries) {
        if (e.tag == TraceTag::FlowSample) {
            double xv = e.store.get(x);
            CHECK(xv > 0.0);
            CHECK(xv <= 2.0);
            saw_interior = true;
        }
        if (e.tag == TraceTag::DWhileExit) {
            CHECK(e.store.get(x) == doctest::Approx(0.0).epsilon(1e-9));
            saw_exit_at_zero = true;
        }
    }
    CHECK(saw_interior);
    CHECK(saw_exit_at_zero);
}

TEST_CASE("small-step reduction follows the reduction rules") {
    World w;
    VarId x = w.vocab->intern("x");
    Store s0 = w.store();
    s0.set(x, 0.0);

    // skip; beta  reduces to  beta
    Program beta = passign(x, add(var(x), num(5)));
    ExecState st{pseq(pskip(), beta), s0, 0};
    auto r1 = step(st, {});
    REQUIRE(std::holds_alternative<ExecState>(r1));
    CHECK(program_eq(std::get<ExecState>(r1).program, beta));

    // a bare assignment converges immediately
    auto r2 = step(ExecState{passign(x, sub(var(x), num(1))), s0, 0}, {});
    REQUIRE(std::holds_alternative<Converged>(r2));
    CHECK(std::get<Converged>(r2).store.get(x) == -1.0);

    // dwhile with exit detection lands exactly on the boundary
    Store s2 = w.store();
    s2.set(x, 2.0);
    ExecState cur{pdwhile(gt(var(x), num(0)), Dynamics{{{x, num(-1)}}}), s2, 0};
    RunOptions quick;
    quick.max_sample_dt = 0.5;
    for (int guard = 0; guard < 16; ++guard) {
        auto r = step(cur, quick);
        if (std::holds_alternative<Converged>(r)) {
            CHECK(std::get<Converged>(r).store.get(x) == doctest::Approx(0.0).epsilon(1e-9));
            CHECK(std::get<Converged>(r).time == doctest::Approx(2.0).epsilon(1e-9));
            return;
        }
        cur = std::get<ExecState>(r);
    }
    FAIL("dwhile did not exit");
}

TEST_CASE("flow exit times for the kinematic guards") {
    World w;
    VarId v = w.vocab->intern("v"), t = w.vocab->intern("t"), y = w.vocab->intern("y");
    Store s = w.store();

    s.set(v, 5.0);
    auto t1 = flow_exit_time(gt(var(v), num(0)), Dynamics{{{v, num(-294, 100)}}}, s, 100);
    REQUIRE(t1);
    CHECK(*t1 == doctest::Approx(5.0 / 2.94).epsilon(1e-9));

    s.set(t, 0.0);
    auto t2 = flow_exit_time(lt(var(t), num(3, 10)), Dynamics{{{t, num(1)}}}, s, 100);
    REQUIRE(t2);
    CHECK(*t2 == doctest::Approx(0.3).epsilon(1e-9));

    // cruise until the remaining distance equals the braking distance
    s.set(v, 10.0);
    s.set(y, 0.0);
    VarId ytgt = w.vocab->intern("y_tgt");
    s.set(ytgt, 140.0);
    Assertion guard = lt(div_const(mul(var(v), var(v)), Rational(294, 50)),
                         sub(var(ytgt), var(y)));
    auto t3 = flow_exit_time(guard, Dynamics{{{y, var(v)}, {v, num(0)}}}, s, 100);
    REQUIRE(t3);
    CHECK(*t3 == doctest::Approx(12.29931973).epsilon(1e-8));

    // guard already false: exit immediately
    s.set(v, 0.0);
    auto t4 = flow_exit_time(gt(var(v), num(0)), Dynamics{{{v, num(-1)}}}, s, 100);
    REQUIRE(t4);
    CHECK(*t4 == 0.0);
}

TEST_CASE("guard that never falsifies times out") {
    World w;
    VarId x = w.vocab->intern("x");
    Store s = w.store();
    s.set(x, 1.0);
    RunOptions opts;
    opts.time_budget = 2.0;
    RunResult rr = run(pdwhile(gt(var(x), num(0)), Dynamics{{{x, num(0)}}}), s, opts);
    CHECK(rr.status == RunStatus::Timeout);
}

TEST_CASE("untouched variables are bit-identical across a flow") {
    World w;
    VarId x = w.vocab->intern("x"), z = w.vocab->intern("z");
    Store s = w.store();
    s.set(x, 1.0);
    double zval = 0.1 + 0.2;  // not exactly representable sum, good canary
    s.set(z, zval);
    RunResult rr = run(pdwhile(gt(var(x), num(0)), Dynamics{{{x, num(-1)}}}), s, {});
    CHECK(rr.final_store.get(z) == zval);
    for (const TraceEntry& e : rr.trace.entries) CHECK(e.store.get(z) == zval);
}

TEST_CASE("determinism under different sampling resolutions") {
    World w;
    VarId y = w.vocab->intern("y"), v = w.vocab->intern("v");
    Program p = parse_program(
        "a := 0; dwhile v * v / 5.88 < 140 - y { y' = v, v' = a };"
        "a := -2.94; dwhile v > 0 { y' = v, v' = a }",
        w.vocab);
    Store s = w.store();
    s.set(y, 0);
    s.set(v, 10);
    s.set(w.vocab->id("a"), 0);
    RunOptions coarse, fine;
    coarse.max_sample_dt = 0.1;
    fine.max_sample_dt = 0.01;
    RunResult a = run(p, s, coarse), b = run(p, s, fine);
    CHECK(a.status == RunStatus::Converged);
    CHECK(std::abs(a.final_store.get(y) - b.final_store.get(y)) < 1e-6);
    CHECK(std::abs(a.final_store.get(v) - b.final_store.get(v)) < 1e-6);
    CHECK(a.final_store.get(y) == doctest::Approx(140.0).epsilon(1e-9));
}

TEST_CASE("exit stores sit on a guard boundary") {
    World w;
    VarId y = w.vocab->intern("y"), v = w.vocab->intern("v");
    Program p = parse_program("dwhile v > 0 && y < 30 { y' = v, v' = -1 }", w.vocab);
    Store s = w.store();
    s.set(y, 0);
    s.set(v, 6);
    RunResult rr = run(p, s, {});
    REQUIRE(rr.status == RunStatus::Converged);
    double vf = rr.final_store.get(v), yf = rr.final_store.get(y);
    CHECK((std::abs(vf) < 1e-6 || std::abs(yf - 30) < 1e-6));
}

TEST_CASE("case blocks dispatch to the first true branch") {
    World w;
    VarId x = w.vocab->intern("x");
    Program p = pcase({{lt(var(x), num(0)), passign(x, num(-1))},
                       {gt(var(x), num(0)), passign(x, num(1))}});
    Store s = w.store();
    s.set(x, 5);
    CHECK(run(p, s, {}).final_store.get(x) == 1.0);
    s.set(x, -5);
    CHECK(run(p, s, {}).final_store.get(x) == -1.0);
    s.set(x, 0);
    CHECK(run(p, s, {}).final_store.get(x) == 0.0);  // no branch applies
}

TEST_CASE("holes refuse to execute") {
    World w;
    Store s = w.store();
    CHECK_THROWS_AS(run(phole("F"), s, {}), HoleInProgram);
}

TEST_CASE("check_along reports the first violation") {
    World w;
    VarId yr = w.vocab->intern("y_r"), yf = w.vocab->intern("y_f");
    Store s = w.store();
    s.set(yr, 0);
    s.set(yf, 0);  // overlapping start
    Program p = pdwhile(lt(var(yr), num(5)), Dynamics{{{yr, num(1)}}});
    RunResult rr = run(p, s, {});
    auto viol = check_along(rr.trace, lt(var(yr), var(yf)));
    REQUIRE(viol);
    CHECK(viol->time == doctest::Approx(0.0).epsilon(0.02));
    CHECK_FALSE(check_along(rr.trace, atrue()));
}

TEST_CASE("declared POV triples flow implicitly") {
    World w;
    VarId y = w.vocab->intern("y"), v = w.vocab->intern("v");
    VarId y1 = w.vocab->intern("y_1"), v1 = w.vocab->intern("v_1"), a1 = w.vocab->intern("a_1");
    RunOptions opts;
    opts.pov_augment = {{y1, v1, a1}};
    Store s = w.store();
    s.set(y, 0);
    s.set(v, 5);
    s.set(y1, 100);
    s.set(v1, 7);
    s.set(a1, 0);
    Program p = pdwhile(lt(var(y), num(10)), Dynamics{{{y, var(v)}}});
    RunResult rr = run(p, s, opts);
    CHECK(rr.final_store.get(y) == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(rr.final_store.get(y1) == doctest::Approx(100 + 7 * 2.0).epsilon(1e-9));
}
