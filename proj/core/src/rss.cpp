#include "hhl/rss.hpp"

namespace hhl::rss {

void RssParams::validate() const {
    if (!(b_min > 0 && b_min <= b_max)) throw std::invalid_argument("need 0 < b_min <= b_max");
    if (a_max < 0) throw std::invalid_argument("need a_max >= 0");
    if (rho < 0) throw std::invalid_argument("need rho >= 0");
    if (!(v_min >= 0 && v_min <= v_max)) throw std::invalid_argument("need 0 <= v_min <= v_max");
    if (!(t_lc > 0)) throw std::invalid_argument("need t_lc > 0");
}

double d_rss_pm(double v_front, double v_rear, double s, const RssParams& p) {
    double a = p.a_max_d();
    double reached = v_rear + a * s;
    return v_rear * s + a * s * s / 2 + reached * reached / (2 * p.b_min_d()) -
           v_front * v_front / (2 * p.b_max_d());
}

double d_rss(double v_front, double v_rear, double s, const RssParams& p) {
    if (v_front < 0 || v_rear < 0) throw NegativeVelocity("d_rss needs nonnegative velocities");
    return std::max(0.0, d_rss_pm(v_front, v_rear, s, p));
}

double d_rss(double v_front, double v_rear, const RssParams& p) {
    return d_rss(v_front, v_rear, p.rho_d(), p);
}

Term d_rss_pm_term(const Term& v_front, const Term& v_rear, const Term& s, const RssParams& p) {
    Term a = num(p.a_max);
    Term reached = add(v_rear, mul(a, s));
    return add(add(mul(v_rear, s), div_const(mul(a, mul(s, s)), 2)),
               sub(div_const(mul(reached, reached), 2 * p.b_min),
                   div_const(mul(v_front, v_front), 2 * p.b_max)));
}

Term d_rss_term(const Term& v_front, const Term& v_rear, const Term& s, const RssParams& p) {
    return tmax(num(0), d_rss_pm_term(v_front, v_rear, s, p));
}

bool lane_valid(double l) {
    return l == 1 || l == 1.5 || l == 2 || l == 2.5 || l == 3;
}

namespace {

// position/velocity after `dt` at constant acceleration, velocity clamped at 0
std::pair<double, double> roll(double y, double v, double a, double dt) {
    if (a < 0 && v + a * dt < 0) {
        double t0 = v / -a;
        return {y + v * t0 / 2, 0.0};
    }
    return {y + v * dt + a * dt * dt / 2, v + a * dt};
}

}  // namespace

CaDecision ca_monitor(const ScenarioState& s, const RssParams& p, double margin) {
    if (!lane_valid(s.sv.lane)) throw MalformedLane("SV lane " + std::to_string(s.sv.lane));
    for (const VehicleState& pov : s.pov)
        if (!lane_valid(pov.lane)) throw MalformedLane("POV lane " + std::to_string(pov.lane));

    bool changing = lane_changing(s.sv.lane);
    for (int i = 0; i < kNumPovs; ++i) {
        const VehicleState& pov = s.pov[i];
        if (!shares_lane(pov.lane, s.sv.lane)) continue;
        if (pov.y > s.sv.y) {
            // front gap, now and after coasting `margin` seconds at current a
            double gap_now = pov.y - s.sv.y;
            bool bad_now = gap_now <= d_rss(pov.v, s.sv.v, p);
            auto [ye, ve] = roll(s.sv.y, s.sv.v, s.sv.a, margin);
            double gap_pred = pov.y + pov.v * margin - ye;
            bool bad_pred = gap_pred <= d_rss(pov.v, std::max(0.0, ve), p);
            if (bad_now || bad_pred) {
                if (changing) return {CaAction::AbortLaneChange, i};
                return {CaAction::BrakeRequired, i};
            }
        } else if (changing) {
            // cut-in duty: rear gap while occupying two lanes
            double gap = s.sv.y - pov.y;
            if (gap <= d_rss(s.sv.v, pov.v, p)) return {CaAction::AbortLaneChange, i};
        }
    }
    return {};
}

}  // namespace hhl::rss
