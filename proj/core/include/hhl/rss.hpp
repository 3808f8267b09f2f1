// RSS safety distances, the multi-lane collision-avoidance monitor, and the
// one-way traffic verification artifacts.
#pragma once

#include "hhl/checker.hpp"

#include <array>

namespace hhl::rss {

struct RssParams {
    Rational rho{3, 10};     // response time, s
    Rational a_max{49, 50};  // max acceleration of the rear car, m/s^2
    Rational b_min{147, 50}; // max comfortable braking, m/s^2
    Rational b_max{8};       // max emergency braking of the front car, m/s^2
    Rational v_min{10};      // legal minimum speed, m/s
    Rational v_max{28};      // legal maximum speed, m/s
    Rational t_lc{3};        // lane-change duration bound, s

    void validate() const;

    double rho_d() const { return rho.convert_to<double>(); }
    double a_max_d() const { return a_max.convert_to<double>(); }
    double b_min_d() const { return b_min.convert_to<double>(); }
    double b_max_d() const { return b_max.convert_to<double>(); }
    double v_min_d() const { return v_min.convert_to<double>(); }
    double v_max_d() const { return v_max.convert_to<double>(); }
    double t_lc_d() const { return t_lc.convert_to<double>(); }
};

struct NegativeVelocity : std::runtime_error {
    explicit NegativeVelocity(const std::string& w) : std::runtime_error(w) {}
};

// unclamped safety-distance body, signed
double d_rss_pm(double v_front, double v_rear, double response_time, const RssParams& p);

// clamped RSS distance; the optional response-time override supports the
// three-argument form with the remaining response time
double d_rss(double v_front, double v_rear, const RssParams& p);
double d_rss(double v_front, double v_rear, double response_time, const RssParams& p);

// symbolic forms
Term d_rss_pm_term(const Term& v_front, const Term& v_rear, const Term& response_time,
                   const RssParams& p);
Term d_rss_term(const Term& v_front, const Term& v_rear, const Term& response_time,
                const RssParams& p);

// ------------------------------------------------------------ lane occupancy

struct MalformedLane : std::runtime_error {
    explicit MalformedLane(const std::string& w) : std::runtime_error(w) {}
};

bool lane_valid(double l);
inline bool lane_changing(double l) { return l != static_cast<long>(l); }
// both lanes share iff the lane difference is at most half a lane
inline bool shares_lane(double la, double lb) { return std::abs(la - lb) <= 0.5; }

struct VehicleState {
    double y = 0;     // longitudinal position, m
    double v = 0;     // longitudinal velocity, m/s
    double a = 0;     // longitudinal acceleration, m/s^2
    double lane = 1;  // half-integral while changing lanes
};

constexpr int kNumPovs = 3;

struct ScenarioState {
    VehicleState sv;
    std::array<VehicleState, kNumPovs> pov;
    double y_tgt = 0;
};

enum class CaAction : std::uint8_t { Ok, BrakeRequired, AbortLaneChange };

struct CaDecision {
    CaAction action = CaAction::Ok;
    int pov_index = -1;
};

// Collision-avoidance monitor: flags a front-gap violation (current, or
// predicted within `margin` seconds at the current acceleration), and during
// a lane change additionally demands front and rear gaps in the shared lanes.
CaDecision ca_monitor(const ScenarioState& s, const RssParams& p, double margin);
inline CaDecision ca_monitor(const ScenarioState& s, const RssParams& p) {
    return ca_monitor(s, p, p.rho_d());
}

// ----------------------------------------------------- one-way traffic suite

struct OneWayMutation {
    bool swap_braking_rates = false;   // b_min and b_max swapped inside the invariant
    bool drop_response_quadratic = false;  // a_max rho^2 / 2 summand removed
};

struct OneWayArtifacts {
    VocabPtr vocab;
    VarId y_f, y_r, v_f, v_r, t;
    Program program;
    HoareQuadruple quadruple;
    ProofTree proof;
    // y_f - y_r - dRSS(v_f, v_r, rho - t), the differential invariant
    Term invariant_margin;
};

OneWayArtifacts one_way_artifacts(const RssParams& p, const OneWayMutation& mut = {});

// default physical box over the one-way variables
Box one_way_box(const OneWayArtifacts& art, const RssParams& p);

}  // namespace hhl::rss
