// Operational semantics: small-step reduction and a whole-run executor with
// exact event handling for the piecewise-affine dynamics class.
#pragma once

#include "hhl/program.hpp"

#include <functional>
#include <optional>
#include <variant>

namespace hhl {

struct PovTriple {
    VarId pos, vel, acc;
};

struct RunOptions {
    double time_budget = 120.0;        // simulated seconds
    double max_sample_dt = 0.01;       // flow sampling resolution
    std::size_t max_flow_samples = 200000;  // per flow; widens dt when exceeded
    std::size_t max_discrete_steps = 1000000;
    // flows are implicitly extended with pos' = vel, vel' = acc for each
    // declared principal other vehicle
    std::vector<PovTriple> pov_augment;
};

enum class TraceTag : std::uint8_t { DiscreteStep, FlowSample, DWhileExit, Converged };

struct TraceEntry {
    double time;
    Store store;
    TraceTag tag;
};

struct Trace {
    std::vector<TraceEntry> entries;
};

struct ExecState {
    Program program;
    Store store;
    double time = 0;
};

struct Converged {
    Store store;
    double time = 0;
};

struct HoleInProgram : std::runtime_error {
    explicit HoleInProgram(const std::string& w) : std::runtime_error(w) {}
};
struct StuckState : std::runtime_error {
    explicit StuckState(const std::string& w) : std::runtime_error(w) {}
};

// One reduction step; dwhile flows advance to the earlier of the next
// sampling boundary and the guard falsification time.
std::variant<ExecState, Converged> step(const ExecState& s, const RunOptions& opts);

enum class RunStatus : std::uint8_t { Converged, Timeout };

struct RunResult {
    RunStatus status = RunStatus::Converged;
    Store final_store;
    double total_time = 0;
    Trace trace;
};

RunResult run(const Program& p, const Store& init, const RunOptions& opts);

// Streaming variant; the trace is not materialized.
using TraceObserver = std::function<void(double, const Store&, TraceTag)>;
RunResult run_observed(const Program& p, const Store& init, const RunOptions& opts,
                       const TraceObserver& obs);

// Smallest nonnegative time at which the open guard is falsified along the
// flow, or nullopt if it stays true for the whole budget.
std::optional<double> flow_exit_time(const Assertion& guard, const Dynamics& dyn,
                                     const Store& store, double budget,
                                     const RunOptions& opts = {});

struct Violation {
    double time;
    Store store;
};
std::optional<Violation> check_along(const Trace& trace, const Assertion& safe);

// Evolve a store along dynamics for a fixed duration (no guard).
Store flow_evolve(const Dynamics& dyn, const Store& store, double dt, const RunOptions& opts);

}  // namespace hhl
