#pragma once

#include "treeforge/baselang.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace treeforge::cosim {

using baselang::BaseModule;
using baselang::State;
using baselang::Value;
using treekit::NodePtr;

struct AccessRecord {
    double time = 0.0;
    std::string name;
    baselang::Access access = baselang::Access::Read;
    Value value;

    bool operator==(const AccessRecord&) const = default;
};

struct AgendaEntry {
    std::string op_name;
    double period = 0.0; // seconds between invocations
};

/// The discrete-event side: a module instance with a clock, a periodic
/// operation agenda, and a log of every shared-variable access.
struct DeSession {
    BaseModule module;
    State state;
    std::set<std::string> shared_vars;
    std::vector<AgendaEntry> agenda;
    double clock = 0.0;
    std::vector<AccessRecord> access_log;

    // Invocation counters, one per agenda entry: entry i has already run
    // next_invocation[i] - 1 times; its next run is at next_invocation[i]
    // times its period. Integer counters keep schedules drift-free.
    std::vector<std::uint64_t> next_invocation;
};

struct PlantState {
    std::string name;
    double initial = 0.0;
};

/// The continuous side: named reals advanced by forward Euler over
/// derivative expressions written in the base expression language.
struct PlantSpec {
    std::vector<PlantState> states;
    std::map<std::string, NodePtr> derivatives; // plant state -> d/dt expression
    std::map<std::string, std::string> outputs; // shared DE variable <- plant state
    std::set<std::string> inputs;               // shared variables the derivatives read
    double h = 0.0;                             // integration substep
};

struct CosimConfig {
    double sync_step = 0.0; // H: data exchange interval
    double end_time = 0.0;
};

struct Scenario {
    BaseModule module;
    PlantSpec plant;
    CosimConfig config;
    std::vector<AgendaEntry> agenda;
};

/// Scenario text: a full base module, then a `plant` section
/// (`state n := r`, `deriv n := exp`, `output shared <- n`, `h := r`), then
/// a `cosim` section (`H := r`, `end := r`, `agenda op every r`).
Scenario parse_scenario(std::string_view text);

DeSession make_session(const Scenario& scenario);

struct RunUntilResult {
    std::vector<std::pair<double, std::string>> events; // (scheduled time, op)
    std::vector<AccessRecord> accesses;                 // appended this run
};

/// Executes every agenda invocation scheduled in (session.clock, time_bound],
/// in time order with ties broken by agenda order, then sets the clock to the
/// bound. Shared accesses are logged with the invocation's scheduled time.
RunUntilResult run_until(DeSession& session, double time_bound);

using PlantValues = std::map<std::string, double>;

PlantValues initial_plant_values(const PlantSpec& plant);

/// One forward-Euler substep: every derivative is evaluated against the
/// pre-step state and the frozen inputs, then applied at once.
PlantValues plant_step(const BaseModule& module, const PlantSpec& plant,
                       const PlantValues& state, const State& inputs, double h);

struct TimelineRow {
    double t = 0.0;
    PlantValues plant;                                  // plant state at t
    State shared;                                       // DE shared values at t
    std::vector<std::pair<double, std::string>> events; // DE events in (t-H, t]
};

struct CosimResult {
    std::vector<TimelineRow> timeline; // initial row plus one per sync step
    std::vector<AccessRecord> access_log;
    DeSession session; // final state, clock == end time
};

/// Fixed-step master: at each sync point, copy plant outputs into the DE
/// shared state, run the DE side one sync step, freeze the DE shared values
/// as plant inputs, and integrate the plant across the step.
CosimResult cosimulate(const Scenario& scenario);

/// Tab-separated rows: time, plant values, shared values, events.
std::string render_timeline(const std::vector<TimelineRow>& timeline);

std::string render_access_log(const std::vector<AccessRecord>& log);

} // namespace treeforge::cosim
