// Discrete-event simulation of cooperating operators.
//
// Each operator receives Poisson session arrivals with exponential durations.
// An arrival is admitted at home when the home RAT has room for one session;
// otherwise the decision engine picks a cooperating operator with room, and if
// none exists the session is blocked. Guests consume the serving RAT's session
// rate. Statistics and revenues only count arrivals at or after the warmup.
//
// Random streams: every (operator, purpose) pair owns a mt19937_64 seeded with
// std::seed_seq{seed_lo32, seed_hi32, operator_index, purpose}, purpose 0 for
// inter-arrival times and 1 for durations. A duration is drawn for every
// arrival whatever its outcome, so two runs with the same seed see the same
// traffic regardless of the strategy weights.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "opsel/decision.hpp"
#include "opsel/model.hpp"
#include "opsel/stats.hpp"

namespace opsel {

using SessionId = std::uint64_t;

struct Session {
    SessionId id = 0;
    OperatorId home_op;
    OperatorId serving_op;
    double start = 0.0;
    double duration = 0.0;
    double rate = 0.0;    // Kb/s on the serving RAT
    double volume = 0.0;  // Kbyte
};

struct NetworkState {
    double capacity = 0.0;
    double used = 0.0;
    std::set<SessionId> active_sessions;
};

enum class EventKind { Departure = 0, Arrival = 1 };

struct OperatorLedger {
    std::uint64_t arrivals = 0;
    std::uint64_t blocked = 0;
    std::uint64_t served_home = 0;
    std::map<OperatorId, std::uint64_t> sent_guests;
    std::map<OperatorId, std::uint64_t> received_guests;
    double revenue_own = 0.0;
    double revenue_guest_hosting = 0.0;
    double revenue_exchanged_clients = 0.0;
    double cost_exchange = 0.0;

    std::uint64_t transferred() const;
    double global_profit() const;

    friend bool operator==(const OperatorLedger&, const OperatorLedger&) = default;
};

/// Transfer counts per (home, serving) pair.
struct SelectionMatrix {
    std::map<OperatorId, std::map<OperatorId, std::uint64_t>> counts;

    void add(const SelectionMatrix& other);

    /// Row percentages; rows without transfers are omitted. Every present row
    /// lists all serving operators seen in `operators` except the home.
    std::map<OperatorId, std::map<OperatorId, double>> percentages(
        const std::vector<OperatorId>& operators) const;

    friend bool operator==(const SelectionMatrix&, const SelectionMatrix&) = default;
};

struct SimReport {
    std::map<OperatorId, OperatorLedger> ledgers;
    std::map<OperatorId, double> blocking_probability;
    std::map<OperatorId, double> global_profit;
    SelectionMatrix selection;
    std::uint64_t seed = 0;
    double horizon = 0.0;
    double warmup = 0.0;

    std::uint64_t total_arrivals() const;

    friend bool operator==(const SimReport&, const SimReport&) = default;
};

/// One processed event, recorded when a trace is requested.
struct TraceRecord {
    double time = 0.0;
    EventKind kind = EventKind::Arrival;
    SessionId session = 0;
    OperatorId home;
    std::optional<OperatorId> serving;  // empty when blocked
    std::optional<Decision> decision;   // present when the engine was asked
    std::vector<double> used_after;     // per operator, config order
    bool counted = false;               // after warmup
};

using SimTrace = std::vector<TraceRecord>;

/// Throws ConfigError when validate(config) is not empty. `trace`, when
/// given, receives every processed event.
SimReport run_simulation(const ScenarioConfig& config, std::uint64_t seed, SimTrace* trace = nullptr);

struct OperatorAggregate {
    double blocking_mean = 0.0;
    std::optional<Interval> blocking_ci;  // undefined for a single replication
    double profit_mean = 0.0;
    std::optional<Interval> profit_ci;
};

struct ReplicationSet {
    std::vector<SimReport> reports;
    std::map<OperatorId, OperatorAggregate> aggregate;
    SelectionMatrix selection;  // summed over replications
    double level = 0.90;
};

/// Replication k uses seed base_seed + k. Replications run concurrently.
ReplicationSet run_replications(const ScenarioConfig& config, int n, std::uint64_t base_seed,
                                double level = 0.90);

}  // namespace opsel
