// Shared domain types and the scenario schema.
#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace opsel {

/// Operator identifier. Rendered as "Op<N>".
struct OperatorId {
    int value = 0;

    friend auto operator<=>(const OperatorId&, const OperatorId&) = default;
};

std::string to_string(OperatorId id);

/// Parses "Op3" or "3".
std::optional<OperatorId> parse_operator_id(const std::string& text);

enum class QosParamKind { Bandwidth, Jitter, Delay, Ber };

enum class Direction { LargerBetter, SmallerBetter };

Direction direction_of(QosParamKind kind);
std::string to_string(QosParamKind kind);
std::optional<QosParamKind> parse_qos_kind(const std::string& text);

inline constexpr QosParamKind kAllQosKinds[] = {
    QosParamKind::Bandwidth, QosParamKind::Jitter, QosParamKind::Delay, QosParamKind::Ber};

/// Delivered or required QoS values. Units: bandwidth Kb/s, jitter and delay
/// ms, BER probability.
using QosProfile = std::map<QosParamKind, double>;

struct ServiceClass {
    std::string name;
    QosProfile requirements;
    std::map<std::string, double> session_rate_per_rat;  // RAT name -> Kb/s
    double mean_duration = 120.0;                        // s

    friend bool operator==(const ServiceClass&, const ServiceClass&) = default;
};

struct OperatorConfig {
    OperatorId id;
    std::string rat_name;
    double capacity = 0.0;  // Kb/s
    QosProfile delivered;
    double sp = 0.0;            // own-client price, units/Kbyte
    double cs = 0.0;            // guest service cost, units/Kbyte
    double arrival_rate = 0.0;  // sessions/s

    friend bool operator==(const OperatorConfig&, const OperatorConfig&) = default;
};

/// Operator strategy (Wu, Wop). Only the ratio matters for selection, but the
/// pair is kept so that Wop = 0 stays expressible.
struct StrategyWeights {
    double w_u = 1.0;
    double w_op = 1.0;

    static StrategyWeights from_ratio(double ratio) { return {ratio, 1.0}; }

    std::optional<double> ratio() const
    {
        if (w_op > 0.0) return w_u / w_op;
        return std::nullopt;
    }

    friend bool operator==(const StrategyWeights&, const StrategyWeights&) = default;
};

struct ScoreWeights {
    double w_q = 0.5;
    double w_p = 0.5;
    std::map<QosParamKind, double> qos_subweights;

    friend bool operator==(const ScoreWeights&, const ScoreWeights&) = default;
};

enum class AspirationMode { BestCandidate, Requirement };

std::string to_string(AspirationMode mode);
std::optional<AspirationMode> parse_aspiration_mode(const std::string& text);

struct SimSettings {
    double horizon = 0.0;  // s
    double warmup = 0.0;   // s
    int replications = 1;
    std::uint64_t seed = 1;
    /// Also transfer arrivals whose home network misses a QoS requirement.
    bool transfer_on_qos_violation = false;

    friend bool operator==(const SimSettings&, const SimSettings&) = default;
};

struct ScenarioConfig {
    std::vector<OperatorConfig> operators;
    ServiceClass service;
    ScoreWeights score_weights;
    AspirationMode aspiration_mode = AspirationMode::BestCandidate;
    std::map<OperatorId, StrategyWeights> strategy;
    SimSettings sim;

    const OperatorConfig& op(OperatorId id) const;
    const OperatorConfig* find_op(OperatorId id) const;

    /// Session bandwidth on the given operator's RAT.
    double session_rate(const OperatorConfig& op) const;

    /// Price normalization anchor: the largest sp among operators.
    double price_ref() const;

    /// Sets every operator's strategy to (ratio, 1).
    void set_uniform_ratio(double ratio);

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

struct Violation {
    std::string field;
    std::string rule;

    friend bool operator==(const Violation&, const Violation&) = default;
};

/// Three cooperating operators (UMTS, WLAN1, WLAN2) carrying one real-time
/// service, with Cs = sp.
ScenarioConfig default_scenario();

/// Arrival rate putting `load` Erlangs per session slot on an operator:
/// load * capacity / (session_rate * mean_duration).
double arrival_rate_for_load(double load, double capacity, double session_rate, double mean_duration);

std::vector<Violation> validate(const ScenarioConfig& config);

}  // namespace opsel
