#include "opsel/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <stdexcept>

namespace opsel {

std::string to_string(OperatorId id) { return "Op" + std::to_string(id.value); }

std::optional<OperatorId> parse_operator_id(const std::string& text)
{
    std::string_view digits = text;
    if (digits.size() > 2 && (digits.substr(0, 2) == "Op" || digits.substr(0, 2) == "op"))
        digits.remove_prefix(2);
    int value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty())
        return std::nullopt;
    return OperatorId{value};
}

Direction direction_of(QosParamKind kind)
{
    return kind == QosParamKind::Bandwidth ? Direction::LargerBetter : Direction::SmallerBetter;
}

std::string to_string(QosParamKind kind)
{
    switch (kind) {
    case QosParamKind::Bandwidth: return "bandwidth";
    case QosParamKind::Jitter: return "jitter";
    case QosParamKind::Delay: return "delay";
    case QosParamKind::Ber: return "ber";
    }
    return "unknown";
}

std::optional<QosParamKind> parse_qos_kind(const std::string& text)
{
    for (QosParamKind kind : kAllQosKinds)
        if (to_string(kind) == text) return kind;
    return std::nullopt;
}

std::string to_string(AspirationMode mode)
{
    return mode == AspirationMode::BestCandidate ? "best-candidate" : "requirement";
}

std::optional<AspirationMode> parse_aspiration_mode(const std::string& text)
{
    if (text == "best-candidate") return AspirationMode::BestCandidate;
    if (text == "requirement") return AspirationMode::Requirement;
    return std::nullopt;
}

const OperatorConfig* ScenarioConfig::find_op(OperatorId id) const
{
    auto it = std::find_if(operators.begin(), operators.end(),
                           [id](const OperatorConfig& op) { return op.id == id; });
    return it == operators.end() ? nullptr : &*it;
}

const OperatorConfig& ScenarioConfig::op(OperatorId id) const
{
    if (const auto* found = find_op(id)) return *found;
    throw std::out_of_range("unknown operator " + to_string(id));
}

double ScenarioConfig::session_rate(const OperatorConfig& op) const
{
    auto it = service.session_rate_per_rat.find(op.rat_name);
    if (it == service.session_rate_per_rat.end())
        throw std::out_of_range("no session rate for RAT " + op.rat_name);
    return it->second;
}

double ScenarioConfig::price_ref() const
{
    double ref = 0.0;
    for (const auto& op : operators) ref = std::max(ref, op.sp);
    return ref;
}

void ScenarioConfig::set_uniform_ratio(double ratio)
{
    strategy.clear();
    for (const auto& op : operators) strategy[op.id] = StrategyWeights::from_ratio(ratio);
}

double arrival_rate_for_load(double load, double capacity, double session_rate, double mean_duration)
{
    return load * capacity / (session_rate * mean_duration);
}

namespace {

// Per-slot offered load of each default operator. Light enough that a
// preferred destination is practically never full when an overflow happens,
// so transfer directions are set by the cost function alone.
constexpr double kUmtsLoad = 0.26;
constexpr double kWlan1Load = 0.39;
constexpr double kWlan2Load = 0.14;

constexpr double kMeanDuration = 120.0;

}  // namespace

ScenarioConfig default_scenario()
{
    ScenarioConfig cfg;

    cfg.service.name = "real-time";
    cfg.service.requirements = {
        {QosParamKind::Jitter, 10.0}, {QosParamKind::Delay, 100.0}, {QosParamKind::Ber, 1e-3}};
    cfg.service.session_rate_per_rat = {{"UMTS", 128.0}, {"WLAN1", 512.0}, {"WLAN2", 512.0}};
    cfg.service.mean_duration = kMeanDuration;

    auto make_op = [&](int id, std::string rat, double capacity, double jitter, double delay,
                       double ber, double price, double load) {
        OperatorConfig op;
        op.id = OperatorId{id};
        op.rat_name = std::move(rat);
        op.capacity = capacity;
        op.delivered = {{QosParamKind::Bandwidth, capacity},
                        {QosParamKind::Jitter, jitter},
                        {QosParamKind::Delay, delay},
                        {QosParamKind::Ber, ber}};
        op.sp = price;
        op.cs = price;
        op.arrival_rate = arrival_rate_for_load(
            load, capacity, cfg.service.session_rate_per_rat.at(op.rat_name), kMeanDuration);
        return op;
    };

    cfg.operators.push_back(make_op(1, "UMTS", 1700.0, 6.0, 19.0, 1e-3, 0.9, kUmtsLoad));
    cfg.operators.push_back(make_op(2, "WLAN1", 11000.0, 10.0, 30.0, 1e-5, 0.1, kWlan1Load));
    cfg.operators.push_back(make_op(3, "WLAN2", 5500.0, 10.0, 45.0, 1e-5, 0.5, kWlan2Load));

    cfg.score_weights.w_q = 0.5;
    cfg.score_weights.w_p = 0.5;
    cfg.score_weights.qos_subweights = {{QosParamKind::Jitter, 1.0}};
    cfg.aspiration_mode = AspirationMode::BestCandidate;
    cfg.set_uniform_ratio(1.0);

    cfg.sim.horizon = 8.0e6;
    cfg.sim.warmup = 0.1 * cfg.sim.horizon;
    cfg.sim.replications = 10;
    cfg.sim.seed = 1;
    return cfg;
}

namespace {

constexpr double kWeightSumTol = 1e-9;

void check_profile(const QosProfile& profile, const std::string& field,
                   std::vector<Violation>& out)
{
    for (const auto& [kind, value] : profile) {
        const std::string name = field + "." + to_string(kind);
        if (!std::isfinite(value) || value <= 0.0)
            out.push_back({name, "must be > 0"});
        else if (kind == QosParamKind::Ber && value >= 1.0)
            out.push_back({name, "BER must be in (0, 1)"});
    }
}

}  // namespace

std::vector<Violation> validate(const ScenarioConfig& config)
{
    std::vector<Violation> out;

    if (config.operators.size() < 2) out.push_back({"operators", "at least 2 operators required"});

    std::set<OperatorId> ids;
    for (std::size_t i = 0; i < config.operators.size(); ++i) {
        const auto& op = config.operators[i];
        const std::string base = "operators[" + std::to_string(i) + "]";
        if (!ids.insert(op.id).second) out.push_back({base + ".id", "duplicate operator id"});
        if (!(op.capacity > 0.0)) out.push_back({base + ".capacity", "must be > 0"});
        if (!(op.sp >= 0.0)) out.push_back({base + ".sp", "must be >= 0"});
        if (!(op.cs >= 0.0)) out.push_back({base + ".cs", "must be >= 0"});
        if (!(op.arrival_rate >= 0.0)) out.push_back({base + ".arrival_rate", "must be >= 0"});
        check_profile(op.delivered, base + ".delivered", out);
        if (!config.service.session_rate_per_rat.contains(op.rat_name))
            out.push_back({"service.session_rate_per_rat",
                           "no session rate for RAT '" + op.rat_name + "'"});
        for (const auto& [kind, w] : config.score_weights.qos_subweights)
            if (!op.delivered.contains(kind))
                out.push_back({base + ".delivered",
                               "missing scored parameter '" + to_string(kind) + "'"});
        if (!config.strategy.contains(op.id))
            out.push_back({"strategy", "no strategy weights for " + to_string(op.id)});
    }

    const auto& svc = config.service;
    if (svc.requirements.empty())
        out.push_back({"service.requirements", "at least one parameter required"});
    check_profile(svc.requirements, "service.requirements", out);
    for (const auto& [rat, rate] : svc.session_rate_per_rat)
        if (!(rate > 0.0))
            out.push_back({"service.session_rate_per_rat." + rat, "must be > 0"});
    if (!(svc.mean_duration > 0.0)) out.push_back({"service.mean_duration", "must be > 0"});

    const auto& sw = config.score_weights;
    if (!(sw.w_q >= 0.0) || !(sw.w_p >= 0.0))
        out.push_back({"score_weights", "w_q and w_p must be >= 0"});
    if (std::abs(sw.w_q + sw.w_p - 1.0) > kWeightSumTol)
        out.push_back({"score_weights", "w_q + w_p must equal 1"});
    double sub_sum = 0.0;
    for (const auto& [kind, w] : sw.qos_subweights) {
        if (!(w >= 0.0))
            out.push_back({"score_weights.qos_subweights." + to_string(kind), "must be >= 0"});
        if (!svc.requirements.contains(kind))
            out.push_back({"score_weights.qos_subweights." + to_string(kind),
                           "parameter not in service requirements"});
        sub_sum += w;
    }
    if (std::abs(sub_sum - 1.0) > kWeightSumTol)
        out.push_back({"score_weights.qos_subweights", "sub-weights must sum to 1"});

    for (const auto& [id, w] : config.strategy) {
        const std::string name = "strategy." + to_string(id);
        if (!ids.contains(id)) out.push_back({name, "unknown operator"});
        if (!(w.w_u >= 0.0) || !(w.w_op >= 0.0))
            out.push_back({name, "weights must be >= 0"});
        else if (w.w_u == 0.0 && w.w_op == 0.0)
            out.push_back({name, "w_u and w_op must not both be 0"});
    }

    const auto& sim = config.sim;
    if (!(sim.warmup >= 0.0)) out.push_back({"sim.warmup", "must be >= 0"});
    if (!(sim.horizon > sim.warmup)) out.push_back({"sim.horizon", "must exceed warmup"});
    if (sim.replications < 1) out.push_back({"sim.replications", "must be >= 1"});

    return out;
}

}  // namespace opsel
