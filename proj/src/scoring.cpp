#include "opsel/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace opsel {

NormalizedScore normalize_param(double delivered, double required, QosParamKind kind)
{
    if (!(delivered > 0.0) || !(required > 0.0))
        throw std::domain_error("QoS values must be positive for " + to_string(kind));
    if (kind == QosParamKind::Ber) {
        if (delivered >= 1.0 || required >= 1.0)
            throw std::domain_error("BER must lie in (0, 1)");
        return {std::log10(delivered) / std::log10(required)};
    }
    if (direction_of(kind) == Direction::SmallerBetter) return {required / delivered};
    return {delivered / required};
}

namespace {

void check_user(const UserContext& user)
{
    if (user.service == nullptr) throw std::domain_error("user context has no service class");
}

double required_value(const UserContext& user, QosParamKind kind)
{
    auto it = user.service->requirements.find(kind);
    if (it == user.service->requirements.end())
        throw std::domain_error("service has no requirement for " + to_string(kind));
    return it->second;
}

double delivered_value(const OperatorConfig& op, QosParamKind kind)
{
    auto it = op.delivered.find(kind);
    if (it == op.delivered.end())
        throw std::domain_error(to_string(op.id) + " does not report " + to_string(kind));
    return it->second;
}

}  // namespace

Score network_score(const OperatorConfig& op, const UserContext& user, const ScoreWeights& weights,
                    double price_ref)
{
    check_user(user);
    if (!(price_ref > 0.0)) throw std::domain_error("price_ref must be > 0");

    double qos = 0.0;
    for (const auto& [kind, sub] : weights.qos_subweights)
        qos += sub * normalize_param(delivered_value(op, kind), required_value(user, kind), kind).value;
    return {weights.w_q * qos + weights.w_p * (op.sp / price_ref)};
}

Score user_score(const UserContext& user, std::span<const OperatorConfig> candidates,
                 const ScoreWeights& weights, double price_ref, AspirationMode mode)
{
    check_user(user);
    if (candidates.empty()) throw std::domain_error("no candidates");
    if (!(price_ref > 0.0)) throw std::domain_error("price_ref must be > 0");

    double qos = 0.0;
    double price_level = user.paid_price;

    if (mode == AspirationMode::Requirement) {
        for (const auto& [kind, sub] : weights.qos_subweights) qos += sub;
    } else {
        for (const auto& [kind, sub] : weights.qos_subweights) {
            const double required = required_value(user, kind);
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& op : candidates)
                best = std::max(best, normalize_param(delivered_value(op, kind), required, kind).value);
            qos += sub * best;
        }
        double cheapest = std::numeric_limits<double>::infinity();
        for (const auto& op : candidates) cheapest = std::min(cheapest, op.sp);
        price_level = std::max(price_level, cheapest);
    }
    return {weights.w_q * qos + weights.w_p * (price_level / price_ref)};
}

double score_distance(Score su, Score st) { return std::abs(su.value - st.value); }

}  // namespace opsel
