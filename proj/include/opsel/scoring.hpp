// QoS normalization and the composite user / network scores.
//
// A network score combines the normalized QoS an operator delivers with its
// normalized service price:
//
//     ST = w_q * sum_k sub_k * norm_k(delivered) + w_p * sp / price_ref
//
// The user score has the same shape, with the QoS term replaced by a target
// and the price term by the user's price level:
//
//     Su = w_q * sum_k sub_k * target_k + w_p * price_level / price_ref
//
// Under AspirationMode::Requirement the target is 1 (requirement met) and the
// price level is the paid price p. Under AspirationMode::BestCandidate both are
// bounded by what the candidate set can offer: target_k is the best normalized
// value among candidates, and the price level is max(p, cheapest candidate sp)
// since no candidate serves below its own price.
#pragma once

#include <span>
#include <stdexcept>

#include "opsel/model.hpp"

namespace opsel {

struct NormalizedScore {
    double value = 0.0;
};

struct Score {
    double value = 0.0;

    friend bool operator==(const Score&, const Score&) = default;
};

struct UserContext {
    OperatorId home_op;
    double paid_price = 0.0;  // p, units/Kbyte
    const ServiceClass* service = nullptr;
};

/// 1.0 means the requirement is met exactly, larger is better. Smaller-better
/// kinds give required/delivered, bandwidth gives delivered/required, and BER
/// is compared in the log domain: log10(delivered)/log10(required).
/// Throws std::domain_error on non-positive inputs or BER >= 1.
NormalizedScore normalize_param(double delivered, double required, QosParamKind kind);

/// Throws std::domain_error if price_ref <= 0 or a scored parameter is missing.
Score network_score(const OperatorConfig& op, const UserContext& user, const ScoreWeights& weights,
                    double price_ref);

/// Throws std::domain_error on an empty candidate list.
Score user_score(const UserContext& user, std::span<const OperatorConfig> candidates,
                 const ScoreWeights& weights, double price_ref, AspirationMode mode);

double score_distance(Score su, Score st);

}  // namespace opsel
