// Cost-function operator selection and strategy-ratio thresholds.
//
// A home operator that cannot serve its user picks, among cooperating
// operators, the one minimizing
//
//     CF = Wu * |Su - ST| - Wop * (p - Cs)
//
// Comparing two candidates pairwise, the ordering of their CF values flips at
// a single ratio Wu/Wop = L when one candidate is closer in score and the
// other more profitable; otherwise one of them wins at every ratio.
#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "opsel/model.hpp"
#include "opsel/scoring.hpp"

namespace opsel {

struct CandidateOffer {
    OperatorId op;
    Score st;
    double cs = 0.0;
    bool has_capacity = true;
};

struct CandidateEval {
    OperatorId op;
    double distance = 0.0;  // |Su - ST|
    double profit = 0.0;    // p - Cs
    double cf = 0.0;
    bool has_capacity = true;
};

struct Decision {
    std::optional<OperatorId> chosen;
    std::vector<CandidateEval> per_candidate;
    bool tie_broken = false;
};

/// One candidate wins at every ratio. `degenerate` marks identical (d, g).
struct DominantRegime {
    OperatorId op;
    bool degenerate = false;

    friend bool operator==(const DominantRegime&, const DominantRegime&) = default;
};

/// Ratios strictly below `limit` select the profit-best candidate, ratios
/// strictly above select the distance-best one.
struct ThresholdRegime {
    double limit = 0.0;
    OperatorId below_selects;
    OperatorId above_selects;

    friend bool operator==(const ThresholdRegime&, const ThresholdRegime&) = default;
};

using ThresholdResult = std::variant<DominantRegime, ThresholdRegime>;

std::optional<double> limit_of(const ThresholdResult& result);

struct CommonLimits {
    std::optional<double> profit_regime_max;
    std::optional<double> score_regime_min;
};

struct CandidateClasses {
    OperatorId dmin_op;
    OperatorId best_profit_op;
};

/// Everything the engine needs to place a user of a home operator: the user
/// context, the user score and one offer per other cooperating operator.
/// `user.service` points into the config it was built from.
struct HomeContext {
    UserContext user;
    Score su;
    std::vector<CandidateOffer> offers;
};

inline double exchange_profit(double paid_price, double cs) { return paid_price - cs; }

inline double cost_function(double distance, double profit, StrategyWeights w)
{
    return w.w_u * distance - w.w_op * profit;
}

CandidateEval evaluate_candidate(const UserContext& user, Score su, const CandidateOffer& offer,
                                 StrategyWeights w);

/// Argmin CF over offers with capacity. Equal CF goes to the larger profit,
/// then to the smaller operator id. Throws std::domain_error on no offers.
Decision select_operator(const UserContext& user, Score su, std::span<const CandidateOffer> offers,
                         StrategyWeights w);

/// Throws std::domain_error if both offers name the same operator.
ThresholdResult pairwise_threshold(const UserContext& user, Score su, const CandidateOffer& a,
                                   const CandidateOffer& b);

CommonLimits common_limits(std::span<const ThresholdResult> thresholds);

CandidateClasses classify_candidates(const UserContext& user, Score su,
                                     std::span<const CandidateOffer> offers);

/// Builds the user context and offers for a user homed at `home`, scoring all
/// other operators (capacity flags set to true).
HomeContext build_home_context(const ScenarioConfig& config, OperatorId home);

}  // namespace opsel
