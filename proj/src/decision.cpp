#include "opsel/decision.hpp"

#include <algorithm>

namespace opsel {

std::optional<double> limit_of(const ThresholdResult& result)
{
    if (const auto* t = std::get_if<ThresholdRegime>(&result)) return t->limit;
    return std::nullopt;
}

CandidateEval evaluate_candidate(const UserContext& user, Score su, const CandidateOffer& offer,
                                 StrategyWeights w)
{
    CandidateEval eval;
    eval.op = offer.op;
    eval.distance = score_distance(su, offer.st);
    eval.profit = exchange_profit(user.paid_price, offer.cs);
    eval.cf = cost_function(eval.distance, eval.profit, w);
    eval.has_capacity = offer.has_capacity;
    return eval;
}

namespace {

// Strict preference: lower CF, then higher profit, then lower id.
bool preferred(const CandidateEval& a, const CandidateEval& b)
{
    if (a.cf != b.cf) return a.cf < b.cf;
    if (a.profit != b.profit) return a.profit > b.profit;
    return a.op < b.op;
}

}  // namespace

Decision select_operator(const UserContext& user, Score su, std::span<const CandidateOffer> offers,
                         StrategyWeights w)
{
    if (offers.empty()) throw std::domain_error("no candidates");

    Decision decision;
    decision.per_candidate.reserve(offers.size());
    const CandidateEval* best = nullptr;
    for (const auto& offer : offers) {
        decision.per_candidate.push_back(evaluate_candidate(user, su, offer, w));
    }
    for (const auto& eval : decision.per_candidate) {
        if (!eval.has_capacity) continue;
        if (best == nullptr || preferred(eval, *best)) best = &eval;
    }
    if (best == nullptr) return decision;

    decision.chosen = best->op;
    decision.tie_broken = std::count_if(decision.per_candidate.begin(), decision.per_candidate.end(),
                                        [&](const CandidateEval& e) {
                                            return e.has_capacity && e.cf == best->cf;
                                        }) > 1;
    return decision;
}

ThresholdResult pairwise_threshold(const UserContext& user, Score su, const CandidateOffer& a,
                                   const CandidateOffer& b)
{
    if (a.op == b.op) throw std::domain_error("pairwise threshold needs two distinct operators");

    const StrategyWeights unit{1.0, 1.0};
    const auto ea = evaluate_candidate(user, su, a, unit);
    const auto eb = evaluate_candidate(user, su, b, unit);

    if (ea.distance == eb.distance && ea.profit == eb.profit)
        return DominantRegime{std::min(a.op, b.op), true};
    if (ea.distance <= eb.distance && ea.profit >= eb.profit) return DominantRegime{a.op};
    if (eb.distance <= ea.distance && eb.profit >= ea.profit) return DominantRegime{b.op};

    // Conflict: one is strictly closer, the other strictly more profitable.
    // The printed form of the limit assumes the profit-best candidate is the
    // farther one; taking the ratio of differences in either order gives the
    // same positive value.
    const auto& profit_best = ea.profit > eb.profit ? ea : eb;
    const auto& distance_best = ea.profit > eb.profit ? eb : ea;
    ThresholdRegime t;
    t.limit = (profit_best.profit - distance_best.profit) /
              (profit_best.distance - distance_best.distance);
    t.below_selects = profit_best.op;
    t.above_selects = distance_best.op;
    return t;
}

CommonLimits common_limits(std::span<const ThresholdResult> thresholds)
{
    CommonLimits limits;
    for (const auto& result : thresholds) {
        auto l = limit_of(result);
        if (!l) continue;
        limits.profit_regime_max = limits.profit_regime_max ? std::min(*limits.profit_regime_max, *l) : *l;
        limits.score_regime_min = limits.score_regime_min ? std::max(*limits.score_regime_min, *l) : *l;
    }
    return limits;
}

CandidateClasses classify_candidates(const UserContext& user, Score su,
                                     std::span<const CandidateOffer> offers)
{
    if (offers.empty()) throw std::domain_error("no candidates");

    const StrategyWeights unit{1.0, 1.0};
    std::vector<CandidateEval> evals;
    for (const auto& offer : offers) evals.push_back(evaluate_candidate(user, su, offer, unit));

    auto dmin = std::min_element(evals.begin(), evals.end(), [](const auto& x, const auto& y) {
        return x.distance != y.distance ? x.distance < y.distance : x.op < y.op;
    });
    auto best_profit = std::min_element(evals.begin(), evals.end(), [](const auto& x, const auto& y) {
        return x.profit != y.profit ? x.profit > y.profit : x.op < y.op;
    });
    return {dmin->op, best_profit->op};
}

HomeContext build_home_context(const ScenarioConfig& config, OperatorId home)
{
    const auto& home_op = config.op(home);

    HomeContext ctx;
    ctx.user.home_op = home;
    ctx.user.paid_price = home_op.sp;
    ctx.user.service = &config.service;

    std::vector<OperatorConfig> candidates;
    for (const auto& op : config.operators)
        if (op.id != home) candidates.push_back(op);

    const double price_ref = config.price_ref();
    ctx.su = user_score(ctx.user, candidates, config.score_weights, price_ref, config.aspiration_mode);
    for (const auto& op : candidates)
        ctx.offers.push_back(
            {op.id, network_score(op, ctx.user, config.score_weights, price_ref), op.cs, true});
    return ctx;
}

}  // namespace opsel
