#include <random>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "opsel/decision.hpp"
#include "support.hpp"

using namespace opsel;
using namespace opsel::testing;
using doctest::Approx;

namespace {

// Reference argmin written against raw numbers: smallest CF, then largest
// profit, then smallest id; offers without room never qualify.
std::optional<OperatorId> brute_force(double su, double p, const std::vector<CandidateOffer>& offers,
                                      StrategyWeights w)
{
    std::optional<std::tuple<double, double, int>> best;
    for (const auto& o : offers) {
        if (!o.has_capacity) continue;
        const double d = su > o.st.value ? su - o.st.value : o.st.value - su;
        const double g = p - o.cs;
        const std::tuple<double, double, int> key{w.w_u * d - w.w_op * g, -g, o.op.value};
        if (!best || key < *best) best = key;
    }
    if (!best) return std::nullopt;
    return OperatorId{std::get<2>(*best)};
}

const ThresholdRegime& as_threshold(const ThresholdResult& r)
{
    REQUIRE(std::holds_alternative<ThresholdRegime>(r));
    return std::get<ThresholdRegime>(r);
}

}  // namespace

TEST_CASE("profit and cost function")
{
    CHECK(exchange_profit(0.9, 0.1) == Approx(0.8));
    CHECK(exchange_profit(0.1, 0.9) == Approx(-0.8));
    // Op1 user sent to Op2 at Wu/Wop = 1/4
    CHECK(cost_function(0.444444, 0.8, StrategyWeights::from_ratio(0.25)) == Approx(-0.688889).epsilon(1e-5));
}

TEST_CASE("home contexts of the default scenario")
{
    const auto cfg = default_scenario();

    const auto h1 = build_home_context(cfg, kOp1);
    CHECK(h1.su.value == Approx(1.0));
    REQUIRE(h1.offers.size() == 2);
    CHECK(h1.offers[0].op == kOp2);
    CHECK(h1.offers[0].st.value == Approx(0.555556).epsilon(1e-6));

    const auto e12 = evaluate_candidate(h1.user, h1.su, h1.offers[0], {1, 1});
    const auto e13 = evaluate_candidate(h1.user, h1.su, h1.offers[1], {1, 1});
    CHECK(e12.distance == Approx(0.444444).epsilon(1e-6));
    CHECK(e12.profit == Approx(0.8));
    CHECK(e13.distance == Approx(0.222222).epsilon(1e-6));
    CHECK(e13.profit == Approx(0.4));

    const auto h2 = build_home_context(cfg, kOp2);
    CHECK(h2.su.value == Approx(1.111111).epsilon(1e-6));
    const auto e21 = evaluate_candidate(h2.user, h2.su, h2.offers[0], {1, 1});
    const auto e23 = evaluate_candidate(h2.user, h2.su, h2.offers[1], {1, 1});
    CHECK(e21.distance == Approx(0.222222).epsilon(1e-6));
    CHECK(e23.distance == Approx(0.333333).epsilon(1e-6));
    CHECK(e21.profit == Approx(-0.8));
    CHECK(e23.profit == Approx(-0.4));

    const auto h3 = build_home_context(cfg, kOp3);
    const auto e31 = evaluate_candidate(h3.user, h3.su, h3.offers[0], {1, 1});
    const auto e32 = evaluate_candidate(h3.user, h3.su, h3.offers[1], {1, 1});
    CHECK(e31.distance == Approx(0.222222).epsilon(1e-6));
    CHECK(e32.distance == Approx(0.555556).epsilon(1e-6));
    CHECK(e31.profit == Approx(-0.4));
    CHECK(e32.profit == Approx(0.4));
}

TEST_CASE("selection at the two ratio extremes")
{
    const auto cfg = default_scenario();
    const StrategyWeights profit_first = StrategyWeights::from_ratio(0.25);
    const StrategyWeights score_first = StrategyWeights::from_ratio(8.0);

    const std::vector<std::tuple<OperatorId, OperatorId, OperatorId>> expected{
        {kOp1, kOp2, kOp3}, {kOp2, kOp3, kOp1}, {kOp3, kOp2, kOp1}};
    for (const auto& [home, low, high] : expected) {
        const auto h = build_home_context(cfg, home);
        CAPTURE(to_string(home));
        CHECK(select_operator(h.user, h.su, h.offers, profit_first).chosen == low);
        CHECK(select_operator(h.user, h.su, h.offers, score_first).chosen == high);
    }
}

TEST_CASE("selection edge cases")
{
    const auto cfg = default_scenario();
    auto h = build_home_context(cfg, kOp1);

    CHECK_THROWS_AS(select_operator(h.user, h.su, std::span<const CandidateOffer>{}, {1, 1}), std::domain_error);

    for (auto& o : h.offers) o.has_capacity = false;
    const auto none = select_operator(h.user, h.su, h.offers, {1, 1});
    CHECK_FALSE(none.chosen.has_value());
    CHECK(none.per_candidate.size() == 2);

    // the profit-best offer is full: the other one is taken
    h.offers[0].has_capacity = false;
    h.offers[1].has_capacity = true;
    CHECK(select_operator(h.user, h.su, h.offers, StrategyWeights::from_ratio(0.25)).chosen == kOp3);

    // two offers with identical (ST, Cs): the smaller id wins and the tie is flagged
    std::vector<CandidateOffer> twins{{OperatorId{5}, Score{0.7}, 0.3, true}, {OperatorId{4}, Score{0.7}, 0.3, true}};
    const auto tie = select_operator(h.user, h.su, twins, {1, 1});
    CHECK(tie.chosen == OperatorId{4});
    CHECK(tie.tie_broken);

    // equal CF but different profit: the more profitable one wins
    const UserContext u{kOp1, 1.0, &cfg.service};
    std::vector<CandidateOffer> eq{{OperatorId{2}, Score{1.5}, 0.5, true}, {OperatorId{3}, Score{1.0}, 1.0, true}};
    const auto d = select_operator(u, Score{1.0}, eq, {1, 1});
    CHECK(d.per_candidate[0].cf == Approx(d.per_candidate[1].cf));
    CHECK(d.chosen == OperatorId{2});

    // Wop = 0: distance alone decides
    CHECK(select_operator(h.user, h.su, build_home_context(cfg, kOp1).offers, {1.0, 0.0}).chosen == kOp3);
}

TEST_CASE("pairwise thresholds and common limits")
{
    const auto cfg = default_scenario();
    std::vector<ThresholdResult> all;

    const std::vector<std::tuple<OperatorId, double, OperatorId, OperatorId>> expected{
        {kOp1, 1.8, kOp2, kOp3}, {kOp2, 3.6, kOp3, kOp1}, {kOp3, 2.4, kOp2, kOp1}};
    for (const auto& [home, limit, below, above] : expected) {
        const auto h = build_home_context(cfg, home);
        const auto r = pairwise_threshold(h.user, h.su, h.offers[0], h.offers[1]);
        const auto& t = as_threshold(r);
        CAPTURE(to_string(home));
        CHECK(t.limit == Approx(limit).epsilon(1e-9));
        CHECK(t.below_selects == below);
        CHECK(t.above_selects == above);
        // argument order does not matter
        CHECK(as_threshold(pairwise_threshold(h.user, h.su, h.offers[1], h.offers[0])) == t);
        all.push_back(r);
    }

    const auto limits = common_limits(all);
    REQUIRE(limits.profit_regime_max.has_value());
    REQUIRE(limits.score_regime_min.has_value());
    CHECK(*limits.profit_regime_max == Approx(1.8));
    CHECK(*limits.score_regime_min == Approx(3.6));

    const auto h = build_home_context(cfg, kOp1);
    CHECK_THROWS_AS(pairwise_threshold(h.user, h.su, h.offers[0], h.offers[0]), std::domain_error);

    const std::vector<ThresholdResult> none{DominantRegime{kOp2}};
    CHECK_FALSE(common_limits(none).profit_regime_max.has_value());
}

TEST_CASE("threshold limits agree with a grid scan of the ratio")
{
    // values from tests/oracle/oracle.py: first 1e-3 grid point past the flip
    const auto cfg = default_scenario();
    const std::vector<std::pair<OperatorId, double>> grid{{kOp1, 1.801}, {kOp2, 3.601}, {kOp3, 2.401}};
    for (const auto& [home, g] : grid) {
        const auto h = build_home_context(cfg, home);
        const auto l = *limit_of(pairwise_threshold(h.user, h.su, h.offers[0], h.offers[1]));
        CHECK(std::abs(l - g) <= 1e-3 + 1e-12);
    }
}

TEST_CASE("dominance and degenerate pairs")
{
    const auto cfg = default_scenario();
    const UserContext u{kOp1, 1.0, &cfg.service};
    const Score su{1.0};
    // Op2 closer and cheaper than Op3
    const CandidateOffer a{kOp2, Score{0.9}, 0.2, true};
    const CandidateOffer b{kOp3, Score{0.5}, 0.6, true};
    const auto r = pairwise_threshold(u, su, a, b);
    REQUIRE(std::holds_alternative<DominantRegime>(r));
    CHECK(std::get<DominantRegime>(r).op == kOp2);
    CHECK_FALSE(std::get<DominantRegime>(r).degenerate);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ratio(0.0, 100.0);
    const std::vector<CandidateOffer> pair{a, b};
    for (int i = 0; i < 1000; ++i)
        CHECK(select_operator(u, su, pair, StrategyWeights::from_ratio(ratio(rng))).chosen == kOp2);

    const CandidateOffer c{kOp3, Score{0.9}, 0.2, true};
    const auto dg = pairwise_threshold(u, su, c, a);
    REQUIRE(std::holds_alternative<DominantRegime>(dg));
    CHECK(std::get<DominantRegime>(dg).degenerate);
    CHECK(std::get<DominantRegime>(dg).op == kOp2);
}

TEST_CASE("classification of candidates")
{
    const auto cfg = default_scenario();
    const std::vector<std::tuple<OperatorId, OperatorId, OperatorId>> expected{
        {kOp1, kOp3, kOp2}, {kOp2, kOp1, kOp3}, {kOp3, kOp1, kOp2}};
    for (const auto& [home, dmin, profit] : expected) {
        const auto h = build_home_context(cfg, home);
        const auto c = classify_candidates(h.user, h.su, h.offers);
        CHECK(c.dmin_op == dmin);
        CHECK(c.best_profit_op == profit);
    }
}

TEST_CASE("random instances: selection properties")
{
    const auto cfg = default_scenario();
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> price(0.0, 2.0);
    std::uniform_real_distribution<double> score(0.0, 3.0);
    std::uniform_real_distribution<double> weight(0.01, 20.0);
    std::uniform_int_distribution<int> count(1, 5);
    std::bernoulli_distribution room(0.8);

    for (int i = 0; i < 1000; ++i) {
        const double p = price(rng);
        const UserContext u{OperatorId{0}, p, &cfg.service};
        const Score su{score(rng)};
        std::vector<CandidateOffer> offers;
        const int n = count(rng);
        for (int k = 0; k < n; ++k) offers.push_back({OperatorId{k + 1}, Score{score(rng)}, price(rng), room(rng)});
        const StrategyWeights w{weight(rng), weight(rng)};

        const auto d = select_operator(u, su, offers, w);
        CHECK(d.chosen == brute_force(su.value, p, offers, w));
        CHECK(d.per_candidate.size() == offers.size());

        // only the ratio matters
        const double k = weight(rng);
        CHECK(select_operator(u, su, offers, {k * w.w_u, k * w.w_op}).chosen == d.chosen);

        if (d.chosen) {
            const auto& chosen = *std::find_if(d.per_candidate.begin(), d.per_candidate.end(),
                                               [&](const auto& e) { return e.op == *d.chosen; });
            CHECK(chosen.has_capacity);
            for (const auto& e : d.per_candidate)
                if (e.has_capacity) CHECK(chosen.cf <= e.cf);
        }

        // the choice flips exactly across a pairwise limit
        if (n >= 2 && offers[0].has_capacity && offers[1].has_capacity) {
            const std::vector<CandidateOffer> two{offers[0], offers[1]};
            const auto r = pairwise_threshold(u, su, two[0], two[1]);
            if (const auto* t = std::get_if<ThresholdRegime>(&r)) {
                const double eps = 1e-6 * std::max(1.0, t->limit);
                CHECK(select_operator(u, su, two, StrategyWeights::from_ratio(t->limit - eps)).chosen ==
                      t->below_selects);
                CHECK(select_operator(u, su, two, StrategyWeights::from_ratio(t->limit + eps)).chosen ==
                      t->above_selects);
                CHECK(t->limit > 0.0);
            } else {
                const auto op = std::get<DominantRegime>(r).op;
                for (double ratio : {0.0, 0.25, 1.0, 8.0, 1e3})
                    CHECK(select_operator(u, su, two, StrategyWeights::from_ratio(ratio)).chosen == op);
            }
        }
    }
}

TEST_CASE("when every candidate loses money the smaller loss is preferred at low ratio")
{
    const auto cfg = default_scenario();
    const auto h = build_home_context(cfg, kOp2);
    for (const auto& o : h.offers) CHECK(exchange_profit(h.user.paid_price, o.cs) < 0.0);
    CHECK(select_operator(h.user, h.su, h.offers, {0.0, 1.0}).chosen == kOp3);
}
