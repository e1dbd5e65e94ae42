#include <numeric>

#include "doctest.h"
#include "opsel/config_io.hpp"
#include "opsel/simkernel.hpp"
#include "support.hpp"

using namespace opsel;
using namespace opsel::testing;
using doctest::Approx;

namespace {

std::size_t index_of(const ScenarioConfig& cfg, OperatorId id)
{
    for (std::size_t i = 0; i < cfg.operators.size(); ++i)
        if (cfg.operators[i].id == id) return i;
    FAIL("unknown operator");
    return 0;
}

// Walks a trace and checks capacity, admission and selection invariants.
void check_trace(const ScenarioConfig& cfg, const SimTrace& trace)
{
    std::vector<double> used(cfg.operators.size(), 0.0);
    double last_time = 0.0;
    for (const auto& rec : trace) {
        CHECK(rec.time >= last_time);
        last_time = rec.time;
        REQUIRE(rec.used_after.size() == cfg.operators.size());
        for (std::size_t i = 0; i < used.size(); ++i) {
            CHECK(rec.used_after[i] <= cfg.operators[i].capacity + 1e-6);
            CHECK(rec.used_after[i] >= -1e-6);
        }

        if (rec.kind == EventKind::Arrival) {
            const auto h = index_of(cfg, rec.home);
            const bool home_room = used[h] + cfg.session_rate(cfg.operators[h]) <= cfg.operators[h].capacity;
            if (!rec.decision) {
                // no engine call: admitted at home, which had room
                CHECK(home_room);
                REQUIRE(rec.serving.has_value());
                CHECK(*rec.serving == rec.home);
            } else {
                CHECK_FALSE(home_room);
                const auto& d = *rec.decision;
                CHECK(rec.serving == d.chosen);
                for (const auto& e : d.per_candidate) {
                    const auto j = index_of(cfg, e.op);
                    const bool room = used[j] + cfg.session_rate(cfg.operators[j]) <= cfg.operators[j].capacity;
                    CHECK(e.has_capacity == room);
                }
                if (d.chosen) {
                    const auto& chosen = *std::find_if(d.per_candidate.begin(), d.per_candidate.end(),
                                                       [&](const auto& e) { return e.op == *d.chosen; });
                    for (const auto& e : d.per_candidate)
                        if (e.has_capacity) CHECK(chosen.cf <= e.cf);
                } else {
                    for (const auto& e : d.per_candidate) CHECK_FALSE(e.has_capacity);
                }
            }
        }
        used = rec.used_after;
    }
}

void check_accounting(const SimReport& r)
{
    double paid = 0.0;
    double hosted = 0.0;
    for (const auto& [id, l] : r.ledgers) {
        CHECK(l.arrivals == l.blocked + l.served_home + l.transferred());
        CHECK(l.global_profit() ==
              Approx(l.revenue_own + l.revenue_guest_hosting + l.revenue_exchanged_clients - l.cost_exchange));
        CHECK(r.global_profit.at(id) == l.global_profit());
        paid += l.cost_exchange;
        hosted += l.revenue_guest_hosting;
        std::uint64_t row = 0;
        if (auto it = r.selection.counts.find(id); it != r.selection.counts.end())
            for (const auto& [s, c] : it->second) row += c;
        CHECK(row == l.transferred());
    }
    CHECK(paid == Approx(hosted));
}

}  // namespace

TEST_CASE("trace invariants at the default load")
{
    auto cfg = short_scenario();
    cfg.set_uniform_ratio(0.25);
    SimTrace trace;
    const auto r = run_simulation(cfg, 3, &trace);
    CHECK(r.total_arrivals() > 1000);
    check_trace(cfg, trace);
    check_accounting(r);
}

TEST_CASE("trace invariants under overload")
{
    for (double ratio : {0.25, 1.0, 8.0}) {
        auto cfg = short_scenario(10000.0, 1000.0);
        set_uniform_load(cfg, 1.2);
        cfg.set_uniform_ratio(ratio);
        SimTrace trace;
        const auto r = run_simulation(cfg, 17, &trace);
        check_trace(cfg, trace);
        check_accounting(r);
        // the engine ran and some sessions were still turned away
        std::uint64_t blocked = 0;
        for (const auto& [id, l] : r.ledgers) blocked += l.blocked;
        CHECK(blocked > 0);
        CHECK_FALSE(r.selection.counts.empty());
    }
}

TEST_CASE("revenue of a home that always transfers")
{
    // Op1 cannot fit one session, so every Op1 user is hosted by Op2
    auto cfg = short_scenario(5000.0, 0.0);
    cfg.operators.pop_back();
    cfg.strategy.erase(kOp3);
    cfg.operators[0].capacity = 100.0;
    cfg.operators[0].delivered[QosParamKind::Bandwidth] = 100.0;
    cfg.operators[0].sp = 0.9;
    cfg.operators[1].cs = 0.3;
    const auto r = run_simulation(cfg, 9);
    const auto& home = r.ledgers.at(kOp1);
    const auto& host = r.ledgers.at(kOp2);
    REQUIRE(home.arrivals > 0);
    CHECK(home.served_home == 0);
    CHECK(home.sent_guests.at(kOp2) + home.blocked == home.arrivals);
    CHECK(host.received_guests.at(kOp1) == home.sent_guests.at(kOp2));
    CHECK(home.revenue_own == 0.0);
    CHECK(home.cost_exchange / home.revenue_exchanged_clients == Approx(0.3 / 0.9));
    CHECK(host.revenue_guest_hosting == Approx(home.cost_exchange));
    CHECK(home.global_profit() == Approx(home.revenue_exchanged_clients * (1.0 - 0.3 / 0.9)));
}

TEST_CASE("same seed reproduces, another seed differs")
{
    const auto cfg = short_scenario();
    const auto a = run_simulation(cfg, 5);
    const auto b = run_simulation(cfg, 5);
    const auto c = run_simulation(cfg, 6);
    CHECK(a == b);
    CHECK_FALSE(a == c);
}

TEST_CASE("traffic does not depend on strategy weights")
{
    auto cfg = short_scenario(10000.0, 1000.0);
    set_uniform_load(cfg, 1.2);
    cfg.set_uniform_ratio(0.25);
    const auto low = run_simulation(cfg, 21);
    cfg.set_uniform_ratio(8.0);
    const auto high = run_simulation(cfg, 21);
    for (const auto& [id, l] : low.ledgers) CHECK(l.arrivals == high.ledgers.at(id).arrivals);
}

TEST_CASE("light traffic never blocks or transfers")
{
    auto cfg = short_scenario();
    set_uniform_load(cfg, 0.001);
    const auto r = run_simulation(cfg, 1);
    for (const auto& [id, p] : r.blocking_probability) CHECK(p == 0.0);
    CHECK(r.selection.counts.empty());
    CHECK(r.selection.percentages({kOp1, kOp2, kOp3}).empty());
}

TEST_CASE("zero arrival rate is allowed")
{
    auto cfg = short_scenario();
    cfg.operators[0].arrival_rate = 0.0;
    const auto r = run_simulation(cfg, 1);
    CHECK(r.ledgers.at(kOp1).arrivals == 0);
    CHECK(r.blocking_probability.at(kOp1) == 0.0);
}

TEST_CASE("invalid config is rejected")
{
    auto cfg = short_scenario();
    cfg.operators[0].capacity = 0.0;
    CHECK_THROWS_AS(run_simulation(cfg, 1), ConfigError);
}

TEST_CASE("replications and their aggregates")
{
    const auto cfg = short_scenario();
    const auto one = run_replications(cfg, 1, 4);
    REQUIRE(one.reports.size() == 1);
    for (const auto& [id, agg] : one.aggregate) {
        CHECK_FALSE(agg.blocking_ci.has_value());
        CHECK_FALSE(agg.profit_ci.has_value());
    }

    const auto three = run_replications(cfg, 3, 4);
    REQUIRE(three.reports.size() == 3);
    CHECK(three.reports[0] == one.reports[0]);
    CHECK(three.reports[2].seed == 6);
    CHECK(three.reports[2] == run_simulation(cfg, 6));
    for (const auto& [id, agg] : three.aggregate) {
        REQUIRE(agg.profit_ci.has_value());
        double sum = 0.0;
        for (const auto& r : three.reports) sum += r.global_profit.at(id);
        CHECK(agg.profit_mean == Approx(sum / 3.0));
        CHECK(agg.profit_ci->lo <= agg.profit_mean);
        CHECK(agg.profit_ci->hi >= agg.profit_mean);
    }
    SelectionMatrix summed;
    for (const auto& r : three.reports) summed.add(r.selection);
    CHECK(summed == three.selection);
}

TEST_CASE("selection percentages")
{
    SelectionMatrix m;
    m.counts[kOp1][kOp2] = 3;
    m.counts[kOp1][kOp3] = 1;
    m.counts[kOp2][kOp3] = 5;
    const auto pct = m.percentages({kOp1, kOp2, kOp3});
    REQUIRE(pct.size() == 2);
    CHECK(pct.at(kOp1).at(kOp2) == Approx(75.0));
    CHECK(pct.at(kOp1).at(kOp3) == Approx(25.0));
    CHECK(pct.at(kOp2).at(kOp1) == 0.0);
    CHECK(pct.at(kOp2).at(kOp3) == 100.0);
    CHECK(pct.count(kOp3) == 0);
}

TEST_CASE("QoS violation at home triggers a transfer")
{
    auto cfg = short_scenario();
    cfg.operators[0].delivered[QosParamKind::Jitter] = 20.0;  // misses the 10 ms requirement
    cfg.sim.transfer_on_qos_violation = true;
    cfg.set_uniform_ratio(0.25);
    const auto r = run_simulation(cfg, 2);
    const auto& l = r.ledgers.at(kOp1);
    CHECK(l.arrivals > 0);
    CHECK(l.served_home == 0);
    CHECK(l.transferred() == l.arrivals);
    // Op2 and Op3 meet the requirement and keep their users
    CHECK(r.ledgers.at(kOp2).transferred() == 0);

    cfg.sim.transfer_on_qos_violation = false;
    CHECK(run_simulation(cfg, 2).ledgers.at(kOp1).served_home > 0);
}
