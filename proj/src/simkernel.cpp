#include "opsel/simkernel.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <queue>
#include <random>
#include <thread>
#include <unordered_map>

#include "opsel/config_io.hpp"

namespace opsel {

std::uint64_t OperatorLedger::transferred() const
{
    std::uint64_t total = 0;
    for (const auto& [dest, n] : sent_guests) total += n;
    return total;
}

double OperatorLedger::global_profit() const
{
    return revenue_own + revenue_guest_hosting + revenue_exchanged_clients - cost_exchange;
}

void SelectionMatrix::add(const SelectionMatrix& other)
{
    for (const auto& [home, row] : other.counts)
        for (const auto& [serving, n] : row) counts[home][serving] += n;
}

std::map<OperatorId, std::map<OperatorId, double>> SelectionMatrix::percentages(
    const std::vector<OperatorId>& operators) const
{
    std::map<OperatorId, std::map<OperatorId, double>> out;
    for (const auto& [home, row] : counts) {
        std::uint64_t total = 0;
        for (const auto& [serving, n] : row) total += n;
        if (total == 0) continue;
        auto& pct = out[home];
        for (OperatorId serving : operators)
            if (serving != home) pct[serving] = 0.0;
        for (const auto& [serving, n] : row)
            pct[serving] = 100.0 * static_cast<double>(n) / static_cast<double>(total);
    }
    return out;
}

std::uint64_t SimReport::total_arrivals() const
{
    std::uint64_t total = 0;
    for (const auto& [id, ledger] : ledgers) total += ledger.arrivals;
    return total;
}

namespace {

class Stream {
public:
    Stream(std::uint64_t seed, std::uint32_t op_index, std::uint32_t purpose)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                          static_cast<std::uint32_t>(seed >> 32), op_index, purpose};
        engine_.seed(seq);
    }

    double exponential(double mean)
    {
        // 53-bit uniform in [0, 1); inverse CDF keeps the stream portable.
        const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        return -mean * std::log1p(-u);
    }

private:
    std::mt19937_64 engine_;
};

struct Event {
    double time = 0.0;
    EventKind kind = EventKind::Arrival;
    std::uint64_t seq = 0;
    std::size_t op_index = 0;  // arrival: home operator
    SessionId session = 0;     // departure
};

struct EventLater {
    bool operator()(const Event& a, const Event& b) const
    {
        if (a.time != b.time) return a.time > b.time;
        if (a.kind != b.kind) return a.kind > b.kind;
        return a.seq > b.seq;
    }
};

bool meets_requirements(const OperatorConfig& op, const ServiceClass& service)
{
    for (const auto& [kind, required] : service.requirements) {
        auto it = op.delivered.find(kind);
        if (it == op.delivered.end()) return false;
        if (normalize_param(it->second, required, kind).value < 1.0) return false;
    }
    return true;
}

class World {
public:
    World(const ScenarioConfig& config, std::uint64_t seed, SimTrace* trace)
        : config_(config), trace_(trace)
    {
        const auto n = config.operators.size();
        for (std::size_t i = 0; i < n; ++i) {
            const auto& op = config.operators[i];
            index_[op.id] = i;
            networks_.push_back({op.capacity, 0.0, {}});
            rates_.push_back(config.session_rate(op));
            arrival_streams_.emplace_back(seed, static_cast<std::uint32_t>(i), 0u);
            duration_streams_.emplace_back(seed, static_cast<std::uint32_t>(i), 1u);
            homes_.push_back(build_home_context(config, op.id));
            home_ok_.push_back(meets_requirements(op, config.service));
            report_.ledgers[op.id];
        }
        report_.seed = seed;
        report_.horizon = config.sim.horizon;
        report_.warmup = config.sim.warmup;
    }

    SimReport run()
    {
        for (std::size_t i = 0; i < config_.operators.size(); ++i) schedule_arrival(i, 0.0);

        while (!queue_.empty()) {
            const Event ev = queue_.top();
            if (ev.time > config_.sim.horizon) break;
            queue_.pop();
            if (ev.kind == EventKind::Departure)
                depart(ev);
            else
                arrive(ev);
        }

        for (const auto& op : config_.operators) {
            const auto& ledger = report_.ledgers.at(op.id);
            report_.blocking_probability[op.id] =
                ledger.arrivals == 0 ? 0.0
                                     : static_cast<double>(ledger.blocked) /
                                           static_cast<double>(ledger.arrivals);
            report_.global_profit[op.id] = ledger.global_profit();
        }
        return std::move(report_);
    }

private:
    void schedule_arrival(std::size_t i, double now)
    {
        const double lambda = config_.operators[i].arrival_rate;
        if (!(lambda > 0.0)) return;
        push({now + arrival_streams_[i].exponential(1.0 / lambda), EventKind::Arrival, 0, i, 0});
    }

    void push(Event ev)
    {
        ev.seq = next_seq_++;
        queue_.push(ev);
    }

    bool has_room(std::size_t i) const { return networks_[i].used + rates_[i] <= networks_[i].capacity; }

    std::optional<Decision> transfer(std::size_t home)
    {
        auto offers = homes_[home].offers;
        for (auto& offer : offers) offer.has_capacity = has_room(index_.at(offer.op));
        const auto& home_id = config_.operators[home].id;
        return select_operator(homes_[home].user, homes_[home].su, offers, config_.strategy.at(home_id));
    }

    void arrive(const Event& ev)
    {
        const std::size_t home = ev.op_index;
        const auto& home_op = config_.operators[home];
        schedule_arrival(home, ev.time);
        const double duration = duration_streams_[home].exponential(config_.service.mean_duration);
        const bool counted = ev.time >= config_.sim.warmup;
        const SessionId id = next_session_++;

        std::optional<std::size_t> serving;
        std::optional<Decision> decision;
        const bool wants_transfer = config_.sim.transfer_on_qos_violation && !home_ok_[home];
        if (has_room(home) && !wants_transfer) {
            serving = home;
        } else {
            decision = transfer(home);
            if (decision->chosen)
                serving = index_.at(*decision->chosen);
            else if (wants_transfer && has_room(home))
                serving = home;
        }

        auto& ledger = report_.ledgers[home_op.id];
        if (counted) ++ledger.arrivals;

        if (serving) {
            const auto& serving_op = config_.operators[*serving];
            Session s;
            s.id = id;
            s.home_op = home_op.id;
            s.serving_op = serving_op.id;
            s.start = ev.time;
            s.duration = duration;
            s.rate = rates_[*serving];
            s.volume = s.rate * s.duration / 8.0;

            auto& net = networks_[*serving];
            net.used += s.rate;
            net.active_sessions.insert(id);
            push({ev.time + duration, EventKind::Departure, 0, *serving, id});

            if (counted) book(s, ledger);
            sessions_.emplace(id, s);
        } else if (counted) {
            ++ledger.blocked;
        }

        if (trace_ != nullptr) {
            TraceRecord rec;
            rec.time = ev.time;
            rec.kind = EventKind::Arrival;
            rec.session = id;
            rec.home = home_op.id;
            if (serving) rec.serving = config_.operators[*serving].id;
            rec.decision = std::move(decision);
            rec.used_after = used_snapshot();
            rec.counted = counted;
            trace_->push_back(std::move(rec));
        }
    }

    // Home-served: the client pays sp_home to the home operator.
    // Transferred: the client still pays sp_home to home, and home pays
    // cs_serving to the serving operator for the same volume.
    void book(const Session& s, OperatorLedger& home_ledger)
    {
        const auto& home_op = config_.op(s.home_op);
        if (s.serving_op == s.home_op) {
            ++home_ledger.served_home;
            home_ledger.revenue_own += home_op.sp * s.volume;
            return;
        }
        const auto& serving_op = config_.op(s.serving_op);
        auto& serving_ledger = report_.ledgers[s.serving_op];
        ++home_ledger.sent_guests[s.serving_op];
        ++serving_ledger.received_guests[s.home_op];
        ++report_.selection.counts[s.home_op][s.serving_op];
        const double payment = serving_op.cs * s.volume;
        home_ledger.revenue_exchanged_clients += home_op.sp * s.volume;
        home_ledger.cost_exchange += payment;
        serving_ledger.revenue_guest_hosting += payment;
    }

    void depart(const Event& ev)
    {
        auto it = sessions_.find(ev.session);
        auto& net = networks_[ev.op_index];
        net.used -= it->second.rate;
        net.active_sessions.erase(ev.session);
        if (net.active_sessions.empty()) net.used = 0.0;

        if (trace_ != nullptr) {
            TraceRecord rec;
            rec.time = ev.time;
            rec.kind = EventKind::Departure;
            rec.session = ev.session;
            rec.home = it->second.home_op;
            rec.serving = it->second.serving_op;
            rec.used_after = used_snapshot();
            rec.counted = it->second.start >= config_.sim.warmup;
            trace_->push_back(std::move(rec));
        }
        sessions_.erase(it);
    }

    std::vector<double> used_snapshot() const
    {
        std::vector<double> used;
        used.reserve(networks_.size());
        for (const auto& net : networks_) used.push_back(net.used);
        return used;
    }

    const ScenarioConfig& config_;
    SimTrace* trace_;
    std::map<OperatorId, std::size_t> index_;
    std::vector<NetworkState> networks_;
    std::vector<double> rates_;
    std::vector<Stream> arrival_streams_;
    std::vector<Stream> duration_streams_;
    std::vector<HomeContext> homes_;
    std::vector<bool> home_ok_;
    std::priority_queue<Event, std::vector<Event>, EventLater> queue_;
    std::unordered_map<SessionId, Session> sessions_;
    std::uint64_t next_seq_ = 0;
    SessionId next_session_ = 0;
    SimReport report_;
};

}  // namespace

SimReport run_simulation(const ScenarioConfig& config, std::uint64_t seed, SimTrace* trace)
{
    require_valid(config);
    return World(config, seed, trace).run();
}

ReplicationSet run_replications(const ScenarioConfig& config, int n, std::uint64_t base_seed,
                                double level)
{
    if (n < 1) throw std::domain_error("replications must be >= 1");
    require_valid(config);

    ReplicationSet set;
    set.level = level;
    set.reports.resize(static_cast<std::size_t>(n));

    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), n));
    for (std::size_t start = 0; start < set.reports.size(); start += workers) {
        std::vector<std::future<SimReport>> batch;
        for (std::size_t k = start; k < std::min(set.reports.size(), start + workers); ++k)
            batch.push_back(std::async(std::launch::async, [&config, base_seed, k] {
                return run_simulation(config, base_seed + k);
            }));
        for (std::size_t j = 0; j < batch.size(); ++j) set.reports[start + j] = batch[j].get();
    }

    for (const auto& op : config.operators) {
        std::vector<double> blocking;
        std::vector<double> profit;
        for (const auto& r : set.reports) {
            blocking.push_back(r.blocking_probability.at(op.id));
            profit.push_back(r.global_profit.at(op.id));
        }
        OperatorAggregate agg;
        agg.blocking_mean = mean(blocking);
        agg.profit_mean = mean(profit);
        if (n >= 2) {
            agg.blocking_ci = confidence_interval(blocking, level);
            agg.profit_ci = confidence_interval(profit, level);
        }
        set.aggregate[op.id] = agg;
    }
    for (const auto& r : set.reports) set.selection.add(r.selection);
    return set;
}

}  // namespace opsel
