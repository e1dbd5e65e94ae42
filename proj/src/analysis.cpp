#include "opsel/analysis.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "opsel/config_io.hpp"

namespace opsel {

using nlohmann::json;

StaticReport analyze_scenario(const ScenarioConfig& config)
{
    require_valid(config);

    StaticReport report;
    std::vector<ThresholdResult> all;
    for (const auto& op : config.operators) {
        const auto ctx = build_home_context(config, op.id);

        HomeAnalysis home;
        home.home = op.id;
        home.paid_price = ctx.user.paid_price;
        home.su = ctx.su;
        for (const auto& offer : ctx.offers)
            home.candidates.push_back(evaluate_candidate(ctx.user, ctx.su, offer, {1.0, 1.0}));
        home.classes = classify_candidates(ctx.user, ctx.su, ctx.offers);
        home.all_candidates_lossy = std::all_of(home.candidates.begin(), home.candidates.end(),
                                                [](const CandidateEval& e) { return e.profit < 0.0; });

        for (std::size_t i = 0; i < ctx.offers.size(); ++i)
            for (std::size_t j = i + 1; j < ctx.offers.size(); ++j) {
                auto result = pairwise_threshold(ctx.user, ctx.su, ctx.offers[i], ctx.offers[j]);
                all.push_back(result);
                home.thresholds.push_back({ctx.offers[i].op, ctx.offers[j].op, result});
            }
        report.homes.push_back(std::move(home));
    }
    report.limits = common_limits(all);
    return report;
}

std::string format_number(double value)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", value);
    return buf;
}

namespace {

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

std::string regime_name(const ThresholdResult& r)
{
    if (const auto* d = std::get_if<DominantRegime>(&r)) return d->degenerate ? "degenerate" : "dominant";
    return "threshold";
}

}  // namespace

std::string format_static_report(const StaticReport& report)
{
    std::ostringstream out;
    out << "H-op  Su        candidate  d         p-Cs       \n";
    for (const auto& home : report.homes) {
        for (const auto& c : home.candidates) {
            char line[128];
            std::snprintf(line, sizeof line, "%-5s %-9s %-10s %-9s %-10s\n", to_string(home.home).c_str(),
                          format_number(home.su.value).c_str(), to_string(c.op).c_str(),
                          format_number(c.distance).c_str(), format_number(c.profit).c_str());
            out << line;
        }
    }
    out << "\nH-op  with dmin  with best profit\n";
    for (const auto& home : report.homes) {
        char line[128];
        std::snprintf(line, sizeof line, "%-5s %-10s %-s%s\n", to_string(home.home).c_str(),
                      to_string(home.classes.dmin_op).c_str(),
                      to_string(home.classes.best_profit_op).c_str(),
                      home.all_candidates_lossy ? "  (all candidates lossy: lowest loss)" : "");
        out << line;
    }
    out << "\nthresholds:\n";
    for (const auto& home : report.homes) {
        for (const auto& t : home.thresholds) {
            out << "  " << to_string(home.home) << ": " << to_string(t.a) << " vs " << to_string(t.b) << " -> ";
            if (const auto* d = std::get_if<DominantRegime>(&t.result)) {
                out << (d->degenerate ? "degenerate, " : "dominant ") << to_string(d->op) << " at every ratio\n";
            } else {
                const auto& th = std::get<ThresholdRegime>(t.result);
                out << "L=" << format_number(th.limit) << " (below: " << to_string(th.below_selects)
                    << ", above: " << to_string(th.above_selects) << ")\n";
            }
        }
    }
    out << "\ncommon limits: ";
    if (report.limits.profit_regime_max)
        out << "profit<" << format_number(*report.limits.profit_regime_max) << " score>"
            << format_number(*report.limits.score_regime_min) << "\n";
    else
        out << "none\n";
    return out.str();
}

std::vector<double> SweepReport::ratios() const
{
    std::vector<double> out;
    for (const auto& p : points)
        if (p.ratio) out.push_back(*p.ratio);
    return out;
}

namespace {

std::vector<OperatorId> operator_ids(const ScenarioConfig& config)
{
    std::vector<OperatorId> ids;
    for (const auto& op : config.operators) ids.push_back(op.id);
    return ids;
}

}  // namespace

SweepReport sweep_ratio(const ScenarioConfig& config, std::vector<double> ratios, int n)
{
    if (ratios.empty()) throw std::domain_error("no ratios to sweep");
    if (n < 1) throw std::domain_error("replications must be >= 1");
    for (double r : ratios)
        if (!(r >= 0.0)) throw std::domain_error("ratios must be >= 0");
    std::sort(ratios.begin(), ratios.end());
    ratios.erase(std::unique(ratios.begin(), ratios.end()), ratios.end());

    SweepReport report;
    report.operators = operator_ids(config);
    report.replications = n;
    report.base_seed = config.sim.seed;
    report.thresholds = analyze_scenario(config);

    for (double r : ratios) {
        ScenarioConfig cfg = config;
        cfg.set_uniform_ratio(r);
        report.points.push_back({r, run_replications(cfg, n, config.sim.seed)});
    }
    return report;
}

SweepReport simulate_with_config_strategy(const ScenarioConfig& config, int n)
{
    SweepReport report;
    report.operators = operator_ids(config);
    report.replications = n;
    report.base_seed = config.sim.seed;
    report.thresholds = analyze_scenario(config);

    std::optional<double> common;
    bool uniform = true;
    for (const auto& [id, w] : config.strategy) {
        auto r = w.ratio();
        if (!r || (common && *common != *r)) uniform = false;
        else common = r;
    }
    report.points.push_back({uniform ? common : std::nullopt, run_replications(config, n, config.sim.seed)});
    return report;
}

std::optional<OutputFormat> parse_output_format(const std::string& text)
{
    if (text == "csv") return OutputFormat::Csv;
    if (text == "json") return OutputFormat::Json;
    return std::nullopt;
}

namespace {

std::string ratio_label(const std::optional<double>& ratio) { return ratio ? format_number(*ratio) : "config"; }

json threshold_json(const PairThreshold& t)
{
    json j = {{"op_a", to_string(t.a)}, {"op_b", to_string(t.b)}, {"regime", regime_name(t.result)}};
    if (const auto* d = std::get_if<DominantRegime>(&t.result)) {
        j["dominant_op"] = to_string(d->op);
    } else {
        const auto& th = std::get<ThresholdRegime>(t.result);
        j["l_value"] = th.limit;
        j["below_selects"] = to_string(th.below_selects);
        j["above_selects"] = to_string(th.above_selects);
    }
    return j;
}

json static_json(const StaticReport& report)
{
    json homes = json::array();
    for (const auto& h : report.homes) {
        json cands = json::array();
        for (const auto& c : h.candidates)
            cands.push_back({{"op", to_string(c.op)}, {"distance", c.distance}, {"profit", c.profit}});
        json thresholds = json::array();
        for (const auto& t : h.thresholds) thresholds.push_back(threshold_json(t));
        homes.push_back({{"home_op", to_string(h.home)},
                         {"paid_price", h.paid_price},
                         {"su", h.su.value},
                         {"candidates", cands},
                         {"dmin_op", to_string(h.classes.dmin_op)},
                         {"best_profit_op", to_string(h.classes.best_profit_op)},
                         {"all_candidates_lossy", h.all_candidates_lossy},
                         {"thresholds", thresholds}});
    }
    json limits = {{"profit_regime_max", nullptr}, {"score_regime_min", nullptr}};
    if (report.limits.profit_regime_max) limits["profit_regime_max"] = *report.limits.profit_regime_max;
    if (report.limits.score_regime_min) limits["score_regime_min"] = *report.limits.score_regime_min;
    return {{"homes", homes}, {"common_limits", limits}};
}

void emit_static_csv(const StaticReport& report, FileSet& files)
{
    std::string cand = "home_op,dmin_op,best_profit_op,all_candidates_lossy\n";
    std::string thr = "home_op,op_a,op_b,regime,l_value,below_selects,above_selects\n";
    for (const auto& h : report.homes) {
        cand += to_string(h.home) + "," + to_string(h.classes.dmin_op) + "," +
                to_string(h.classes.best_profit_op) + "," + (h.all_candidates_lossy ? "1" : "0") + "\n";
        for (const auto& t : h.thresholds) {
            thr += to_string(h.home) + "," + to_string(t.a) + "," + to_string(t.b) + "," +
                   regime_name(t.result) + ",";
            if (const auto* d = std::get_if<DominantRegime>(&t.result)) {
                thr += "," + to_string(d->op) + "," + to_string(d->op) + "\n";
            } else {
                const auto& th = std::get<ThresholdRegime>(t.result);
                thr += format_number(th.limit) + "," + to_string(th.below_selects) + "," +
                       to_string(th.above_selects) + "\n";
            }
        }
    }
    files["candidates.csv"] = cand;
    files["thresholds.csv"] = thr;
    files["limits.csv"] = "profit_regime_max,score_regime_min\n" + opt_number(report.limits.profit_regime_max) +
                          "," + opt_number(report.limits.score_regime_min) + "\n";
}

std::string interval_lo(const std::optional<Interval>& ci) { return ci ? format_number(ci->lo) : ""; }
std::string interval_hi(const std::optional<Interval>& ci) { return ci ? format_number(ci->hi) : ""; }

json interval_json(const std::optional<Interval>& ci)
{
    if (!ci) return nullptr;
    return {{"lo", ci->lo}, {"hi", ci->hi}};
}

}  // namespace

FileSet emit(const StaticReport& report, OutputFormat format)
{
    FileSet files;
    if (format == OutputFormat::Json)
        files["analysis.json"] = static_json(report).dump(2) + "\n";
    else
        emit_static_csv(report, files);
    return files;
}

FileSet emit(const SweepReport& report, OutputFormat format)
{
    FileSet files;
    if (format == OutputFormat::Json) {
        json points = json::array();
        for (const auto& p : report.points) {
            json selection = json::array();
            for (const auto& [home, row] : p.runs.selection.percentages(report.operators))
                for (const auto& [serving, pct] : row)
                    selection.push_back(
                        {{"home_op", to_string(home)}, {"serving_op", to_string(serving)}, {"percent", pct}});
            json per_op = json::array();
            for (const auto& [id, agg] : p.runs.aggregate)
                per_op.push_back({{"op", to_string(id)},
                                  {"blocking_mean", agg.blocking_mean},
                                  {"blocking_ci", interval_json(agg.blocking_ci)},
                                  {"profit_mean", agg.profit_mean},
                                  {"profit_ci", interval_json(agg.profit_ci)}});
            json reps = json::array();
            for (const auto& r : p.runs.reports) {
                json ops = json::array();
                for (const auto& [id, ledger] : r.ledgers)
                    ops.push_back({{"op", to_string(id)},
                                   {"arrivals", ledger.arrivals},
                                   {"blocked", ledger.blocked},
                                   {"served_home", ledger.served_home},
                                   {"transferred", ledger.transferred()},
                                   {"revenue_own", ledger.revenue_own},
                                   {"revenue_guest_hosting", ledger.revenue_guest_hosting},
                                   {"revenue_exchanged_clients", ledger.revenue_exchanged_clients},
                                   {"cost_exchange", ledger.cost_exchange},
                                   {"global_profit", ledger.global_profit()}});
                reps.push_back({{"seed", r.seed}, {"horizon", r.horizon}, {"warmup", r.warmup}, {"operators", ops}});
            }
            points.push_back({{"ratio", p.ratio ? json(*p.ratio) : json(nullptr)},
                              {"selection_matrix", selection},
                              {"operators", per_op},
                              {"replications", reps}});
        }
        json ratios = report.ratios();
        files["report.json"] = json{{"ratios", ratios},
                                    {"replications", report.replications},
                                    {"base_seed", report.base_seed},
                                    {"confidence_level", report.points.empty() ? 0.90 : report.points.front().runs.level},
                                    {"points", points},
                                    {"thresholds", static_json(report.thresholds)}}
                                   .dump(2) +
                               "\n";
        return files;
    }

    std::string blocking = "op,ratio,mean,ci_lo,ci_hi\n";
    std::string profit = "op,ratio,mean,ci_lo,ci_hi\n";
    std::string reps = "ratio,replication,seed,op,arrivals,blocked,transferred,blocking,global_profit\n";
    for (const auto& p : report.points) {
        const std::string label = p.ratio ? format_number(*p.ratio) : "";
        std::string selection = "home_op,serving_op,percent\n";
        for (const auto& [home, row] : p.runs.selection.percentages(report.operators))
            for (const auto& [serving, pct] : row)
                selection += to_string(home) + "," + to_string(serving) + "," + format_number(pct) + "\n";
        files["selection_" + ratio_label(p.ratio) + ".csv"] = selection;

        for (const auto& [id, agg] : p.runs.aggregate) {
            blocking += to_string(id) + "," + label + "," + format_number(agg.blocking_mean) + "," +
                        interval_lo(agg.blocking_ci) + "," + interval_hi(agg.blocking_ci) + "\n";
            profit += to_string(id) + "," + label + "," + format_number(agg.profit_mean) + "," +
                      interval_lo(agg.profit_ci) + "," + interval_hi(agg.profit_ci) + "\n";
        }
        for (std::size_t k = 0; k < p.runs.reports.size(); ++k) {
            const auto& r = p.runs.reports[k];
            for (const auto& [id, ledger] : r.ledgers)
                reps += label + "," + std::to_string(k) + "," + std::to_string(r.seed) + "," + to_string(id) + "," +
                        std::to_string(ledger.arrivals) + "," + std::to_string(ledger.blocked) + "," +
                        std::to_string(ledger.transferred()) + "," +
                        format_number(r.blocking_probability.at(id)) + "," +
                        format_number(r.global_profit.at(id)) + "\n";
        }
    }
    files["blocking.csv"] = blocking;
    files["profit.csv"] = profit;
    files["replications.csv"] = reps;
    emit_static_csv(report.thresholds, files);
    return files;
}

std::size_t CsvTable::column(std::string_view name) const
{
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::out_of_range("no CSV column " + std::string(name));
    return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(std::string_view text)
{
    auto split = [](std::string_view line) {
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            auto comma = line.find(',', start);
            fields.emplace_back(line.substr(start, comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        return fields;
    };

    CsvTable table;
    bool first = true;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        if (line.empty()) continue;
        if (first) {
            table.header = split(line);
            first = false;
        } else {
            table.rows.push_back(split(line));
        }
    }
    return table;
}

}  // namespace opsel
