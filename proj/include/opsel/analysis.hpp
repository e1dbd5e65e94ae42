// Experiment orchestration: static candidate analysis, strategy-ratio sweeps
// and report serialization.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "opsel/decision.hpp"
#include "opsel/model.hpp"
#include "opsel/simkernel.hpp"

namespace opsel {

struct PairThreshold {
    OperatorId a;
    OperatorId b;
    ThresholdResult result;
};

struct HomeAnalysis {
    OperatorId home;
    double paid_price = 0.0;
    Score su;
    std::vector<CandidateEval> candidates;  // cf evaluated at Wu = Wop = 1
    CandidateClasses classes;
    /// Every candidate costs the home operator more than the user pays, so
    /// the best-profit candidate is the one with the smallest loss.
    bool all_candidates_lossy = false;
    std::vector<PairThreshold> thresholds;
};

struct StaticReport {
    std::vector<HomeAnalysis> homes;
    CommonLimits limits;
};

/// Throws ConfigError on an invalid config.
StaticReport analyze_scenario(const ScenarioConfig& config);

/// Human-readable candidate table, thresholds and common limits.
std::string format_static_report(const StaticReport& report);

struct RatioPoint {
    std::optional<double> ratio;  // empty: per-operator strategies from config
    ReplicationSet runs;
};

struct SweepReport {
    std::vector<OperatorId> operators;
    std::vector<RatioPoint> points;  // ratios strictly increasing
    int replications = 0;
    std::uint64_t base_seed = 0;
    StaticReport thresholds;

    std::vector<double> ratios() const;
};

/// Runs `n` replications at every ratio with the same seeds (config.sim.seed
/// + k for replication k), so each ratio sees identical traffic. Ratios are
/// sorted and de-duplicated. Throws std::domain_error on an empty list, a
/// negative ratio or n < 1.
SweepReport sweep_ratio(const ScenarioConfig& config, std::vector<double> ratios, int n);

/// Single-point report from the config's own strategy weights.
SweepReport simulate_with_config_strategy(const ScenarioConfig& config, int n);

enum class OutputFormat { Csv, Json };

std::optional<OutputFormat> parse_output_format(const std::string& text);

/// File name -> contents.
using FileSet = std::map<std::string, std::string>;

FileSet emit(const StaticReport& report, OutputFormat format);
FileSet emit(const SweepReport& report, OutputFormat format);

/// Six significant digits, '.' decimal separator.
std::string format_number(double value);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const;
};

/// Reads the unquoted CSV produced by emit().
CsvTable parse_csv(std::string_view text);

}  // namespace opsel
