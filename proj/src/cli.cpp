#include "opsel/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "opsel/analysis.hpp"
#include "opsel/broker.hpp"
#include "opsel/config_io.hpp"

namespace opsel {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> ratio;
    std::vector<double> ratios{0.25, 8.0};
    std::optional<int> reps;
    std::string format = "csv";
    std::string out_dir;
    std::string endpoint;
};

ScenarioConfig load_config(const Options& opt)
{
    ScenarioConfig cfg = opt.config_path.empty() ? default_scenario() : load_scenario(opt.config_path);
    if (opt.seed) cfg.sim.seed = *opt.seed;
    if (opt.ratio) cfg.set_uniform_ratio(*opt.ratio);
    if (opt.reps) cfg.sim.replications = *opt.reps;
    require_valid(cfg);
    return cfg;
}

OutputFormat output_format(const Options& opt)
{
    auto f = parse_output_format(opt.format);
    if (!f) throw ConfigError("unknown output format '" + opt.format + "'");
    return *f;
}

void write_files(const FileSet& files, const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    for (const auto& [name, contents] : files) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw IoError("cannot write " + (dir / name).string());
        f << contents;
        if (!f) throw IoError("write failed for " + (dir / name).string());
    }
}

json run_metadata(const std::string& command, const std::vector<std::string>& args, const ScenarioConfig& cfg)
{
    return {{"command", command}, {"args", args}, {"config", to_json(cfg)}};
}

void print_aggregates(const SweepReport& report, std::ostream& out)
{
    for (const auto& p : report.points) {
        out << "ratio " << (p.ratio ? format_number(*p.ratio) : std::string("config")) << " ("
            << report.replications << " replications)\n";
        for (const auto& [id, agg] : p.runs.aggregate)
            out << "  " << to_string(id) << " blocking=" << format_number(agg.blocking_mean)
                << " global_profit=" << format_number(agg.profit_mean) << "\n";
        for (const auto& [home, row] : p.runs.selection.percentages(report.operators)) {
            out << "  " << to_string(home) << " ->";
            for (const auto& [serving, pct] : row) out << " " << to_string(serving) << ":" << format_number(pct) << "%";
            out << "\n";
        }
    }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Cost-function operator selection for cooperating wireless operators", "opsel"};
    app.require_subcommand(1);

    Options opt;
    auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "Scenario JSON file (default: built-in scenario)");
    };
    auto add_output = [&](CLI::App* sub, std::string default_dir) {
        opt.out_dir = std::move(default_dir);
        sub->add_option("--format", opt.format, "Output format: csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--out", opt.out_dir, "Output directory");
    };

    auto* analyze = app.add_subcommand("analyze", "Candidate qualification, pairwise limits and common limits");
    add_config(analyze);
    analyze->add_option("--format", opt.format, "Output format for --out: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    analyze->add_option("--out", opt.out_dir, "Also write report files to this directory");

    auto* simulate = app.add_subcommand("simulate", "Run replications at one strategy setting");
    add_config(simulate);
    simulate->add_option("--seed", opt.seed, "Base seed (replication k uses seed + k)");
    simulate->add_option("--ratio", opt.ratio, "Set Wu/Wop = ratio for every operator")->check(CLI::NonNegativeNumber);
    simulate->add_option("--reps", opt.reps, "Replications")->check(CLI::PositiveNumber);
    add_output(simulate, "opsel-out");

    auto* sweep = app.add_subcommand("sweep", "Run replications at several Wu/Wop ratios with shared seeds");
    add_config(sweep);
    sweep->add_option("--seed", opt.seed, "Base seed");
    sweep->add_option("--ratios", opt.ratios, "Comma-separated Wu/Wop ratios")
        ->delimiter(',')
        ->check(CLI::NonNegativeNumber);
    sweep->add_option("--reps", opt.reps, "Replications per ratio")->check(CLI::PositiveNumber);
    add_output(sweep, "opsel-out");

    auto* serve_cmd = app.add_subcommand("serve", "Run the selection broker daemon");
    add_config(serve_cmd);
    serve_cmd->add_option("--endpoint", opt.endpoint, "host:port to listen on")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n\n" << app.help();
        return kExitValidation;
    }

    try {
        if (analyze->parsed()) {
            const auto cfg = load_config(opt);
            const auto report = analyze_scenario(cfg);
            out << format_static_report(report);
            if (!opt.out_dir.empty()) {
                auto files = emit(report, output_format(opt));
                files["meta.json"] = run_metadata("analyze", args, cfg).dump(2) + "\n";
                write_files(files, opt.out_dir);
            }
        } else if (simulate->parsed()) {
            const auto cfg = load_config(opt);
            const auto report = simulate_with_config_strategy(cfg, cfg.sim.replications);
            auto files = emit(report, output_format(opt));
            files["meta.json"] = run_metadata("simulate", args, cfg).dump(2) + "\n";
            write_files(files, opt.out_dir);
            print_aggregates(report, out);
        } else if (sweep->parsed()) {
            const auto cfg = load_config(opt);
            const auto report = sweep_ratio(cfg, opt.ratios, cfg.sim.replications);
            auto files = emit(report, output_format(opt));
            files["meta.json"] = run_metadata("sweep", args, cfg).dump(2) + "\n";
            write_files(files, opt.out_dir);
            print_aggregates(report, out);
        } else if (serve_cmd->parsed()) {
            const auto cfg = load_config(opt);
            serve(opt.endpoint, BrokerDefaults::from_scenario(cfg));
        }
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const BrokerError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}

}  // namespace opsel
