#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "opsel/cli.hpp"
#include "opsel/config_io.hpp"
#include "support.hpp"

using namespace opsel;
using namespace opsel::testing;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args)
{
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& name)
{
    auto dir = fs::temp_directory_path() / ("opsel-cli-" + name + "-" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

}  // namespace

TEST_CASE("analyze prints the candidate report")
{
    const auto r = run({"analyze"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("common limits: profit<1.8 score>3.6") != std::string::npos);
    CHECK(r.out.find("Op2   Op1        Op3") != std::string::npos);
}

TEST_CASE("analyze writes files on request")
{
    const auto dir = scratch_dir("analyze");
    CHECK(run({"analyze", "--format", "json", "--out", dir.string()}).code == kExitOk);
    CHECK(fs::exists(dir / "analysis.json"));
    const auto meta = nlohmann::json::parse(slurp(dir / "meta.json"));
    CHECK(meta.at("command") == "analyze");
    fs::remove_all(dir);
}

TEST_CASE("simulate is reproducible for a fixed seed")
{
    const auto dir = scratch_dir("simulate");
    save_scenario(short_scenario(), dir / "short.json");
    const auto cfg = (dir / "short.json").string();

    const auto a = dir / "a";
    const auto b = dir / "b";
    CHECK(run({"simulate", "--config", cfg, "--seed", "7", "--ratio", "0.25", "--out", a.string()}).code == kExitOk);
    CHECK(run({"simulate", "--config", cfg, "--seed", "7", "--ratio", "0.25", "--out", b.string()}).code == kExitOk);
    for (const char* name : {"blocking.csv", "profit.csv", "replications.csv", "selection_0.25.csv"}) {
        CAPTURE(name);
        REQUIRE(fs::exists(a / name));
        CHECK(slurp(a / name) == slurp(b / name));
    }
    const auto meta = nlohmann::json::parse(slurp(a / "meta.json"));
    CHECK(meta.at("config").at("sim").at("seed") == 7);
    fs::remove_all(dir);
}

TEST_CASE("sweep writes one selection table per ratio")
{
    const auto dir = scratch_dir("sweep");
    save_scenario(short_scenario(), dir / "short.json");
    const auto r = run({"sweep", "--config", (dir / "short.json").string(), "--ratios", "0.25,8", "--reps", "2",
                        "--out", (dir / "out").string()});
    CHECK(r.code == kExitOk);
    CHECK(fs::exists(dir / "out" / "selection_0.25.csv"));
    CHECK(fs::exists(dir / "out" / "selection_8.csv"));
    CHECK(r.out.find("ratio 0.25") != std::string::npos);

    CHECK(run({"sweep", "--config", (dir / "short.json").string(), "--format", "json", "--reps", "1", "--out",
               (dir / "json").string()})
              .code == kExitOk);
    CHECK(fs::exists(dir / "json" / "report.json"));
    fs::remove_all(dir);
}

TEST_CASE("exit codes")
{
    CHECK(run({}).code == kExitValidation);
    CHECK(run({"bogus"}).code == kExitValidation);
    CHECK(run({"simulate", "--ratio", "-1"}).code == kExitValidation);
    CHECK(run({"simulate", "--format", "xml"}).code == kExitValidation);
    CHECK(run({"serve"}).code == kExitValidation);
    CHECK(run({"--help"}).code == kExitOk);

    const auto dir = scratch_dir("codes");
    auto bad = default_scenario();
    bad.operators[0].capacity = 0.0;
    save_scenario(bad, dir / "bad.json");
    const auto invalid = run({"analyze", "--config", (dir / "bad.json").string()});
    CHECK(invalid.code == kExitValidation);
    CHECK(invalid.err.find("capacity") != std::string::npos);

    std::ofstream(dir / "broken.json") << "{";
    CHECK(run({"analyze", "--config", (dir / "broken.json").string()}).code == kExitValidation);

    CHECK(run({"analyze", "--config", (dir / "missing.json").string()}).code == kExitIo);
    std::ofstream(dir / "file") << "x";
    CHECK(run({"analyze", "--out", (dir / "file" / "sub").string()}).code == kExitIo);
    CHECK(run({"serve", "--endpoint", "nonsense"}).code == kExitIo);
    fs::remove_all(dir);
}
