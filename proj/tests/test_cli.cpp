#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "support.hpp"

using testsupport::runCli;
using testsupport::scratchDir;

namespace {

// Paths of a small synthetic experiment shared by the CLI tests: a spec, the
// protocol config it satisfies, a policy-class map and the generated log.
struct Fixtures {
    std::string spec;
    std::string config;
    std::string policy;
    std::string log;
};

const Fixtures& fixtures() {
    static const Fixtures paths = [] {
        Fixtures f;
        const auto dir = scratchDir();
        f.spec = (dir / "cli_spec.json").string();
        f.config = (dir / "cli_config.json").string();
        f.policy = (dir / "cli_policy.json").string();
        f.log = (dir / "cli_log.json").string();
        testsupport::writeTextFile(f.spec, R"({
  "environments": [
    {"name": "env_a", "tasks": ["task_1", "task_2"]},
    {"name": "env_b", "tasks": ["task_1"]}
  ],
  "algorithms": [
    {"name": "alpha", "model": {"mean": 10.0, "stddev": 0.5, "curve": "saturating"}},
    {"name": "beta", "model": {"mean": 8.0, "stddev": 0.5, "curve": "linear"}}
  ],
  "runs": 3,
  "intervals": 4,
  "eval_interval": 10000,
  "eval_episodes": 2,
  "absolute_episodes": 4,
  "seed": 5
})");
        testsupport::writeTextFile(f.config, R"({
  "runs": 3,
  "eval_episodes": 2,
  "eval_interval": 10000,
  "absolute_episodes": 4,
  "timesteps_off_policy": 40000,
  "timesteps_on_policy": 400000,
  "bootstrap_replicates": 100,
  "seed": 5
})");
        testsupport::writeTextFile(f.policy,
                                   R"({"alpha": "off_policy", "beta": "off_policy"})");
        const auto result = runCli("synth --spec " + f.spec + " --out " + f.log);
        REQUIRE_MESSAGE(result.exit_code == 0, result.err);
        return f;
    }();
    return paths;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help and usage errors") {
    CHECK(runCli("--help").exit_code == 0);
    CHECK(runCli("--help").out.find("synth") != std::string::npos);
    CHECK(runCli("lint --help").exit_code == 0);

    CHECK(runCli("").exit_code == 2);              // a subcommand is required
    CHECK(runCli("frobnicate").exit_code == 2);    // unknown subcommand
    CHECK(runCli("aggregate").exit_code == 2);     // missing required options
    CHECK(!runCli("aggregate").err.empty());
    // Flag values outside the accepted set fail at parse time.
    const Fixtures& f = fixtures();
    CHECK(runCli("curves " + f.log +
                 " --algorithm alpha --metric return --statistic median --out " +
                 (scratchDir() / "never.csv").string())
              .exit_code == 2);
}

TEST_CASE("missing input files exit with a usage error") {
    const auto result = runCli("tables " + (scratchDir() / "missing.json").string());
    CHECK(result.exit_code == 2);
    CHECK(result.err.find("no such file") != std::string::npos);
}

TEST_CASE("validate accepts the generated log and reports broken documents") {
    const Fixtures& f = fixtures();
    const auto ok = runCli("validate " + f.log + " --config " + f.config);
    CHECK(ok.exit_code == 0);
    CHECK(ok.out == "valid (0 errors, 0 warnings)\n");

    // Against the stock protocol the fixture's episode counts draw soft
    // warnings, but the document stays valid.
    const auto warned = runCli("validate " + f.log);
    CHECK(warned.exit_code == 0);
    CHECK(warned.out.find("warning:") != std::string::npos);
    CHECK(warned.out.find("\nvalid (") != std::string::npos);

    const auto json_run = runCli("validate " + f.log + " --json --config " + f.config);
    CHECK(json_run.exit_code == 0);
    CHECK(nlohmann::json::parse(json_run.out).at("is_valid") == true);

    const std::string broken = (scratchDir() / "broken.json").string();
    testsupport::writeTextFile(broken, "this is not json");
    const auto bad = runCli("validate " + broken);
    CHECK(bad.exit_code == 1);
    CHECK(bad.out.find("invalid") != std::string::npos);
}

TEST_CASE("lint exits cleanly only when the protocol is satisfied") {
    const Fixtures& f = fixtures();
    const auto pass = runCli("lint " + f.log + " --config " + f.config +
                             " --policy-class " + f.policy);
    CHECK(pass.exit_code == 0);
    CHECK(pass.out.find("summary: 9 pass, 0 warn, 0 fail, 0 not applicable") !=
          std::string::npos);

    // Against the stock protocol the small log is undersized.
    const auto fail = runCli("lint " + f.log);
    CHECK(fail.exit_code == 1);
    CHECK(fail.out.find("fail") != std::string::npos);

    const auto as_json = runCli("lint " + f.log + " --config " + f.config +
                                " --policy-class " + f.policy + " --json");
    CHECK(as_json.exit_code == 0);
    CHECK(nlohmann::json::parse(as_json.out).at("checks").size() == 9);

    // A config file with unknown keys is rejected as data error.
    const std::string bad_config = (scratchDir() / "bad_config.json").string();
    testsupport::writeTextFile(bad_config, R"({"runz": 3})");
    CHECK(runCli("lint " + f.log + " --config " + bad_config).exit_code == 1);
}

TEST_CASE("aggregate writes byte-identical reports for the same seed") {
    const Fixtures& f = fixtures();
    const std::string out_a = (scratchDir() / "agg_a.json").string();
    const std::string out_b = (scratchDir() / "agg_b.json").string();
    const std::string args = "aggregate " + f.log +
                             " --metric return --replicates 100 --seed 3 --out ";
    CHECK(runCli(args + out_a).exit_code == 0);
    CHECK(runCli(args + out_b).exit_code == 0);
    const std::string bytes = testsupport::readTextFile(out_a);
    CHECK(bytes == testsupport::readTextFile(out_b));

    const auto doc = nlohmann::json::parse(bytes);
    CHECK(doc.at("entries").contains("alpha"));
    CHECK(doc.at("entries").at("alpha").at("iqm").contains("point"));
    CHECK(doc.at("entries").at("alpha").contains("optimality_gap"));
}

TEST_CASE("tables renders an aggregate report") {
    const Fixtures& f = fixtures();
    const std::string report = (scratchDir() / "agg_table.json").string();
    REQUIRE(runCli("aggregate " + f.log +
                   " --metric return --replicates 100 --seed 3 --out " + report)
                .exit_code == 0);

    const auto md = runCli("tables " + report);
    CHECK(md.exit_code == 0);
    CHECK(md.out.find("| algorithm | iqm | optimality_gap |") != std::string::npos);
    CHECK(md.out.find("| alpha | 0.") != std::string::npos);

    const auto tex = runCli("tables " + report + " --format tex --precision 2");
    CHECK(tex.exit_code == 0);
    CHECK(tex.out.find("\\begin{tabular}") != std::string::npos);
}

TEST_CASE("compare reports an improvement probability") {
    const Fixtures& f = fixtures();
    const auto result = runCli("compare " + f.log +
                               " --candidate alpha --baseline beta --metric return"
                               " --replicates 50 --seed 2");
    CHECK(result.exit_code == 0);
    const auto doc = nlohmann::json::parse(result.out);
    CHECK(doc.at("candidate") == "alpha");
    const double p = doc.at("probability").get<double>();
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);

    const auto unknown = runCli("compare " + f.log +
                                " --candidate nobody --baseline beta --metric return");
    CHECK(unknown.exit_code == 1);
    CHECK(unknown.err.find("error:") == 0);
}

TEST_CASE("profile fans out one csv per algorithm") {
    const Fixtures& f = fixtures();
    const std::string out = (scratchDir() / "prof.csv").string();
    CHECK(runCli("profile " + f.log +
                 " --metric return --tau-points 21 --replicates 50 --seed 2 --out " +
                 out)
              .exit_code == 0);
    // Two algorithms in the log: the label lands in the file name.
    const std::string alpha_csv = (scratchDir() / "prof.alpha.csv").string();
    const std::string beta_csv = (scratchDir() / "prof.beta.csv").string();
    CHECK(std::filesystem::exists(alpha_csv));
    CHECK(std::filesystem::exists(beta_csv));
    CHECK(!std::filesystem::exists(out));
    CHECK(testsupport::readTextFile(alpha_csv)
              .rfind("x,estimate,ci_lower,ci_upper\n", 0) == 0);

    // Naming one algorithm writes exactly the requested path.
    const std::string single = (scratchDir() / "prof_alpha_only.csv").string();
    CHECK(runCli("profile " + f.log +
                 " --metric return --algorithm alpha --tau-points 21"
                 " --replicates 50 --seed 2 --out " +
                 single)
              .exit_code == 0);
    CHECK(std::filesystem::exists(single));
}

TEST_CASE("curves emits one row per evaluation step") {
    const Fixtures& f = fixtures();
    const std::string out = (scratchDir() / "curve_alpha.csv").string();
    const auto result = runCli("curves " + f.log +
                               " --algorithm alpha --metric return --statistic mean"
                               " --replicates 50 --seed 2 --out " +
                               out);
    CHECK(result.exit_code == 0);
    const std::string csv = testsupport::readTextFile(out);
    CHECK(csv.rfind("x,estimate,ci_lower,ci_upper\n", 0) == 0);
    // Header plus one row per interval (the fixture generates four).
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("plot combines csv curves into one deterministic svg") {
    const Fixtures& f = fixtures();
    const std::string alpha_csv = (scratchDir() / "alpha.csv").string();
    const std::string beta_csv = (scratchDir() / "beta.csv").string();
    REQUIRE(runCli("curves " + f.log +
                   " --algorithm alpha --metric return --replicates 50 --seed 2"
                   " --out " +
                   alpha_csv)
                .exit_code == 0);
    REQUIRE(runCli("curves " + f.log +
                   " --algorithm beta --metric return --replicates 50 --seed 2"
                   " --out " +
                   beta_csv)
                .exit_code == 0);

    const std::string svg_a = (scratchDir() / "plot_a.svg").string();
    const std::string svg_b = (scratchDir() / "plot_b.svg").string();
    const std::string args = "plot " + alpha_csv + " " + beta_csv +
                             " --title Training --x-label steps --y-label score"
                             " --out ";
    CHECK(runCli(args + svg_a).exit_code == 0);
    CHECK(runCli(args + svg_b).exit_code == 0);

    const std::string svg = testsupport::readTextFile(svg_a);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("alpha") != std::string::npos);  // legend label from stem
    CHECK(svg.find("beta") != std::string::npos);
    CHECK(svg == testsupport::readTextFile(svg_b));
}

TEST_CASE("card prints the report template") {
    const auto md = runCli("card");
    CHECK(md.exit_code == 0);
    CHECK(md.out.rfind("# Experiment report", 0) == 0);
    CHECK(md.out.find("Discount factor") != std::string::npos);

    const auto tex = runCli("card --format tex");
    CHECK(tex.exit_code == 0);
    CHECK(tex.out.find("\\subsection*{Hyperparameters}") != std::string::npos);
}

}  // TEST_SUITE
