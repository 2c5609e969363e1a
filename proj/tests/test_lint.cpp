#include <doctest.h>

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "marleval/lint.hpp"
#include "support.hpp"

using namespace marleval;

namespace {

// Thresholds under which testsupport::tinyLog() is fully conforming: two runs
// per group, one episode per interval, evaluations every 10k steps up to 20k,
// single-episode absolute blocks.
ProtocolConfig tinyConfig() {
    ProtocolConfig config;
    config.runs = 2;
    config.eval_episodes = 1;
    config.eval_interval = 10'000;
    config.timesteps_off_policy = 20'000;
    config.timesteps_on_policy = 40'000;
    config.absolute_episodes = 1;
    return config;
}

std::map<std::string, PolicyClass> offPolicyTags() {
    return {{"alg_a", PolicyClass::OffPolicy}, {"alg_b", PolicyClass::OffPolicy}};
}

// Log with a single group ("env/task/alg") built from the given runs.
ExperimentLog singleGroupLog(ExperimentLog::RunMap runs,
                             std::vector<MetricDescriptor> descriptors = {
                                 MetricDescriptor(kReturnMetric)}) {
    ExperimentLog::EnvMap envs;
    envs["env"]["task"].emplace("alg", std::move(runs));
    return ExperimentLog(std::move(envs), std::move(descriptors), {});
}

}  // namespace

TEST_SUITE("lint") {

TEST_CASE("registry lists the protocol checks in report order") {
    const auto& registry = lintCheckRegistry();
    REQUIRE(registry.size() == 9);
    const std::vector<std::string> expected{
        "multiple_environments", "multiple_tasks",        "runs_count",
        "eval_episode_count",    "eval_interval",         "training_duration",
        "absolute_present",      "absolute_episode_count", "return_metric_present"};
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(registry[i].first == expected[i]);
        CHECK(!registry[i].second.empty());
    }
}

TEST_CASE("a conforming log passes every check") {
    const LintReport report =
        lintProtocol(testsupport::tinyLog(), tinyConfig(), offPolicyTags());
    REQUIRE(report.checks().size() == 9);
    for (const auto& check : report.checks()) {
        CAPTURE(check.id);
        CHECK(check.status == LintStatus::Pass);
        CHECK(check.finding.empty());
    }
    CHECK(report.summary() == LintSummary{9, 0, 0, 0});
    CHECK(!report.hasFailures());

    // Linting is a pure function of its inputs.
    CHECK(report == lintProtocol(testsupport::tinyLog(), tinyConfig(), offPolicyTags()));
}

TEST_CASE("single-environment and single-task logs draw warnings") {
    ExperimentLog::RunMap runs;
    runs.emplace("run_00", testsupport::runWithMeans({1.0, 2.0}, 2.0));
    runs.emplace("run_01", testsupport::runWithMeans({1.5, 2.5}, 2.5));
    const ExperimentLog log = singleGroupLog(std::move(runs));

    std::map<std::string, PolicyClass> tags{{"alg", PolicyClass::OffPolicy}};
    const LintReport report = lintProtocol(log, tinyConfig(), tags);
    CHECK(report.check("multiple_environments").status == LintStatus::Warn);
    CHECK(report.check("multiple_environments").finding.find("1 environment") !=
          std::string::npos);
    CHECK(report.check("multiple_tasks").status == LintStatus::Warn);
    // Everything else still passes.
    CHECK(report.summary().warn == 2);
    CHECK(report.summary().fail == 0);
    CHECK(!report.hasFailures());
}

TEST_CASE("too few runs fails with the observed and required counts") {
    ProtocolConfig config = tinyConfig();
    config.runs = 3;  // tinyLog provides two per group
    const LintReport report =
        lintProtocol(testsupport::tinyLog(), config, offPolicyTags());
    const LintCheck& check = report.check("runs_count");
    CHECK(check.status == LintStatus::Fail);
    CHECK(check.finding.find("found 2, protocol requires 3") != std::string::npos);
    // All six groups offend; the finding points at the first and counts the rest.
    CHECK(check.finding.find("(and 5 more)") != std::string::npos);
    CHECK(report.hasFailures());
}

TEST_CASE("unexpected evaluation episode counts warn") {
    ProtocolConfig config = tinyConfig();
    config.eval_episodes = 32;  // tinyLog records one episode per interval
    const LintReport report =
        lintProtocol(testsupport::tinyLog(), config, offPolicyTags());
    const LintCheck& check = report.check("eval_episode_count");
    CHECK(check.status == LintStatus::Warn);
    CHECK(check.finding.find("32") != std::string::npos);
    CHECK(!report.hasFailures());
}

TEST_CASE("off-grid evaluation steps warn") {
    SUBCASE("wrong first step") {
        ProtocolConfig config = tinyConfig();
        config.eval_interval = 7'000;
        const LintReport report =
            lintProtocol(testsupport::tinyLog(), config, offPolicyTags());
        CHECK(report.check("eval_interval").status == LintStatus::Warn);
    }
    SUBCASE("stretched gap") {
        ExperimentLog::RunMap runs;
        for (const std::string id : {"run_00", "run_01"}) {
            runs.emplace(id, RunRecord({testsupport::interval(10'000, {1.0}),
                                        testsupport::interval(25'000, {2.0})},
                                       testsupport::absolute({2.0})));
        }
        const ExperimentLog log = singleGroupLog(std::move(runs));
        std::map<std::string, PolicyClass> tags{{"alg", PolicyClass::OffPolicy}};
        ProtocolConfig config = tinyConfig();
        config.timesteps_off_policy = 25'000;
        const LintReport report = lintProtocol(log, config, tags);
        CHECK(report.check("eval_interval").status == LintStatus::Warn);
        CHECK(report.check("eval_interval").finding.find("10000") != std::string::npos);
        CHECK(report.check("training_duration").status == LintStatus::Pass);
    }
    SUBCASE("a grid starting at zero is on-protocol") {
        ExperimentLog::RunMap runs;
        for (const std::string id : {"run_00", "run_01"}) {
            runs.emplace(id, RunRecord({testsupport::interval(0, {1.0}),
                                        testsupport::interval(10'000, {2.0}),
                                        testsupport::interval(20'000, {3.0})},
                                       testsupport::absolute({3.0})));
        }
        const ExperimentLog log = singleGroupLog(std::move(runs));
        std::map<std::string, PolicyClass> tags{{"alg", PolicyClass::OffPolicy}};
        const LintReport report = lintProtocol(log, tinyConfig(), tags);
        CHECK(report.check("eval_interval").status == LintStatus::Pass);
    }
}

TEST_CASE("training duration depends on the algorithm's policy class") {
    // tinyLog trains to 20k steps.
    SUBCASE("off-policy below budget fails") {
        ProtocolConfig config = tinyConfig();
        config.timesteps_off_policy = 50'000;
        const LintReport report =
            lintProtocol(testsupport::tinyLog(), config, offPolicyTags());
        const LintCheck& check = report.check("training_duration");
        CHECK(check.status == LintStatus::Fail);
        CHECK(check.finding.find("off_policy") != std::string::npos);
    }
    SUBCASE("on-policy algorithms are held to the larger budget") {
        ProtocolConfig config = tinyConfig();
        config.timesteps_off_policy = 10'000;  // would pass under this budget
        config.timesteps_on_policy = 50'000;
        std::map<std::string, PolicyClass> tags{{"alg_a", PolicyClass::OnPolicy},
                                               {"alg_b", PolicyClass::OnPolicy}};
        const LintReport report = lintProtocol(testsupport::tinyLog(), config, tags);
        CHECK(report.check("training_duration").status == LintStatus::Fail);
        CHECK(report.check("training_duration").finding.find("on_policy") !=
              std::string::npos);
    }
    SUBCASE("untagged below every budget warns rather than fails") {
        ProtocolConfig config = tinyConfig();
        config.timesteps_off_policy = 50'000;
        const LintReport report = lintProtocol(testsupport::tinyLog(), config, {});
        CHECK(report.check("training_duration").status == LintStatus::Warn);
        CHECK(!report.hasFailures());
    }
    SUBCASE("untagged above the smaller budget cannot be adjudicated") {
        const LintReport report =
            lintProtocol(testsupport::tinyLog(), tinyConfig(), {});
        CHECK(report.check("training_duration").status == LintStatus::NotApplicable);
    }
}

TEST_CASE("missing absolute blocks fail") {
    ExperimentLog::RunMap runs;
    runs.emplace("run_00", testsupport::runWithMeans({1.0, 2.0}, 2.0));
    runs.emplace("run_01", RunRecord({testsupport::interval(10'000, {1.0}),
                                      testsupport::interval(20'000, {2.0})},
                                     std::nullopt));
    const ExperimentLog log = singleGroupLog(std::move(runs));
    std::map<std::string, PolicyClass> tags{{"alg", PolicyClass::OffPolicy}};
    const LintReport report = lintProtocol(log, tinyConfig(), tags);
    const LintCheck& check = report.check("absolute_present");
    CHECK(check.status == LintStatus::Fail);
    CHECK(check.finding.find("run_01") != std::string::npos);
    // The episode-count check only judges blocks that exist.
    CHECK(report.check("absolute_episode_count").status == LintStatus::Pass);
}

TEST_CASE("absolute blocks with the wrong episode count warn") {
    ProtocolConfig config = tinyConfig();
    config.absolute_episodes = 320;  // tinyLog records a single episode
    const LintReport report =
        lintProtocol(testsupport::tinyLog(), config, offPolicyTags());
    const LintCheck& check = report.check("absolute_episode_count");
    CHECK(check.status == LintStatus::Warn);
    CHECK(check.finding.find("320") != std::string::npos);
}

TEST_CASE("a missing return declaration fails") {
    ExperimentLog::RunMap runs;
    runs.emplace("run_00", testsupport::runWithMeans({1.0, 2.0}, 2.0));
    runs.emplace("run_01", testsupport::runWithMeans({1.5, 2.5}, 2.5));
    const ExperimentLog log = singleGroupLog(std::move(runs), {});
    std::map<std::string, PolicyClass> tags{{"alg", PolicyClass::OffPolicy}};
    const LintReport report = lintProtocol(log, tinyConfig(), tags);
    const LintCheck& check = report.check("return_metric_present");
    CHECK(check.status == LintStatus::Fail);
    CHECK(check.finding.find("metrics") != std::string::npos);
}

TEST_CASE("reports expose lookups and reject foreign ids") {
    const LintReport report =
        lintProtocol(testsupport::tinyLog(), tinyConfig(), offPolicyTags());
    CHECK(report.check("runs_count").id == "runs_count");
    CHECK_THROWS_AS(report.check("nonexistent"), EmptyInput);
    CHECK_THROWS_AS(LintReport({LintCheck{"made_up", "", LintStatus::Pass, ""}}),
                    InvariantViolation);

    // Tallies always match the per-check statuses.
    int pass = 0;
    for (const auto& check : report.checks()) {
        if (check.status == LintStatus::Pass) ++pass;
    }
    CHECK(report.summary().pass == pass);
}

TEST_CASE("text rendering lists one row per check plus a summary") {
    const LintReport report =
        lintProtocol(testsupport::tinyLog(), tinyConfig(), offPolicyTags());
    const std::string text = renderLintText(report);
    CHECK(text.find("multiple_environments") != std::string::npos);
    CHECK(text.find("summary: 9 pass, 0 warn, 0 fail, 0 not applicable\n") !=
          std::string::npos);
    // One line per check plus the summary line.
    CHECK(std::count(text.begin(), text.end(), '\n') == 10);
}

TEST_CASE("json rendering carries every check and the tallies") {
    const LintReport report = lintProtocol(testsupport::tinyLog(), tinyConfig(), {});
    const auto doc = nlohmann::json::parse(lintReportToJson(report));
    REQUIRE(doc.at("checks").size() == 9);
    CHECK(doc.at("checks")[0].at("id") == "multiple_environments");
    CHECK(doc.at("checks")[0].at("status") == "pass");
    CHECK(doc.at("summary").at("not_applicable") == 1);  // untagged duration check
}

TEST_CASE("policy classes parse from json and round-trip as strings") {
    const auto policy = parsePolicyClasses(
        R"({"alg_a": "off_policy", "alg_b": "on_policy", "alg_c": "unknown"})");
    REQUIRE(policy.size() == 3);
    CHECK(policy.at("alg_a") == PolicyClass::OffPolicy);
    CHECK(policy.at("alg_b") == PolicyClass::OnPolicy);
    CHECK(policy.at("alg_c") == PolicyClass::Unknown);

    CHECK_THROWS_AS(parsePolicyClasses("not json"), MalformedJson);
    CHECK_THROWS_AS(parsePolicyClasses("[]"), SchemaViolation);
    CHECK_THROWS_AS(parsePolicyClasses(R"({"alg": 3})"), SchemaViolation);
    CHECK_THROWS_AS(parsePolicyClasses(R"({"alg": "sometimes"})"), SchemaViolation);

    for (PolicyClass p :
         {PolicyClass::OffPolicy, PolicyClass::OnPolicy, PolicyClass::Unknown}) {
        CHECK(policyClassFromString(toString(p)) == p);
    }
    for (LintStatus s : {LintStatus::Pass, LintStatus::Warn, LintStatus::Fail,
                         LintStatus::NotApplicable}) {
        CHECK(!toString(s).empty());
    }
}

}  // TEST_SUITE
