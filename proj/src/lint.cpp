#include "marleval/lint.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

namespace marleval {

namespace {

// Severity order used when one check inspects many groups: the worst
// observation wins the check's overall status.
int severity(LintStatus status) {
    switch (status) {
        case LintStatus::Pass: return 0;
        case LintStatus::NotApplicable: return 1;
        case LintStatus::Warn: return 2;
        case LintStatus::Fail: return 3;
    }
    return 0;
}

// Accumulates per-group observations into one check result.
class CheckResult {
public:
    void observe(LintStatus status, std::string finding = {}) {
        if (severity(status) > severity(status_)) status_ = status;
        if (!finding.empty() && status != LintStatus::Pass) {
            findings_.push_back(std::move(finding));
        }
    }

    LintCheck finish(const std::string& id, const std::string& description) const {
        std::string finding;
        if (!findings_.empty()) {
            finding = findings_.front();
            if (findings_.size() > 1) {
                finding += " (and " + std::to_string(findings_.size() - 1) + " more)";
            }
        }
        return LintCheck{id, description, status_, finding};
    }

private:
    LintStatus status_ = LintStatus::Pass;
    std::vector<std::string> findings_;
};

std::string groupPath(const std::string& env, const std::string& task,
                      const std::string& alg) {
    return "$.environments." + env + "." + task + "." + alg;
}

}  // namespace

std::string toString(LintStatus status) {
    switch (status) {
        case LintStatus::Pass: return "pass";
        case LintStatus::Warn: return "warn";
        case LintStatus::Fail: return "fail";
        case LintStatus::NotApplicable: return "not_applicable";
    }
    return "unknown";
}

std::string toString(PolicyClass policy) {
    switch (policy) {
        case PolicyClass::OffPolicy: return "off_policy";
        case PolicyClass::OnPolicy: return "on_policy";
        case PolicyClass::Unknown: return "unknown";
    }
    return "unknown";
}

PolicyClass policyClassFromString(const std::string& text) {
    if (text == "off_policy") return PolicyClass::OffPolicy;
    if (text == "on_policy") return PolicyClass::OnPolicy;
    if (text == "unknown") return PolicyClass::Unknown;
    throw SchemaViolation("policy_class", "unknown policy class '" + text +
                                              "' (expected off_policy, on_policy or "
                                              "unknown)");
}

LintReport::LintReport(std::vector<LintCheck> checks) : checks_(std::move(checks)) {
    for (const auto& check : checks_) {
        bool registered = false;
        for (const auto& [id, description] : lintCheckRegistry()) {
            (void)description;
            if (check.id == id) {
                registered = true;
                break;
            }
        }
        if (!registered) {
            throw InvariantViolation("LintReport",
                                     "check id '" + check.id + "' is not registered");
        }
        switch (check.status) {
            case LintStatus::Pass: ++summary_.pass; break;
            case LintStatus::Warn: ++summary_.warn; break;
            case LintStatus::Fail: ++summary_.fail; break;
            case LintStatus::NotApplicable: ++summary_.not_applicable; break;
        }
    }
}

const LintCheck& LintReport::check(const std::string& id) const {
    for (const auto& check : checks_) {
        if (check.id == id) return check;
    }
    throw EmptyInput("LintReport: no check with id '" + id + "'");
}

const std::vector<std::pair<std::string, std::string>>& lintCheckRegistry() {
    static const std::vector<std::pair<std::string, std::string>> registry = {
        {"multiple_environments", "experiments cover more than one environment"},
        {"multiple_tasks", "experiments cover more than one task"},
        {"runs_count", "every group has at least the protocol number of runs"},
        {"eval_episode_count",
         "every evaluation interval uses the protocol episode count"},
        {"eval_interval", "evaluations happen at the fixed protocol step interval"},
        {"training_duration", "runs train for at least the protocol timestep budget"},
        {"absolute_present", "every run carries a best-policy absolute block"},
        {"absolute_episode_count",
         "absolute blocks use the protocol episode count"},
        {"return_metric_present", "the episode return metric is declared and recorded"},
    };
    return registry;
}

LintReport lintProtocol(const ExperimentLog& log, const ProtocolConfig& config,
                        const std::map<std::string, PolicyClass>& policy) {
    config.validate();

    CheckResult multiple_environments;
    CheckResult multiple_tasks;
    CheckResult runs_count;
    CheckResult eval_episode_count;
    CheckResult eval_interval;
    CheckResult training_duration;
    CheckResult absolute_present;
    CheckResult absolute_episode_count;
    CheckResult return_metric_present;

    const std::size_t env_count = log.environments().size();
    if (env_count < 2) {
        multiple_environments.observe(
            LintStatus::Warn, "found " + std::to_string(env_count) +
                                  " environment(s); conclusions from a single "
                                  "environment rarely generalise");
    }
    const std::size_t task_count = log.taskIds().size();
    if (task_count < 2) {
        multiple_tasks.observe(LintStatus::Warn,
                               "found " + std::to_string(task_count) +
                                   " task(s); more than one is expected");
    }

    if (log.metricDescriptors().empty() ||
        log.findDescriptor(kReturnMetric) == nullptr) {
        return_metric_present.observe(LintStatus::Fail,
                                      "$.metrics: no '" + std::string(kReturnMetric) +
                                          "' metric is declared");
    }

    for (const auto& [env, tasks] : log.environments()) {
        for (const auto& [task, algs] : tasks) {
            for (const auto& [alg, runs] : algs) {
                const std::string path = groupPath(env, task, alg);

                if (runs.size() < static_cast<std::size_t>(config.runs)) {
                    runs_count.observe(LintStatus::Fail,
                                       path + ": found " + std::to_string(runs.size()) +
                                           ", protocol requires " +
                                           std::to_string(config.runs));
                }

                PolicyClass tagged = PolicyClass::Unknown;
                if (auto it = policy.find(alg); it != policy.end()) tagged = it->second;
                const std::int64_t required = (tagged == PolicyClass::OnPolicy)
                                                  ? config.timesteps_on_policy
                                                  : config.timesteps_off_policy;

                for (const auto& [run_id, run] : runs) {
                    const std::string run_path = path + "." + run_id;

                    bool episode_count_ok = true;
                    for (const auto& interval : run.intervals()) {
                        if (interval.episodeCount() !=
                            static_cast<std::size_t>(config.eval_episodes)) {
                            episode_count_ok = false;
                        }
                        if (!interval.has(kReturnMetric)) {
                            return_metric_present.observe(
                                LintStatus::Fail,
                                run_path + ": an interval lacks the return metric");
                        }
                    }
                    if (!episode_count_ok) {
                        eval_episode_count.observe(
                            LintStatus::Warn,
                            run_path + ": intervals deviate from " +
                                std::to_string(config.eval_episodes) +
                                " evaluation episodes");
                    }

                    const auto grid = run.stepGrid();
                    bool spacing_ok =
                        (grid.front() == 0 || grid.front() == config.eval_interval);
                    for (std::size_t i = 1; i < grid.size() && spacing_ok; ++i) {
                        if (grid[i] - grid[i - 1] != config.eval_interval) {
                            spacing_ok = false;
                        }
                    }
                    if (!spacing_ok) {
                        eval_interval.observe(
                            LintStatus::Warn,
                            run_path + ": evaluations are not spaced every " +
                                std::to_string(config.eval_interval) + " steps");
                    }

                    const std::int64_t final_step = run.finalStep();
                    if (tagged == PolicyClass::Unknown) {
                        // The right budget depends on the (unknown) class:
                        // below even the off-policy budget the run is short
                        // under every reading, so warn; otherwise the
                        // on-policy question cannot be adjudicated.
                        if (final_step < config.timesteps_off_policy) {
                            training_duration.observe(
                                LintStatus::Warn,
                                run_path + ": trained for " +
                                    std::to_string(final_step) +
                                    " steps, below every protocol budget "
                                    "(algorithm policy class unknown)");
                        } else {
                            training_duration.observe(LintStatus::NotApplicable);
                        }
                    } else if (final_step < required) {
                        training_duration.observe(
                            LintStatus::Fail,
                            run_path + ": trained for " + std::to_string(final_step) +
                                " steps, protocol requires " + std::to_string(required) +
                                " for " + toString(tagged) + " algorithms");
                    }

                    if (!run.absolute().has_value()) {
                        absolute_present.observe(LintStatus::Fail,
                                                 run_path + ": no absolute block");
                    } else {
                        const std::size_t episodes =
                            run.absolute()->episodes(kReturnMetric).size();
                        if (episodes != static_cast<std::size_t>(config.absolute_episodes)) {
                            absolute_episode_count.observe(
                                LintStatus::Warn,
                                run_path + ": absolute block has " +
                                    std::to_string(episodes) + " episodes, protocol "
                                    "uses " +
                                    std::to_string(config.absolute_episodes));
                        }
                        if (!run.absolute()->has(kReturnMetric)) {
                            return_metric_present.observe(
                                LintStatus::Fail,
                                run_path + ": absolute block lacks the return metric");
                        }
                    }
                }
            }
        }
    }

    const auto& registry = lintCheckRegistry();
    std::vector<LintCheck> checks;
    checks.reserve(registry.size());
    const CheckResult* results[] = {
        &multiple_environments, &multiple_tasks,   &runs_count,
        &eval_episode_count,    &eval_interval,    &training_duration,
        &absolute_present,      &absolute_episode_count, &return_metric_present,
    };
    for (std::size_t i = 0; i < registry.size(); ++i) {
        checks.push_back(results[i]->finish(registry[i].first, registry[i].second));
    }
    return LintReport(std::move(checks));
}

std::string renderLintText(const LintReport& report) {
    std::size_t width = 0;
    for (const auto& check : report.checks()) width = std::max(width, check.id.size());
    std::ostringstream out;
    for (const auto& check : report.checks()) {
        out << check.id << std::string(width - check.id.size() + 2, ' ')
            << toString(check.status);
        if (!check.finding.empty()) out << "  " << check.finding;
        out << "\n";
    }
    const LintSummary& s = report.summary();
    out << "summary: " << s.pass << " pass, " << s.warn << " warn, " << s.fail
        << " fail, " << s.not_applicable << " not applicable\n";
    return out.str();
}

std::map<std::string, PolicyClass> parsePolicyClasses(const std::string& utf8_json) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(utf8_json);
    } catch (const nlohmann::json::exception& error) {
        throw MalformedJson("$", error.what());
    }
    if (!doc.is_object()) {
        throw SchemaViolation("$", "expected an object mapping algorithm names to "
                                   "policy classes");
    }
    std::map<std::string, PolicyClass> policy;
    for (const auto& [alg, value] : doc.items()) {
        if (!value.is_string()) {
            throw SchemaViolation("$." + alg, "policy class must be a string");
        }
        policy[alg] = policyClassFromString(value.get<std::string>());
    }
    return policy;
}

std::string lintReportToJson(const LintReport& report) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& check : report.checks()) {
        checks.push_back({{"id", check.id},
                          {"description", check.description},
                          {"status", toString(check.status)},
                          {"finding", check.finding}});
    }
    nlohmann::json doc;
    doc["checks"] = std::move(checks);
    doc["summary"] = {{"pass", report.summary().pass},
                      {"warn", report.summary().warn},
                      {"fail", report.summary().fail},
                      {"not_applicable", report.summary().not_applicable}};
    return doc.dump(2) + "\n";
}

}  // namespace marleval
