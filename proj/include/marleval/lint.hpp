#pragma once

#include <map>
#include <string>
#include <vector>

#include "marleval/model.hpp"

namespace marleval {

enum class LintStatus { Pass, Warn, Fail, NotApplicable };

std::string toString(LintStatus status);

enum class PolicyClass { OffPolicy, OnPolicy, Unknown };

std::string toString(PolicyClass policy);
PolicyClass policyClassFromString(const std::string& text);  // throws SchemaViolation

struct LintCheck {
    std::string id;
    std::string description;
    LintStatus status = LintStatus::Pass;
    std::string finding;  // empty when there is nothing to point at
    bool operator==(const LintCheck&) const = default;
};

struct LintSummary {
    int pass = 0;
    int warn = 0;
    int fail = 0;
    int not_applicable = 0;
    bool operator==(const LintSummary&) const = default;
};

// Result of linting one log: one entry per registered check, in registry
// order, plus tallies that always match the entries.
class LintReport {
public:
    explicit LintReport(std::vector<LintCheck> checks);

    const std::vector<LintCheck>& checks() const noexcept { return checks_; }
    const LintSummary& summary() const noexcept { return summary_; }
    bool hasFailures() const noexcept { return summary_.fail > 0; }
    const LintCheck& check(const std::string& id) const;  // throws EmptyInput

    bool operator==(const LintReport&) const = default;

private:
    std::vector<LintCheck> checks_;
    LintSummary summary_;
};

// The fixed check registry: (id, description) in report order. Every check a
// report can contain is listed here.
const std::vector<std::pair<std::string, std::string>>& lintCheckRegistry();

// Checks a log against the protocol's experimental-practice rules. Thresholds
// come from `config`; `policy` optionally tags algorithms as on/off-policy
// (untagged algorithms default to Unknown, whose training-duration check can
// only warn or stay not_applicable because the right budget is unknowable).
LintReport lintProtocol(const ExperimentLog& log, const ProtocolConfig& config,
                        const std::map<std::string, PolicyClass>& policy = {});

std::string renderLintText(const LintReport& report);
std::string lintReportToJson(const LintReport& report);

// Parses a JSON object mapping algorithm names to policy-class strings
// ("off_policy", "on_policy", "unknown"). Throws MalformedJson on broken
// JSON, SchemaViolation on anything else.
std::map<std::string, PolicyClass> parsePolicyClasses(const std::string& utf8_json);

}  // namespace marleval
