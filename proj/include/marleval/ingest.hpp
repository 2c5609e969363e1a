#pragma once

#include <string>
#include <vector>

#include "marleval/model.hpp"

namespace marleval {

// Soft findings about a structurally valid log. Hard violations never reach
// this type: they fail construction or parsing with a thrown Error.
struct ValidationReport {
    std::vector<Finding> errors;
    std::vector<Finding> warnings;
    bool isValid() const noexcept { return errors.empty(); }
    bool operator==(const ValidationReport&) const = default;
};

// Parses the canonical experiment-log document. Values of metrics declared
// higher_is_better=false are negated on the way in (and back on the way out)
// so every in-memory value is higher-is-better. Throws MalformedJson,
// SchemaViolation, InvariantViolation or DuplicateRun with the offending
// JSON path.
ExperimentLog parseExperimentLog(const std::string& utf8_json);

// Canonical serialisation: sorted object keys, two-space indent, shortest
// round-trip float representation. parse(serialize(log)) == log, bit-exact.
std::string serializeExperimentLog(const ExperimentLog& log);

// Protocol-conformance soft checks: episode counts differing from
// config.eval_episodes, missing absolute blocks, metric names that appear in
// some runs of a group but not others, and data metrics with no descriptor.
ValidationReport validateLog(const ExperimentLog& log, const ProtocolConfig& config);

// Union of several logs. Colliding run ids within one group raise
// DuplicateRun; conflicting descriptor declarations raise SchemaViolation;
// metadata keys are prefixed with "log<i>." (source position in the list).
ExperimentLog mergeLogs(const std::vector<ExperimentLog>& logs);

// Protocol-config document: a JSON object whose keys mirror the
// ProtocolConfig field names; absent keys keep their defaults, unknown keys
// are a SchemaViolation.
ProtocolConfig parseProtocolConfig(const std::string& utf8_json);
std::string serializeProtocolConfig(const ProtocolConfig& config);

std::string validationReportToJson(const ValidationReport& report);

}  // namespace marleval
