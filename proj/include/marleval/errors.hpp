#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace marleval {

// Base class for every toolkit error. `path` identifies the offending input
// location: a JSON-pointer-style path for documents ("$.environments.env1"),
// a group path for in-memory logs, or a flag/file name for CLI input. It may
// be empty when no location applies.
class Error : public std::runtime_error {
public:
    Error(std::string path, std::string message)
        : std::runtime_error(path.empty() ? message : path + ": " + message),
          path_(std::move(path)),
          message_(std::move(message)) {}

    explicit Error(std::string message) : Error(std::string(), std::move(message)) {}

    const std::string& path() const noexcept { return path_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::string path_;
    std::string message_;
};

// Input document is not syntactically valid JSON.
struct MalformedJson : Error { using Error::Error; };
// Document parses but does not match the log / config / spec schema.
struct SchemaViolation : Error { using Error::Error; };
// A value-type constructor was handed fields that break its invariants.
struct InvariantViolation : Error { using Error::Error; };
// Merging logs found the same run id twice within one group.
struct DuplicateRun : Error { using Error::Error; };
// A metric name was requested that the record does not carry.
struct UnknownMetric : Error { using Error::Error; };
// An (environment, task) pair was requested that the log does not contain.
struct UnknownTask : Error { using Error::Error; };
// An algorithm name was requested that the log does not contain.
struct UnknownAlgorithm : Error { using Error::Error; };
// A run is missing its best-policy absolute evaluation block.
struct MissingAbsolute : Error { using Error::Error; };
// A bounds pool ended up with zero samples for the requested metric.
struct EmptyPool : Error { using Error::Error; };
// An operation over a collection received nothing to work on.
struct EmptyInput : Error { using Error::Error; };
// Run counts differ across the task columns of one evaluation matrix.
struct RaggedRuns : Error { using Error::Error; };
// Two matrices (or report entries) do not share the same task list / metric.
struct TaskListMismatch : Error { using Error::Error; };
// Tasks of one algorithm do not share a common evaluation step grid.
struct StepGridMismatch : Error { using Error::Error; };
// A plot was asked to combine curves of different kinds.
struct MixedCurveKinds : Error { using Error::Error; };
// A synthetic-data spec is structurally valid JSON but semantically broken.
struct InvalidSpec : Error { using Error::Error; };
// File could not be read or written.
struct IoError : Error { using Error::Error; };

}  // namespace marleval
