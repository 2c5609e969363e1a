#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "marleval/errors.hpp"

namespace marleval {

// Name of the mandatory episode-return metric. Every evaluation interval and
// every absolute block must record it; all other metrics are optional extras.
inline constexpr const char* kReturnMetric = "return";

// ---------------------------------------------------------------------------
// Small shared value types
// ---------------------------------------------------------------------------

struct Finding {
    std::string path;
    std::string message;
    bool operator==(const Finding&) const = default;
};

// Collects non-fatal observations (clamped values, degenerate bounds) raised
// by otherwise total computations. Callers that do not care pass nullptr.
struct WarningLog {
    std::vector<Finding> items;
    void add(std::string path, std::string message) {
        items.push_back(Finding{std::move(path), std::move(message)});
    }
};

enum class CiMethod { Normal, StratifiedBootstrap, Degenerate };

std::string toString(CiMethod method);

class ConfidenceInterval {
public:
    ConfidenceInterval() = default;  // degenerate [0, 0] at level 0.95
    ConfidenceInterval(double lower, double upper, double level, CiMethod method);

    double lower() const noexcept { return lower_; }
    double upper() const noexcept { return upper_; }
    double level() const noexcept { return level_; }
    CiMethod method() const noexcept { return method_; }

    bool operator==(const ConfidenceInterval&) const = default;

private:
    double lower_ = 0.0;
    double upper_ = 0.0;
    double level_ = 0.95;
    CiMethod method_ = CiMethod::Degenerate;
};

// Identifies one task: environments own tasks, and several environments may
// reuse a task name, so the pair is the identity.
struct TaskId {
    std::string env;
    std::string task;
    auto operator<=>(const TaskId&) const = default;
    std::string str() const { return env + "/" + task; }
};

// Declares how a metric behaves so downstream statistics can treat every
// value as higher-is-better and skip re-normalising inherently bounded ones.
class MetricDescriptor {
public:
    MetricDescriptor(std::string name, bool unit_interval = false,
                     bool higher_is_better = true);

    const std::string& name() const noexcept { return name_; }
    bool unitInterval() const noexcept { return unit_interval_; }
    bool higherIsBetter() const noexcept { return higher_is_better_; }

    bool operator==(const MetricDescriptor&) const = default;

private:
    std::string name_;
    bool unit_interval_ = false;
    bool higher_is_better_ = true;
};

// Evaluation-protocol parameters. Defaults encode the recommended protocol:
// train off-policy learners for 2M steps (on-policy for 20M), 10 independent
// runs, 32 evaluation episodes every 10k steps, and a final best-policy
// evaluation over 320 episodes; aggregate with 95% CIs from 2000 bootstrap
// replicates.
struct ProtocolConfig {
    std::int64_t timesteps_off_policy = 2'000'000;
    std::int64_t timesteps_on_policy = 20'000'000;
    int runs = 10;
    int eval_episodes = 32;
    std::int64_t eval_interval = 10'000;
    int absolute_episodes = 320;
    double ci_level = 0.95;
    int bootstrap_replicates = 2000;
    double gamma = 1.0;
    std::uint64_t seed = 42;

    void validate() const;  // throws InvariantViolation
    bool operator==(const ProtocolConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Experiment log records
// ---------------------------------------------------------------------------

// One periodic evaluation: the training step it happened at plus per-metric
// episode values. All metric lists at one interval must have the same length
// (the episodes are shared; metrics are different measurements of them).
class IntervalRecord {
public:
    using MetricMap = std::map<std::string, std::vector<double>>;

    IntervalRecord(std::int64_t step_count, MetricMap metrics);

    std::int64_t stepCount() const noexcept { return step_count_; }
    const MetricMap& metrics() const noexcept { return metrics_; }
    bool has(const std::string& metric) const { return metrics_.count(metric) != 0; }
    // Throws UnknownMetric when the interval does not carry `metric`.
    const std::vector<double>& episodes(const std::string& metric) const;
    std::size_t episodeCount() const noexcept;  // common list length (0 if none)

    bool operator==(const IntervalRecord&) const = default;

private:
    std::int64_t step_count_ = 0;
    MetricMap metrics_;
};

// Final best-policy evaluation of one run: per-metric episode values from
// re-running the best checkpoint. Must record the return metric.
class AbsoluteRecord {
public:
    using MetricMap = std::map<std::string, std::vector<double>>;

    explicit AbsoluteRecord(MetricMap metrics);

    const MetricMap& metrics() const noexcept { return metrics_; }
    bool has(const std::string& metric) const { return metrics_.count(metric) != 0; }
    const std::vector<double>& episodes(const std::string& metric) const;

    bool operator==(const AbsoluteRecord&) const = default;

private:
    MetricMap metrics_;
};

// One independent training run: its interval evaluations in strictly
// increasing step order (at least one), each carrying the return metric,
// plus an optional absolute block.
class RunRecord {
public:
    RunRecord(std::vector<IntervalRecord> intervals,
              std::optional<AbsoluteRecord> absolute);

    const std::vector<IntervalRecord>& intervals() const noexcept { return intervals_; }
    const std::optional<AbsoluteRecord>& absolute() const noexcept { return absolute_; }
    std::vector<std::int64_t> stepGrid() const;
    std::int64_t finalStep() const noexcept { return intervals_.back().stepCount(); }

    bool operator==(const RunRecord&) const = default;

private:
    std::vector<IntervalRecord> intervals_;
    std::optional<AbsoluteRecord> absolute_;
};

// The full experiment: environments -> tasks -> algorithms -> runs, plus the
// declared metric descriptors and free-form string metadata. Construction
// validates that every group is non-empty and that all runs within one
// (environment, task, algorithm) group share an identical step grid; a log
// that constructs is safe for every downstream operation.
class ExperimentLog {
public:
    using RunMap = std::map<std::string, RunRecord>;        // run id -> run
    using AlgMap = std::map<std::string, RunMap>;           // algorithm -> runs
    using TaskMap = std::map<std::string, AlgMap>;          // task -> algorithms
    using EnvMap = std::map<std::string, TaskMap>;          // environment -> tasks

    ExperimentLog() = default;
    ExperimentLog(EnvMap environments, std::vector<MetricDescriptor> metric_descriptors,
                  std::map<std::string, std::string> metadata);

    const EnvMap& environments() const noexcept { return environments_; }
    const std::vector<MetricDescriptor>& metricDescriptors() const noexcept {
        return metric_descriptors_;
    }
    const std::map<std::string, std::string>& metadata() const noexcept {
        return metadata_;
    }

    bool empty() const noexcept { return environments_.empty(); }

    // All (environment, task) pairs, lexicographically ordered.
    std::vector<TaskId> taskIds() const;
    // Sorted union of algorithm names across all tasks.
    std::vector<std::string> algorithms() const;
    // Tasks on which `algorithm` appears, lexicographically ordered.
    std::vector<TaskId> tasksOf(const std::string& algorithm) const;

    // Lookup helpers. The find* variants return nullptr when absent; the
    // throwing variants raise UnknownTask / UnknownAlgorithm.
    const TaskMap* findEnvironment(const std::string& env) const;
    const AlgMap* findTask(const std::string& env, const std::string& task) const;
    const RunMap* findGroup(const std::string& env, const std::string& task,
                            const std::string& algorithm) const;
    const AlgMap& taskGroup(const std::string& env, const std::string& task) const;
    const RunMap& group(const std::string& env, const std::string& task,
                        const std::string& algorithm) const;

    // Shared step grid of one group (identical across its runs by invariant).
    std::vector<std::int64_t> stepGrid(const std::string& env, const std::string& task,
                                       const std::string& algorithm) const;

    const MetricDescriptor* findDescriptor(const std::string& metric) const;

    bool operator==(const ExperimentLog&) const = default;

private:
    EnvMap environments_;
    std::vector<MetricDescriptor> metric_descriptors_;
    std::map<std::string, std::string> metadata_;
};

// ---------------------------------------------------------------------------
// Evaluation matrix
// ---------------------------------------------------------------------------

// Scores of one algorithm under one metric: rows are runs, columns are tasks,
// stored row-major. A normalised matrix promises every entry lies in [0, 1]
// (up to 1e-9 slack for accumulated rounding).
class EvalMatrix {
public:
    EvalMatrix(std::string algorithm, std::string metric, std::vector<TaskId> tasks,
               std::size_t runs, std::vector<double> values_row_major, bool normalised);

    const std::string& algorithm() const noexcept { return algorithm_; }
    const std::string& metric() const noexcept { return metric_; }
    const std::vector<TaskId>& tasks() const noexcept { return tasks_; }
    std::size_t runs() const noexcept { return runs_; }
    std::size_t taskCount() const noexcept { return tasks_.size(); }
    bool normalised() const noexcept { return normalised_; }

    double at(std::size_t run, std::size_t task) const {
        return values_[run * tasks_.size() + task];
    }
    std::vector<double> column(std::size_t task) const;
    const std::vector<double>& values() const noexcept { return values_; }

    bool operator==(const EvalMatrix&) const = default;

private:
    std::string algorithm_;
    std::string metric_;
    std::vector<TaskId> tasks_;
    std::size_t runs_ = 0;
    std::vector<double> values_;
    bool normalised_ = false;
};

}  // namespace marleval
