#include "marleval/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace marleval {

namespace {

void requireFinite(double v, const std::string& path) {
    if (!std::isfinite(v)) {
        throw InvariantViolation(path, "value is not a finite number");
    }
}

void validateMetricMap(const std::map<std::string, std::vector<double>>& metrics,
                       const std::string& path) {
    std::size_t common_length = 0;
    bool first = true;
    for (const auto& [name, episodes] : metrics) {
        if (name.empty()) {
            throw InvariantViolation(path, "metric name must be non-empty");
        }
        if (episodes.empty()) {
            throw InvariantViolation(path + "." + name, "episode list must be non-empty");
        }
        for (std::size_t i = 0; i < episodes.size(); ++i) {
            requireFinite(episodes[i], path + "." + name + "[" + std::to_string(i) + "]");
        }
        if (first) {
            common_length = episodes.size();
            first = false;
        } else if (episodes.size() != common_length) {
            throw InvariantViolation(
                path + "." + name,
                "episode list length " + std::to_string(episodes.size()) +
                    " differs from " + std::to_string(common_length) +
                    " of the other metrics at this evaluation");
        }
    }
}

}  // namespace

std::string toString(CiMethod method) {
    switch (method) {
        case CiMethod::Normal: return "normal";
        case CiMethod::StratifiedBootstrap: return "stratified_bootstrap";
        case CiMethod::Degenerate: return "degenerate";
    }
    return "unknown";
}

ConfidenceInterval::ConfidenceInterval(double lower, double upper, double level,
                                       CiMethod method)
    : lower_(lower), upper_(upper), level_(level), method_(method) {
    requireFinite(lower, "ConfidenceInterval.lower");
    requireFinite(upper, "ConfidenceInterval.upper");
    if (lower > upper) {
        throw InvariantViolation("ConfidenceInterval",
                                 "lower bound exceeds upper bound");
    }
    if (!(level > 0.0 && level < 1.0)) {
        throw InvariantViolation("ConfidenceInterval",
                                 "level must lie strictly in (0, 1)");
    }
}

MetricDescriptor::MetricDescriptor(std::string name, bool unit_interval,
                                   bool higher_is_better)
    : name_(std::move(name)),
      unit_interval_(unit_interval),
      higher_is_better_(higher_is_better) {
    if (name_.empty()) {
        throw InvariantViolation("MetricDescriptor", "name must be non-empty");
    }
    // Lower-is-better values are negated on ingestion so that everything
    // downstream can assume higher-is-better. Negation would push an
    // inherently-[0,1] metric out of its range, so the combination is
    // rejected; flip such metrics to their complement before logging.
    if (unit_interval_ && !higher_is_better_) {
        throw InvariantViolation(
            "MetricDescriptor." + name_,
            "unit-interval metrics must be higher-is-better; store the "
            "complement (1 - value) under a higher-is-better name instead");
    }
}

void ProtocolConfig::validate() const {
    if (timesteps_off_policy <= 0 || timesteps_on_policy <= 0) {
        throw InvariantViolation("ProtocolConfig", "timestep budgets must be positive");
    }
    if (runs <= 0) {
        throw InvariantViolation("ProtocolConfig", "runs must be positive");
    }
    if (eval_episodes <= 0 || absolute_episodes <= 0) {
        throw InvariantViolation("ProtocolConfig", "episode counts must be positive");
    }
    if (eval_interval <= 0) {
        throw InvariantViolation("ProtocolConfig", "eval_interval must be positive");
    }
    if (!(ci_level > 0.0 && ci_level < 1.0)) {
        throw InvariantViolation("ProtocolConfig", "ci_level must lie strictly in (0, 1)");
    }
    if (bootstrap_replicates <= 0) {
        throw InvariantViolation("ProtocolConfig", "bootstrap_replicates must be positive");
    }
    if (!std::isfinite(gamma)) {
        throw InvariantViolation("ProtocolConfig", "gamma must be finite");
    }
}

IntervalRecord::IntervalRecord(std::int64_t step_count, MetricMap metrics)
    : step_count_(step_count), metrics_(std::move(metrics)) {
    if (step_count_ < 0) {
        throw InvariantViolation("IntervalRecord", "step_count must be non-negative");
    }
    validateMetricMap(metrics_, "IntervalRecord.metrics");
}

const std::vector<double>& IntervalRecord::episodes(const std::string& metric) const {
    auto it = metrics_.find(metric);
    if (it == metrics_.end()) {
        throw UnknownMetric("IntervalRecord",
                            "metric '" + metric + "' is not recorded at step " +
                                std::to_string(step_count_));
    }
    return it->second;
}

std::size_t IntervalRecord::episodeCount() const noexcept {
    return metrics_.empty() ? 0 : metrics_.begin()->second.size();
}

AbsoluteRecord::AbsoluteRecord(MetricMap metrics) : metrics_(std::move(metrics)) {
    validateMetricMap(metrics_, "AbsoluteRecord.metrics");
    if (metrics_.count(kReturnMetric) == 0) {
        throw InvariantViolation("AbsoluteRecord",
                                 "the absolute block must record the 'return' metric");
    }
}

const std::vector<double>& AbsoluteRecord::episodes(const std::string& metric) const {
    auto it = metrics_.find(metric);
    if (it == metrics_.end()) {
        throw UnknownMetric("AbsoluteRecord",
                            "metric '" + metric + "' is not recorded in the absolute block");
    }
    return it->second;
}

RunRecord::RunRecord(std::vector<IntervalRecord> intervals,
                     std::optional<AbsoluteRecord> absolute)
    : intervals_(std::move(intervals)), absolute_(std::move(absolute)) {
    if (intervals_.empty()) {
        throw InvariantViolation("RunRecord", "a run must contain at least one interval");
    }
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
        const std::string path = "RunRecord.intervals[" + std::to_string(i) + "]";
        if (i > 0 && intervals_[i].stepCount() <= intervals_[i - 1].stepCount()) {
            throw InvariantViolation(path, "step_count must be strictly increasing");
        }
        if (!intervals_[i].has(kReturnMetric)) {
            throw InvariantViolation(path,
                                     "every interval must record the 'return' metric");
        }
    }
}

std::vector<std::int64_t> RunRecord::stepGrid() const {
    std::vector<std::int64_t> grid;
    grid.reserve(intervals_.size());
    for (const auto& interval : intervals_) grid.push_back(interval.stepCount());
    return grid;
}

ExperimentLog::ExperimentLog(EnvMap environments,
                             std::vector<MetricDescriptor> metric_descriptors,
                             std::map<std::string, std::string> metadata)
    : environments_(std::move(environments)),
      metric_descriptors_(std::move(metric_descriptors)),
      metadata_(std::move(metadata)) {
    std::set<std::string> descriptor_names;
    for (const auto& descriptor : metric_descriptors_) {
        if (!descriptor_names.insert(descriptor.name()).second) {
            throw InvariantViolation("ExperimentLog.metrics",
                                     "duplicate descriptor for metric '" +
                                         descriptor.name() + "'");
        }
    }
    for (const auto& [env, tasks] : environments_) {
        const std::string env_path = "$.environments." + env;
        if (env.empty()) throw InvariantViolation(env_path, "environment name must be non-empty");
        if (tasks.empty()) throw InvariantViolation(env_path, "environment has no tasks");
        for (const auto& [task, algs] : tasks) {
            const std::string task_path = env_path + "." + task;
            if (task.empty()) throw InvariantViolation(task_path, "task name must be non-empty");
            if (algs.empty()) throw InvariantViolation(task_path, "task has no algorithms");
            for (const auto& [alg, runs] : algs) {
                const std::string alg_path = task_path + "." + alg;
                if (alg.empty()) throw InvariantViolation(alg_path, "algorithm name must be non-empty");
                if (runs.empty()) throw InvariantViolation(alg_path, "algorithm has no runs");
                const RunRecord* reference = nullptr;
                std::string reference_id;
                for (const auto& [run_id, run] : runs) {
                    if (run_id.empty()) {
                        throw InvariantViolation(alg_path, "run id must be non-empty");
                    }
                    if (reference == nullptr) {
                        reference = &run;
                        reference_id = run_id;
                    } else if (run.stepGrid() != reference->stepGrid()) {
                        throw InvariantViolation(
                            alg_path + "." + run_id,
                            "step grid differs from run '" + reference_id +
                                "'; all runs of one group must share one grid");
                    }
                }
            }
        }
    }
}

std::vector<TaskId> ExperimentLog::taskIds() const {
    std::vector<TaskId> ids;
    for (const auto& [env, tasks] : environments_) {
        for (const auto& [task, algs] : tasks) {
            (void)algs;
            ids.push_back(TaskId{env, task});
        }
    }
    return ids;
}

std::vector<std::string> ExperimentLog::algorithms() const {
    std::set<std::string> names;
    for (const auto& [env, tasks] : environments_) {
        (void)env;
        for (const auto& [task, algs] : tasks) {
            (void)task;
            for (const auto& [alg, runs] : algs) {
                (void)runs;
                names.insert(alg);
            }
        }
    }
    return {names.begin(), names.end()};
}

std::vector<TaskId> ExperimentLog::tasksOf(const std::string& algorithm) const {
    std::vector<TaskId> ids;
    for (const auto& [env, tasks] : environments_) {
        for (const auto& [task, algs] : tasks) {
            if (algs.count(algorithm) != 0) ids.push_back(TaskId{env, task});
        }
    }
    return ids;
}

const ExperimentLog::TaskMap* ExperimentLog::findEnvironment(const std::string& env) const {
    auto it = environments_.find(env);
    return it == environments_.end() ? nullptr : &it->second;
}

const ExperimentLog::AlgMap* ExperimentLog::findTask(const std::string& env,
                                                     const std::string& task) const {
    const TaskMap* tasks = findEnvironment(env);
    if (tasks == nullptr) return nullptr;
    auto it = tasks->find(task);
    return it == tasks->end() ? nullptr : &it->second;
}

const ExperimentLog::RunMap* ExperimentLog::findGroup(const std::string& env,
                                                      const std::string& task,
                                                      const std::string& algorithm) const {
    const AlgMap* algs = findTask(env, task);
    if (algs == nullptr) return nullptr;
    auto it = algs->find(algorithm);
    return it == algs->end() ? nullptr : &it->second;
}

const ExperimentLog::AlgMap& ExperimentLog::taskGroup(const std::string& env,
                                                      const std::string& task) const {
    const AlgMap* algs = findTask(env, task);
    if (algs == nullptr) {
        throw UnknownTask("$.environments." + env + "." + task,
                          "the log does not contain this (environment, task) pair");
    }
    return *algs;
}

const ExperimentLog::RunMap& ExperimentLog::group(const std::string& env,
                                                  const std::string& task,
                                                  const std::string& algorithm) const {
    const AlgMap& algs = taskGroup(env, task);
    auto it = algs.find(algorithm);
    if (it == algs.end()) {
        throw UnknownAlgorithm("$.environments." + env + "." + task + "." + algorithm,
                               "algorithm '" + algorithm + "' has no runs on this task");
    }
    return it->second;
}

std::vector<std::int64_t> ExperimentLog::stepGrid(const std::string& env,
                                                  const std::string& task,
                                                  const std::string& algorithm) const {
    return group(env, task, algorithm).begin()->second.stepGrid();
}

const MetricDescriptor* ExperimentLog::findDescriptor(const std::string& metric) const {
    for (const auto& descriptor : metric_descriptors_) {
        if (descriptor.name() == metric) return &descriptor;
    }
    return nullptr;
}

EvalMatrix::EvalMatrix(std::string algorithm, std::string metric,
                       std::vector<TaskId> tasks, std::size_t runs,
                       std::vector<double> values_row_major, bool normalised)
    : algorithm_(std::move(algorithm)),
      metric_(std::move(metric)),
      tasks_(std::move(tasks)),
      runs_(runs),
      values_(std::move(values_row_major)),
      normalised_(normalised) {
    if (algorithm_.empty()) throw InvariantViolation("EvalMatrix", "algorithm must be non-empty");
    if (metric_.empty()) throw InvariantViolation("EvalMatrix", "metric must be non-empty");
    if (tasks_.empty()) throw InvariantViolation("EvalMatrix", "task list must be non-empty");
    if (runs_ == 0) throw InvariantViolation("EvalMatrix", "run count must be positive");
    for (std::size_t i = 1; i < tasks_.size(); ++i) {
        if (!(tasks_[i - 1] < tasks_[i])) {
            throw InvariantViolation("EvalMatrix", "task list must be strictly ascending");
        }
    }
    if (values_.size() != runs_ * tasks_.size()) {
        throw InvariantViolation(
            "EvalMatrix", "value count " + std::to_string(values_.size()) +
                              " does not equal runs x tasks = " +
                              std::to_string(runs_ * tasks_.size()));
    }
    const double slack = 1e-9;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        requireFinite(values_[i], "EvalMatrix.values[" + std::to_string(i) + "]");
        if (normalised_ && (values_[i] < -slack || values_[i] > 1.0 + slack)) {
            throw InvariantViolation(
                "EvalMatrix.values[" + std::to_string(i) + "]",
                "normalised entry " + std::to_string(values_[i]) + " lies outside [0, 1]");
        }
    }
}

std::vector<double> EvalMatrix::column(std::size_t task) const {
    std::vector<double> col;
    col.reserve(runs_);
    for (std::size_t r = 0; r < runs_; ++r) col.push_back(at(r, task));
    return col;
}

}  // namespace marleval
