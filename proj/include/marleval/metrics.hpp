#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "marleval/model.hpp"

namespace marleval {

// Which samples feed a task's min/max normalisation bounds.
enum class Pooling { AbsoluteOnly, IntervalsOnly, Global };

std::string toString(Pooling pooling);
Pooling poolingFromString(const std::string& text);  // throws SchemaViolation

// Min/max score bounds of one (environment, task, metric) triple, pooled
// across every algorithm and run on that task so all algorithms share the
// same normalisation frame.
class TaskBounds {
public:
    TaskBounds(std::string env, std::string task, std::string metric, double min,
               double max, Pooling pooling, std::size_t sample_count);

    const std::string& env() const noexcept { return env_; }
    const std::string& task() const noexcept { return task_; }
    const std::string& metric() const noexcept { return metric_; }
    double min() const noexcept { return min_; }
    double max() const noexcept { return max_; }
    Pooling pooling() const noexcept { return pooling_; }
    std::size_t sampleCount() const noexcept { return sample_count_; }

    bool operator==(const TaskBounds&) const = default;

private:
    std::string env_;
    std::string task_;
    std::string metric_;
    double min_ = 0.0;
    double max_ = 0.0;
    Pooling pooling_ = Pooling::Global;
    std::size_t sample_count_ = 0;
};

enum class SeriesStatistic { Mean, Iqm };

std::string toString(SeriesStatistic statistic);

struct SeriesPoint {
    std::int64_t step = 0;
    double estimate = 0.0;
    ConfidenceInterval ci;
    bool operator==(const SeriesPoint&) const = default;
};

// Per-interval summary of one (algorithm, task, metric): one estimate plus a
// CI per evaluation step, steps strictly increasing.
class MetricSeries {
public:
    MetricSeries(std::string algorithm, std::string env, std::string task,
                 std::string metric, SeriesStatistic statistic,
                 std::vector<SeriesPoint> points);

    const std::string& algorithm() const noexcept { return algorithm_; }
    const std::string& env() const noexcept { return env_; }
    const std::string& task() const noexcept { return task_; }
    const std::string& metric() const noexcept { return metric_; }
    SeriesStatistic statistic() const noexcept { return statistic_; }
    const std::vector<SeriesPoint>& points() const noexcept { return points_; }

    bool operator==(const MetricSeries&) const = default;

private:
    std::string algorithm_;
    std::string env_;
    std::string task_;
    std::string metric_;
    SeriesStatistic statistic_ = SeriesStatistic::Mean;
    std::vector<SeriesPoint> points_;
};

// Mean of the episode values of `metric` at one evaluation interval.
// Throws UnknownMetric when the interval does not carry it.
double runIntervalMean(const IntervalRecord& interval, const std::string& metric);

// Mean of the episode values of `metric` in the run's absolute block.
// Throws MissingAbsolute / UnknownMetric.
double absoluteReturn(const RunRecord& run, const std::string& metric);

// Pools scores of every algorithm and run on (env, task) according to
// `pooling` and returns their min/max. Throws UnknownTask / EmptyPool.
TaskBounds taskScoreBounds(const ExperimentLog& log, const std::string& env,
                           const std::string& task, const std::string& metric,
                           Pooling pooling);

// (value - min) / (max - min), clamped into [0, 1]. A clamp records a warning;
// degenerate bounds (max == min) yield 0.0 with a warning.
double minMaxNormalise(double value, const TaskBounds& bounds,
                       WarningLog* warnings = nullptr);

// Builds the runs x tasks matrix of normalised absolute scores for one
// algorithm: every task the algorithm appears on (sorted), rows filled from
// runs in run-id order. Metrics declared unit-interval skip min/max
// normalisation and are clamped into [0, 1] directly.
EvalMatrix buildEvaluationMatrix(const ExperimentLog& log, const std::string& algorithm,
                                 const std::string& metric, Pooling pooling,
                                 const MetricDescriptor& descriptor,
                                 WarningLog* warnings = nullptr);

// Mean across runs per evaluation interval with a two-sided CI at `ci_level`
// (normal by default, Student-t with runs-1 degrees of freedom when
// `student_t` is set; a single run yields degenerate intervals).
MetricSeries perTaskIntervalSeries(const ExperimentLog& log, const std::string& algorithm,
                                   const std::string& env, const std::string& task,
                                   const std::string& metric, double ci_level,
                                   bool student_t = false);

}  // namespace marleval
