#include "marleval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "marleval/quantiles.hpp"

namespace marleval {

namespace {

double mean(const std::vector<double>& values) {
    return std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
}

double clampUnit(double value, const std::string& path, WarningLog* warnings) {
    if (value < 0.0 || value > 1.0) {
        if (warnings != nullptr) {
            warnings->add(path, "value " + std::to_string(value) +
                                    " clamped into [0, 1]");
        }
        return std::clamp(value, 0.0, 1.0);
    }
    return value;
}

}  // namespace

std::string toString(Pooling pooling) {
    switch (pooling) {
        case Pooling::AbsoluteOnly: return "absolute_only";
        case Pooling::IntervalsOnly: return "intervals_only";
        case Pooling::Global: return "global";
    }
    return "unknown";
}

Pooling poolingFromString(const std::string& text) {
    if (text == "absolute_only") return Pooling::AbsoluteOnly;
    if (text == "intervals_only") return Pooling::IntervalsOnly;
    if (text == "global") return Pooling::Global;
    throw SchemaViolation("pooling", "unknown pooling mode '" + text +
                                         "' (expected absolute_only, intervals_only "
                                         "or global)");
}

std::string toString(SeriesStatistic statistic) {
    switch (statistic) {
        case SeriesStatistic::Mean: return "mean";
        case SeriesStatistic::Iqm: return "iqm";
    }
    return "unknown";
}

TaskBounds::TaskBounds(std::string env, std::string task, std::string metric,
                       double min, double max, Pooling pooling,
                       std::size_t sample_count)
    : env_(std::move(env)),
      task_(std::move(task)),
      metric_(std::move(metric)),
      min_(min),
      max_(max),
      pooling_(pooling),
      sample_count_(sample_count) {
    if (!std::isfinite(min_) || !std::isfinite(max_)) {
        throw InvariantViolation("TaskBounds", "bounds must be finite");
    }
    if (min_ > max_) {
        throw InvariantViolation("TaskBounds", "min exceeds max");
    }
    if (sample_count_ == 0) {
        throw InvariantViolation("TaskBounds", "sample count must be positive");
    }
}

MetricSeries::MetricSeries(std::string algorithm, std::string env, std::string task,
                           std::string metric, SeriesStatistic statistic,
                           std::vector<SeriesPoint> points)
    : algorithm_(std::move(algorithm)),
      env_(std::move(env)),
      task_(std::move(task)),
      metric_(std::move(metric)),
      statistic_(statistic),
      points_(std::move(points)) {
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const std::string path = "MetricSeries.points[" + std::to_string(i) + "]";
        if (i > 0 && points_[i].step <= points_[i - 1].step) {
            throw InvariantViolation(path, "steps must be strictly increasing");
        }
        const SeriesPoint& pt = points_[i];
        if (pt.ci.method() == CiMethod::Normal &&
            (pt.estimate < pt.ci.lower() || pt.estimate > pt.ci.upper())) {
            throw InvariantViolation(path,
                                     "a normal CI must bracket its point estimate");
        }
    }
}

double runIntervalMean(const IntervalRecord& interval, const std::string& metric) {
    return mean(interval.episodes(metric));
}

double absoluteReturn(const RunRecord& run, const std::string& metric) {
    if (!run.absolute().has_value()) {
        throw MissingAbsolute("RunRecord",
                              "the run has no absolute evaluation block");
    }
    return mean(run.absolute()->episodes(metric));
}

TaskBounds taskScoreBounds(const ExperimentLog& log, const std::string& env,
                           const std::string& task, const std::string& metric,
                           Pooling pooling) {
    const auto& algs = log.taskGroup(env, task);
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 0;
    auto include = [&](double v) {
        if (count == 0) {
            min = max = v;
        } else {
            min = std::min(min, v);
            max = std::max(max, v);
        }
        ++count;
    };
    for (const auto& [alg, runs] : algs) {
        (void)alg;
        for (const auto& [run_id, run] : runs) {
            (void)run_id;
            if (pooling != Pooling::AbsoluteOnly) {
                for (const auto& interval : run.intervals()) {
                    if (interval.has(metric)) include(runIntervalMean(interval, metric));
                }
            }
            if (pooling != Pooling::IntervalsOnly) {
                if (run.absolute().has_value() && run.absolute()->has(metric)) {
                    include(mean(run.absolute()->episodes(metric)));
                }
            }
        }
    }
    if (count == 0) {
        throw EmptyPool("$.environments." + env + "." + task,
                        "no samples of metric '" + metric + "' under pooling mode " +
                            toString(pooling));
    }
    return TaskBounds(env, task, metric, min, max, pooling, count);
}

double minMaxNormalise(double value, const TaskBounds& bounds, WarningLog* warnings) {
    const std::string path =
        "$.environments." + bounds.env() + "." + bounds.task() + "." + bounds.metric();
    if (bounds.max() == bounds.min()) {
        if (warnings != nullptr) {
            warnings->add(path, "degenerate bounds (min == max == " +
                                    std::to_string(bounds.min()) +
                                    "); normalised value fixed to 0");
        }
        return 0.0;
    }
    const double t = (value - bounds.min()) / (bounds.max() - bounds.min());
    return clampUnit(t, path, warnings);
}

EvalMatrix buildEvaluationMatrix(const ExperimentLog& log, const std::string& algorithm,
                                 const std::string& metric, Pooling pooling,
                                 const MetricDescriptor& descriptor,
                                 WarningLog* warnings) {
    if (descriptor.name() != metric) {
        throw InvariantViolation("buildEvaluationMatrix",
                                 "descriptor is for metric '" + descriptor.name() +
                                     "', not '" + metric + "'");
    }
    const std::vector<TaskId> tasks = log.tasksOf(algorithm);
    if (tasks.empty()) {
        throw UnknownAlgorithm("$.environments",
                               "algorithm '" + algorithm + "' appears on no task");
    }
    const std::size_t task_count = tasks.size();
    std::size_t runs = 0;
    for (std::size_t t = 0; t < task_count; ++t) {
        const auto& group = log.group(tasks[t].env, tasks[t].task, algorithm);
        if (t == 0) {
            runs = group.size();
        } else if (group.size() != runs) {
            throw RaggedRuns("$.environments." + tasks[t].env + "." + tasks[t].task +
                                 "." + algorithm,
                             "run count " + std::to_string(group.size()) +
                                 " differs from " + std::to_string(runs) +
                                 " on task '" + tasks[0].str() + "'");
        }
    }
    std::vector<double> values(runs * task_count, 0.0);
    for (std::size_t t = 0; t < task_count; ++t) {
        const auto& group = log.group(tasks[t].env, tasks[t].task, algorithm);
        std::optional<TaskBounds> bounds;
        if (!descriptor.unitInterval()) {
            bounds = taskScoreBounds(log, tasks[t].env, tasks[t].task, metric, pooling);
        }
        std::size_t r = 0;
        for (const auto& [run_id, run] : group) {
            const double score = absoluteReturn(run, metric);
            const double entry =
                descriptor.unitInterval()
                    ? clampUnit(score,
                                "$.environments." + tasks[t].env + "." + tasks[t].task +
                                    "." + algorithm + "." + run_id,
                                warnings)
                    : minMaxNormalise(score, *bounds, warnings);
            values[r * task_count + t] = entry;
            ++r;
        }
    }
    return EvalMatrix(algorithm, metric, tasks, runs, std::move(values), true);
}

MetricSeries perTaskIntervalSeries(const ExperimentLog& log, const std::string& algorithm,
                                   const std::string& env, const std::string& task,
                                   const std::string& metric, double ci_level,
                                   bool student_t) {
    if (!(ci_level > 0.0 && ci_level < 1.0)) {
        throw InvariantViolation("perTaskIntervalSeries",
                                 "ci_level must lie strictly in (0, 1)");
    }
    const auto& group = log.group(env, task, algorithm);
    const std::size_t run_count = group.size();
    const std::size_t interval_count = group.begin()->second.intervals().size();

    std::vector<SeriesPoint> points;
    points.reserve(interval_count);
    for (std::size_t i = 0; i < interval_count; ++i) {
        std::vector<double> run_means;
        run_means.reserve(run_count);
        for (const auto& [run_id, run] : group) {
            (void)run_id;
            run_means.push_back(runIntervalMean(run.intervals()[i], metric));
        }
        const double estimate = mean(run_means);
        SeriesPoint point;
        point.step = group.begin()->second.intervals()[i].stepCount();
        point.estimate = estimate;
        if (run_count < 2) {
            point.ci = ConfidenceInterval(estimate, estimate, ci_level,
                                          CiMethod::Degenerate);
        } else {
            double ss = 0.0;
            for (double v : run_means) ss += (v - estimate) * (v - estimate);
            const double sd = std::sqrt(ss / static_cast<double>(run_count - 1));
            const double q = 0.5 + ci_level / 2.0;
            const double z = student_t
                                 ? studentTQuantile(q, static_cast<double>(run_count - 1))
                                 : normalQuantile(q);
            const double half = z * sd / std::sqrt(static_cast<double>(run_count));
            point.ci = ConfidenceInterval(estimate - half, estimate + half, ci_level,
                                          CiMethod::Normal);
        }
        points.push_back(point);
    }
    return MetricSeries(algorithm, env, task, metric,
                        SeriesStatistic::Mean, std::move(points));
}

}  // namespace marleval
