#include "marleval/compare.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "marleval/quantiles.hpp"
#include "marleval/rng.hpp"

namespace marleval {

namespace {

// Mann-Whitney numerator #{x > y} + 0.5 * #{x == y} via midranks in the
// combined sample. Ranks are integers or halves, so the sum is exact; the
// brute-force pair enumeration (kept separately as a test oracle) produces
// bit-identical values.
double mannWhitneyNumerator(const std::vector<double>& x, const std::vector<double>& y) {
    struct Tagged {
        double value;
        bool from_x;
    };
    std::vector<Tagged> all;
    all.reserve(x.size() + y.size());
    for (double v : x) all.push_back({v, true});
    for (double v : y) all.push_back({v, false});
    std::stable_sort(all.begin(), all.end(),
                     [](const Tagged& a, const Tagged& b) { return a.value < b.value; });

    double rank_sum_x = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].value == all[i].value) ++j;
        // Midrank of a tie block spanning 1-based ranks (i+1) .. j.
        const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t k = i; k < j; ++k) {
            if (all[k].from_x) rank_sum_x += midrank;
        }
        i = j;
    }
    const double nx = static_cast<double>(x.size());
    return rank_sum_x - nx * (nx + 1.0) / 2.0;
}

// Mean of per-task win probabilities, accumulated in task order. The oracle
// repeats these exact operations, which is what makes the two routes agree
// bit-for-bit.
double improvementProbability(const std::vector<std::vector<double>>& x_columns,
                              const std::vector<std::vector<double>>& y_columns) {
    const double pairs = static_cast<double>(x_columns[0].size()) *
                         static_cast<double>(y_columns[0].size());
    double acc = 0.0;
    for (std::size_t t = 0; t < x_columns.size(); ++t) {
        acc += mannWhitneyNumerator(x_columns[t], y_columns[t]) / pairs;
    }
    return acc / static_cast<double>(x_columns.size());
}

std::vector<std::vector<double>> sortedColumns(const EvalMatrix& matrix) {
    std::vector<std::vector<double>> columns(matrix.taskCount());
    for (std::size_t t = 0; t < matrix.taskCount(); ++t) {
        columns[t] = matrix.column(t);
        std::sort(columns[t].begin(), columns[t].end());
    }
    return columns;
}

void resampleColumn(const std::vector<double>& sorted_column, rng::Stream& stream,
                    std::vector<double>& out) {
    const std::size_t n = sorted_column.size();
    out.resize(n);
    for (std::size_t r = 0; r < n; ++r) out[r] = sorted_column[stream.nextBelow(n)];
}

ConfidenceInterval percentileInterval(std::vector<double>& stats, double ci_level) {
    std::sort(stats.begin(), stats.end());
    const double alpha = (1.0 - ci_level) / 2.0;
    const double lower = percentileSorted(stats, alpha);
    const double upper = percentileSorted(stats, 1.0 - alpha);
    const CiMethod method =
        (lower == upper) ? CiMethod::Degenerate : CiMethod::StratifiedBootstrap;
    return ConfidenceInterval(lower, upper, ci_level, method);
}

}  // namespace

std::string toString(CurveKind kind) {
    switch (kind) {
        case CurveKind::PerformanceProfile: return "performance_profile";
        case CurveKind::SampleEfficiency: return "sample_efficiency";
        case CurveKind::IntervalSeries: return "interval_series";
    }
    return "unknown";
}

ProfileCurve::ProfileCurve(CurveKind kind, std::string label, std::vector<double> xs,
                           std::vector<CurvePoint> points)
    : kind_(kind), label_(std::move(label)), xs_(std::move(xs)), points_(std::move(points)) {
    if (label_.empty()) {
        throw InvariantViolation("ProfileCurve", "label must be non-empty");
    }
    if (xs_.size() != points_.size()) {
        throw InvariantViolation("ProfileCurve",
                                 "xs and points must have the same length");
    }
    for (std::size_t i = 0; i < xs_.size(); ++i) {
        if (!std::isfinite(xs_[i])) {
            throw InvariantViolation("ProfileCurve.xs[" + std::to_string(i) + "]",
                                     "x value is not finite");
        }
        if (i > 0 && xs_[i] <= xs_[i - 1]) {
            throw InvariantViolation("ProfileCurve.xs[" + std::to_string(i) + "]",
                                     "x values must be strictly increasing");
        }
    }
    if (kind_ == CurveKind::PerformanceProfile) {
        for (std::size_t i = 0; i < points_.size(); ++i) {
            const double e = points_[i].estimate;
            if (e < 0.0 || e > 1.0) {
                throw InvariantViolation(
                    "ProfileCurve.points[" + std::to_string(i) + "]",
                    "profile estimates must lie in [0, 1]");
            }
            if (i > 0 && e > points_[i - 1].estimate) {
                throw InvariantViolation(
                    "ProfileCurve.points[" + std::to_string(i) + "]",
                    "profile estimates must be non-increasing");
            }
        }
    }
}

ImprovementScore probabilityOfImprovement(const EvalMatrix& candidate,
                                          const EvalMatrix& baseline, int replicates,
                                          double ci_level, std::uint64_t seed) {
    if (replicates < 1) {
        throw InvariantViolation("probabilityOfImprovement",
                                 "replicate count must be positive");
    }
    if (!(ci_level > 0.0 && ci_level < 1.0)) {
        throw InvariantViolation("probabilityOfImprovement",
                                 "ci_level must lie strictly in (0, 1)");
    }
    if (candidate.tasks() != baseline.tasks()) {
        throw TaskListMismatch("probabilityOfImprovement",
                               "candidate and baseline cover different task lists");
    }
    const std::size_t task_count = candidate.taskCount();

    std::vector<std::vector<double>> x_columns(task_count);
    std::vector<std::vector<double>> y_columns(task_count);
    for (std::size_t t = 0; t < task_count; ++t) {
        x_columns[t] = candidate.column(t);
        y_columns[t] = baseline.column(t);
    }
    const double point = improvementProbability(x_columns, y_columns);

    const auto x_sorted = sortedColumns(candidate);
    const auto y_sorted = sortedColumns(baseline);
    const std::string x_label = "poi.x." + candidate.algorithm() + "|" + baseline.algorithm();
    const std::string y_label = "poi.y." + candidate.algorithm() + "|" + baseline.algorithm();

    std::vector<std::vector<double>> x_draw(task_count);
    std::vector<std::vector<double>> y_draw(task_count);
    std::vector<double> stats(static_cast<std::size_t>(replicates), 0.0);
    for (int k = 0; k < replicates; ++k) {
        for (std::size_t t = 0; t < task_count; ++t) {
            rng::Stream xs(rng::deriveKey(seed, x_label, t, static_cast<std::uint64_t>(k)));
            rng::Stream ys(rng::deriveKey(seed, y_label, t, static_cast<std::uint64_t>(k)));
            resampleColumn(x_sorted[t], xs, x_draw[t]);
            resampleColumn(y_sorted[t], ys, y_draw[t]);
        }
        stats[static_cast<std::size_t>(k)] = improvementProbability(x_draw, y_draw);
    }
    ImprovementScore score;
    score.candidate = candidate.algorithm();
    score.baseline = baseline.algorithm();
    score.probability = point;
    score.ci = percentileInterval(stats, ci_level);
    return score;
}

std::vector<double> defaultTauGrid(std::size_t points) {
    if (points < 2) {
        throw InvariantViolation("defaultTauGrid", "at least two points required");
    }
    std::vector<double> taus(points);
    for (std::size_t i = 0; i < points; ++i) {
        taus[i] = static_cast<double>(i) / static_cast<double>(points - 1);
    }
    return taus;
}

ProfileCurve performanceProfile(const EvalMatrix& matrix, const std::vector<double>& taus,
                                int replicates, double ci_level, std::uint64_t seed) {
    if (taus.empty()) {
        throw EmptyInput("performanceProfile: tau grid is empty");
    }
    if (replicates < 1) {
        throw InvariantViolation("performanceProfile",
                                 "replicate count must be positive");
    }
    const double total = static_cast<double>(matrix.values().size());

    // count of entries strictly greater than tau, on an ascending copy.
    auto fractionAbove = [&](const std::vector<double>& sorted_pool, double tau) {
        const auto it = std::upper_bound(sorted_pool.begin(), sorted_pool.end(), tau);
        return static_cast<double>(sorted_pool.end() - it) / total;
    };

    std::vector<double> pool = matrix.values();
    std::sort(pool.begin(), pool.end());
    std::vector<double> estimates(taus.size());
    for (std::size_t j = 0; j < taus.size(); ++j) estimates[j] = fractionAbove(pool, taus[j]);

    const auto columns = sortedColumns(matrix);
    const std::size_t runs = matrix.runs();
    const std::size_t task_count = matrix.taskCount();

    // replicate-major table of profile values; percentiles are taken per tau.
    std::vector<std::vector<double>> table(taus.size(),
                                           std::vector<double>(replicates, 0.0));
    std::vector<double> resampled(runs * task_count, 0.0);
    for (int k = 0; k < replicates; ++k) {
        for (std::size_t t = 0; t < task_count; ++t) {
            rng::Stream stream(rng::deriveKey(seed, matrix.algorithm(), t,
                                              static_cast<std::uint64_t>(k)));
            for (std::size_t r = 0; r < runs; ++r) {
                resampled[r * task_count + t] = columns[t][stream.nextBelow(runs)];
            }
        }
        std::sort(resampled.begin(), resampled.end());
        for (std::size_t j = 0; j < taus.size(); ++j) {
            table[j][static_cast<std::size_t>(k)] = fractionAbove(resampled, taus[j]);
        }
    }

    std::vector<CurvePoint> points(taus.size());
    for (std::size_t j = 0; j < taus.size(); ++j) {
        points[j].estimate = estimates[j];
        points[j].ci = percentileInterval(table[j], ci_level);
    }
    return ProfileCurve(CurveKind::PerformanceProfile, matrix.algorithm(),
                        taus, std::move(points));
}

ProfileCurve sampleEfficiencyCurve(const ExperimentLog& log, const std::string& algorithm,
                                   const std::string& metric, Statistic statistic,
                                   Pooling pooling, const ProtocolConfig& config,
                                   StepAlignment alignment, WarningLog* warnings) {
    config.validate();
    if (statistic != Statistic::Iqm && statistic != Statistic::Mean) {
        throw InvariantViolation("sampleEfficiencyCurve",
                                 "statistic must be iqm or mean");
    }
    const std::vector<TaskId> tasks = log.tasksOf(algorithm);
    if (tasks.empty()) {
        throw UnknownAlgorithm("$.environments",
                               "algorithm '" + algorithm + "' appears on no task");
    }

    std::vector<std::vector<std::int64_t>> grids;
    grids.reserve(tasks.size());
    for (const TaskId& id : tasks) {
        grids.push_back(log.stepGrid(id.env, id.task, algorithm));
    }
    std::vector<std::int64_t> steps;
    if (alignment == StepAlignment::Strict) {
        for (std::size_t t = 1; t < tasks.size(); ++t) {
            if (grids[t] != grids[0]) {
                throw StepGridMismatch(
                    "$.environments",
                    "tasks '" + tasks[0].str() + "' and '" + tasks[t].str() +
                        "' of algorithm '" + algorithm +
                        "' have different step grids; re-run with intersect "
                        "alignment to use the common steps");
            }
        }
        steps = grids[0];
    } else {
        std::set<std::int64_t> common(grids[0].begin(), grids[0].end());
        for (std::size_t t = 1; t < grids.size(); ++t) {
            std::set<std::int64_t> next;
            for (std::int64_t s : grids[t]) {
                if (common.count(s) != 0) next.insert(s);
            }
            common.swap(next);
        }
        steps.assign(common.begin(), common.end());
        if (steps.empty()) {
            throw StepGridMismatch("$.environments",
                                   "tasks of algorithm '" + algorithm +
                                       "' share no common evaluation step");
        }
        for (std::size_t t = 0; t < grids.size(); ++t) {
            if (grids[t].size() != steps.size() && warnings != nullptr) {
                warnings->add("$.environments." + tasks[t].str(),
                              "dropped " + std::to_string(grids[t].size() - steps.size()) +
                                  " evaluation steps not shared by every task");
            }
        }
    }

    const MetricDescriptor* declared = log.findDescriptor(metric);
    const MetricDescriptor descriptor =
        (declared != nullptr) ? *declared : MetricDescriptor(metric);

    // Bounds are computed once per task from the whole log so every point of
    // the curve lives in the same normalised frame as the absolute matrix.
    std::vector<std::optional<TaskBounds>> bounds(tasks.size());
    if (!descriptor.unitInterval()) {
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            bounds[t] = taskScoreBounds(log, tasks[t].env, tasks[t].task, metric, pooling);
        }
    }

    std::size_t runs = 0;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        const auto& group = log.group(tasks[t].env, tasks[t].task, algorithm);
        if (t == 0) {
            runs = group.size();
        } else if (group.size() != runs) {
            throw RaggedRuns("$.environments." + tasks[t].str() + "." + algorithm,
                             "run count " + std::to_string(group.size()) +
                                 " differs from " + std::to_string(runs) + " on task '" +
                                 tasks[0].str() + "'");
        }
    }

    // step -> interval index per task (grids may differ under intersect).
    std::vector<std::map<std::int64_t, std::size_t>> index_of(tasks.size());
    for (std::size_t t = 0; t < grids.size(); ++t) {
        for (std::size_t i = 0; i < grids[t].size(); ++i) index_of[t][grids[t][i]] = i;
    }

    std::vector<double> xs;
    xs.reserve(steps.size());
    std::vector<CurvePoint> points;
    points.reserve(steps.size());
    std::vector<double> values(runs * tasks.size(), 0.0);
    for (std::int64_t step : steps) {
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            const auto& group = log.group(tasks[t].env, tasks[t].task, algorithm);
            const std::size_t interval_index = index_of[t].at(step);
            std::size_t r = 0;
            for (const auto& [run_id, run] : group) {
                const double score =
                    runIntervalMean(run.intervals()[interval_index], metric);
                double entry;
                if (descriptor.unitInterval()) {
                    entry = std::clamp(score, 0.0, 1.0);
                    if ((score < 0.0 || score > 1.0) && warnings != nullptr) {
                        warnings->add("$.environments." + tasks[t].str() + "." +
                                          algorithm + "." + run_id,
                                      "value " + std::to_string(score) +
                                          " clamped into [0, 1]");
                    }
                } else {
                    entry = minMaxNormalise(score, *bounds[t], warnings);
                }
                values[r * tasks.size() + t] = entry;
                ++r;
            }
        }
        EvalMatrix at_step(algorithm, metric, tasks, runs, values, true);
        const PointEstimate estimate =
            stratifiedBootstrapCi(at_step, statistic, config.bootstrap_replicates,
                                  config.ci_level, config.seed, config.gamma);
        xs.push_back(static_cast<double>(step));
        points.push_back(CurvePoint{estimate.point, estimate.ci});
    }
    return ProfileCurve(CurveKind::SampleEfficiency, algorithm, std::move(xs),
                        std::move(points));
}

std::string improvementScoreToJson(const ImprovementScore& score) {
    nlohmann::json doc;
    doc["candidate"] = score.candidate;
    doc["baseline"] = score.baseline;
    doc["probability"] = score.probability;
    doc["ci"] = {{"lower", score.ci.lower()},
                 {"upper", score.ci.upper()},
                 {"level", score.ci.level()},
                 {"method", toString(score.ci.method())}};
    return doc.dump(2) + "\n";
}

}  // namespace marleval
