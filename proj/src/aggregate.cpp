#include "marleval/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "marleval/quantiles.hpp"
#include "marleval/rng.hpp"

namespace marleval {

namespace {

double meanOf(std::span<const double> values) {
    return std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
}

double applyStatistic(std::span<const double> values, Statistic statistic, double gamma) {
    switch (statistic) {
        case Statistic::Iqm: return iqm(values);
        case Statistic::Mean: return meanOf(values);
        case Statistic::Median: return median(values);
        case Statistic::OptimalityGap: return optimalityGap(values, gamma);
    }
    throw InvariantViolation("applyStatistic", "unhandled statistic");
}

}  // namespace

std::string toString(Statistic statistic) {
    switch (statistic) {
        case Statistic::Iqm: return "iqm";
        case Statistic::Mean: return "mean";
        case Statistic::Median: return "median";
        case Statistic::OptimalityGap: return "optimality_gap";
    }
    return "unknown";
}

Statistic statisticFromString(const std::string& text) {
    if (text == "iqm") return Statistic::Iqm;
    if (text == "mean") return Statistic::Mean;
    if (text == "median") return Statistic::Median;
    if (text == "optimality_gap") return Statistic::OptimalityGap;
    throw SchemaViolation("statistic", "unknown statistic '" + text +
                                           "' (expected iqm, mean, median or "
                                           "optimality_gap)");
}

double iqm(std::span<const double> values) {
    if (values.empty()) {
        throw EmptyInput("iqm: input is empty");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const std::size_t k = n / 4;
    double sum = 0.0;
    for (std::size_t i = k; i < n - k; ++i) sum += sorted[i];
    return sum / static_cast<double>(n - 2 * k);
}

double optimalityGap(std::span<const double> values, double gamma) {
    if (values.empty()) {
        throw EmptyInput("optimalityGap: input is empty");
    }
    if (!std::isfinite(gamma)) {
        throw InvariantViolation("optimalityGap", "gamma must be finite");
    }
    double sum = 0.0;
    for (double v : values) sum += std::min(v, gamma);
    const double gap = gamma - sum / static_cast<double>(values.size());
    return std::max(0.0, gap);  // clip fp noise; the gap is >= 0 by definition
}

double median(std::span<const double> values) {
    if (values.empty()) {
        throw EmptyInput("median: input is empty");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    if (n % 2 == 1) return sorted[n / 2];
    return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

double pooledStatistic(const EvalMatrix& matrix, Statistic statistic, double gamma) {
    return applyStatistic(matrix.values(), statistic, gamma);
}

PointEstimate stratifiedBootstrapCi(const EvalMatrix& matrix, Statistic statistic,
                                    int replicates, double ci_level,
                                    std::uint64_t seed, double gamma) {
    if (replicates < 1) {
        throw InvariantViolation("stratifiedBootstrapCi",
                                 "replicate count must be positive");
    }
    if (!(ci_level > 0.0 && ci_level < 1.0)) {
        throw InvariantViolation("stratifiedBootstrapCi",
                                 "ci_level must lie strictly in (0, 1)");
    }
    const double point = pooledStatistic(matrix, statistic, gamma);

    const std::size_t runs = matrix.runs();
    const std::size_t task_count = matrix.taskCount();

    // Canonical within-column sort makes replicate draws independent of the
    // run order callers happened to use.
    std::vector<std::vector<double>> columns(task_count);
    for (std::size_t t = 0; t < task_count; ++t) {
        columns[t] = matrix.column(t);
        std::sort(columns[t].begin(), columns[t].end());
    }

    std::vector<double> pooled(runs * task_count, 0.0);
    std::vector<double> stats(static_cast<std::size_t>(replicates), 0.0);
    for (int k = 0; k < replicates; ++k) {
        for (std::size_t t = 0; t < task_count; ++t) {
            rng::Stream stream(rng::deriveKey(seed, matrix.algorithm(), t,
                                              static_cast<std::uint64_t>(k)));
            const std::vector<double>& column = columns[t];
            for (std::size_t r = 0; r < runs; ++r) {
                pooled[r * task_count + t] = column[stream.nextBelow(runs)];
            }
        }
        stats[static_cast<std::size_t>(k)] = applyStatistic(pooled, statistic, gamma);
    }
    // Reduction by sorted percentiles: the interval depends only on the set
    // of replicate statistics, never on the order they were produced in.
    std::sort(stats.begin(), stats.end());
    const double alpha = (1.0 - ci_level) / 2.0;
    const double lower = percentileSorted(stats, alpha);
    const double upper = percentileSorted(stats, 1.0 - alpha);
    const CiMethod method =
        (lower == upper) ? CiMethod::Degenerate : CiMethod::StratifiedBootstrap;
    return PointEstimate{point, ConfidenceInterval(lower, upper, ci_level, method)};
}

AggregateReport aggregateScores(const std::map<std::string, EvalMatrix>& matrices,
                                const std::vector<Statistic>& statistics,
                                const ProtocolConfig& config) {
    config.validate();
    if (matrices.empty()) {
        throw EmptyInput("aggregateScores: no matrices given");
    }
    if (statistics.empty()) {
        throw EmptyInput("aggregateScores: no statistics requested");
    }
    const EvalMatrix& reference = matrices.begin()->second;
    for (const auto& [alg, matrix] : matrices) {
        if (matrix.algorithm() != alg) {
            throw InvariantViolation("aggregateScores",
                                     "map key '" + alg + "' does not match matrix "
                                                         "algorithm '" +
                                         matrix.algorithm() + "'");
        }
        if (matrix.metric() != reference.metric()) {
            throw TaskListMismatch("aggregateScores",
                                   "matrix of '" + alg + "' is for metric '" +
                                       matrix.metric() + "', expected '" +
                                       reference.metric() + "'");
        }
        if (matrix.tasks() != reference.tasks()) {
            throw TaskListMismatch("aggregateScores",
                                   "matrix of '" + alg +
                                       "' covers a different task list than '" +
                                       matrices.begin()->first + "'");
        }
    }

    AggregateReport report;
    report.metric = reference.metric();
    report.gamma = config.gamma;
    report.bootstrap =
        BootstrapInfo{config.bootstrap_replicates, config.seed, config.ci_level};
    for (const auto& [alg, matrix] : matrices) {
        std::map<std::string, PointEstimate> row;
        for (Statistic statistic : statistics) {
            row[toString(statistic)] =
                stratifiedBootstrapCi(matrix, statistic, config.bootstrap_replicates,
                                      config.ci_level, config.seed, config.gamma);
        }
        report.entries[alg] = std::move(row);
    }
    return report;
}

std::string aggregateReportToJson(const AggregateReport& report) {
    nlohmann::json doc;
    doc["metric"] = report.metric;
    doc["gamma"] = report.gamma;
    doc["bootstrap"] = {{"replicates", report.bootstrap.replicates},
                        {"seed", report.bootstrap.seed},
                        {"ci_level", report.bootstrap.ci_level}};
    nlohmann::json entries = nlohmann::json::object();
    for (const auto& [alg, row] : report.entries) {
        nlohmann::json cells = nlohmann::json::object();
        for (const auto& [name, estimate] : row) {
            cells[name] = {{"point", estimate.point},
                           {"lower", estimate.ci.lower()},
                           {"upper", estimate.ci.upper()}};
        }
        entries[alg] = std::move(cells);
    }
    doc["entries"] = std::move(entries);
    return doc.dump(2) + "\n";
}

AggregateReport aggregateReportFromJson(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedJson("$", e.what());
    }
    if (!doc.is_object()) {
        throw SchemaViolation("$", "aggregate report must be a JSON object");
    }
    AggregateReport report;
    try {
        report.metric = doc.at("metric").get<std::string>();
        report.gamma = doc.at("gamma").get<double>();
        const auto& bootstrap = doc.at("bootstrap");
        report.bootstrap.replicates = bootstrap.at("replicates").get<int>();
        report.bootstrap.seed = bootstrap.at("seed").get<std::uint64_t>();
        report.bootstrap.ci_level = bootstrap.at("ci_level").get<double>();
        for (const auto& [alg, cells] : doc.at("entries").items()) {
            for (const auto& [name, cell] : cells.items()) {
                const double point = cell.at("point").get<double>();
                const double lower = cell.at("lower").get<double>();
                const double upper = cell.at("upper").get<double>();
                const CiMethod method = (lower == upper) ? CiMethod::Degenerate
                                                         : CiMethod::StratifiedBootstrap;
                report.entries[alg][name] = PointEstimate{
                    point,
                    ConfidenceInterval(lower, upper, report.bootstrap.ci_level, method)};
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaViolation("$", std::string("aggregate report: ") + e.what());
    }
    return report;
}

}  // namespace marleval
