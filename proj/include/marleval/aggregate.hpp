#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "marleval/model.hpp"

namespace marleval {

// Pooled statistics computed over every entry of an evaluation matrix.
enum class Statistic { Iqm, Mean, Median, OptimalityGap };

std::string toString(Statistic statistic);
Statistic statisticFromString(const std::string& text);  // throws SchemaViolation

// Interquartile mean: drop the lowest and highest floor(n/4) values, average
// the rest. Arrays shorter than 4 are averaged whole.
double iqm(std::span<const double> values);

// gamma - mean(min(value, gamma)): how far the scores fall short of the
// target gamma, with scores above gamma clipped so exceeding the target
// cannot mask shortfalls elsewhere. Always >= 0; lower is better.
double optimalityGap(std::span<const double> values, double gamma);

double median(std::span<const double> values);

// Applies `statistic` to every entry of the matrix pooled together.
double pooledStatistic(const EvalMatrix& matrix, Statistic statistic,
                       double gamma = 1.0);

struct PointEstimate {
    double point = 0.0;
    ConfidenceInterval ci;
    bool operator==(const PointEstimate&) const = default;
};

// Stratified bootstrap CI of a pooled statistic: every replicate resamples
// runs with replacement independently within each task column (strata are
// never mixed), recomputes the pooled statistic, and the interval is the
// percentile range [(1-level)/2, 1-(1-level)/2] of the replicate
// distribution. Draws are keyed by (seed, algorithm label, task index,
// replicate index), and columns are sorted before resampling, so the result
// is invariant to run order and bit-reproducible for a given seed.
PointEstimate stratifiedBootstrapCi(const EvalMatrix& matrix, Statistic statistic,
                                    int replicates, double ci_level,
                                    std::uint64_t seed, double gamma = 1.0);

struct BootstrapInfo {
    int replicates = 2000;
    std::uint64_t seed = 42;
    double ci_level = 0.95;
    bool operator==(const BootstrapInfo&) const = default;
};

// Aggregate scores of several algorithms over one shared task list.
// entries: algorithm -> statistic name -> estimate.
struct AggregateReport {
    std::string metric;
    double gamma = 1.0;
    BootstrapInfo bootstrap;
    std::map<std::string, std::map<std::string, PointEstimate>> entries;
    bool operator==(const AggregateReport&) const = default;
};

// Computes every requested statistic with bootstrap CIs for every algorithm.
// All matrices must share one task list and metric (TaskListMismatch
// otherwise); bootstrap parameters come from `config`.
AggregateReport aggregateScores(const std::map<std::string, EvalMatrix>& matrices,
                                const std::vector<Statistic>& statistics,
                                const ProtocolConfig& config);

std::string aggregateReportToJson(const AggregateReport& report);
AggregateReport aggregateReportFromJson(const std::string& text);

}  // namespace marleval
