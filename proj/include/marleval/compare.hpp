#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "marleval/aggregate.hpp"
#include "marleval/metrics.hpp"
#include "marleval/model.hpp"

namespace marleval {

enum class CurveKind { PerformanceProfile, SampleEfficiency, IntervalSeries };

std::string toString(CurveKind kind);

struct CurvePoint {
    double estimate = 0.0;
    ConfidenceInterval ci;
    bool operator==(const CurvePoint&) const = default;
};

// A labelled curve with one point (estimate + CI) per x value. For
// performance profiles the estimates are additionally guaranteed to be
// non-increasing fractions in [0, 1].
class ProfileCurve {
public:
    ProfileCurve(CurveKind kind, std::string label, std::vector<double> xs,
                 std::vector<CurvePoint> points);

    CurveKind kind() const noexcept { return kind_; }
    const std::string& label() const noexcept { return label_; }
    const std::vector<double>& xs() const noexcept { return xs_; }
    const std::vector<CurvePoint>& points() const noexcept { return points_; }

    bool operator==(const ProfileCurve&) const = default;

private:
    CurveKind kind_ = CurveKind::PerformanceProfile;
    std::string label_;
    std::vector<double> xs_;
    std::vector<CurvePoint> points_;
};

struct ImprovementScore {
    std::string candidate;
    std::string baseline;
    double probability = 0.5;
    ConfidenceInterval ci;
    bool operator==(const ImprovementScore&) const = default;
};

// P(candidate > baseline): per task, the Mann-Whitney probability that a
// random candidate run beats a random baseline run (ties count half),
// averaged unweighted across tasks so every task counts equally. The CI is a
// stratified bootstrap over runs of both matrices. Matrices must share their
// task list; run counts may differ between the two.
ImprovementScore probabilityOfImprovement(const EvalMatrix& candidate,
                                          const EvalMatrix& baseline, int replicates,
                                          double ci_level, std::uint64_t seed);

// Fraction of all runs x tasks entries strictly above tau, per tau, with
// pointwise stratified-bootstrap CIs. `taus` must be strictly increasing.
ProfileCurve performanceProfile(const EvalMatrix& matrix, const std::vector<double>& taus,
                                int replicates, double ci_level, std::uint64_t seed);

// Evenly spaced thresholds over [0, 1] (101 points by default).
std::vector<double> defaultTauGrid(std::size_t points = 101);

enum class StepAlignment {
    Strict,     // all tasks must share one step grid
    Intersect,  // use the steps common to every task, warn about the rest
};

// Normalised score over training time: at every shared evaluation step,
// builds the runs x tasks matrix of per-run interval means (normalised with
// the same per-task bounds as the absolute matrix) and reduces it with
// `statistic` (iqm or mean) plus a stratified-bootstrap CI.
ProfileCurve sampleEfficiencyCurve(const ExperimentLog& log, const std::string& algorithm,
                                   const std::string& metric, Statistic statistic,
                                   Pooling pooling, const ProtocolConfig& config,
                                   StepAlignment alignment = StepAlignment::Strict,
                                   WarningLog* warnings = nullptr);

std::string improvementScoreToJson(const ImprovementScore& score);

}  // namespace marleval
