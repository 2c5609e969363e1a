#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "marleval/errors.hpp"
#include "marleval/model.hpp"

namespace marleval {

// Shape of the mean learning curve a synthetic algorithm follows over
// training; the curve always reaches the model mean at the final step.
enum class CurveShape { Linear, Saturating };

std::string toString(CurveShape shape);
CurveShape curveShapeFromString(const std::string& text);  // throws InvalidSpec

// Gaussian episode-return model of one algorithm on one task.
struct TaskModel {
    double mean = 1.0;
    double stddev = 0.1;
    CurveShape curve = CurveShape::Saturating;

    bool operator==(const TaskModel&) const = default;
};

struct SynthEnvironment {
    std::string name;
    std::vector<std::string> tasks;

    bool operator==(const SynthEnvironment&) const = default;
};

struct SynthAlgorithm {
    std::string name;
    TaskModel model;
    // Per-task overrides keyed by "environment/task".
    std::map<std::string, TaskModel> task_models;

    const TaskModel& modelFor(const std::string& env, const std::string& task) const;

    bool operator==(const SynthAlgorithm&) const = default;
};

// Declarative description of a synthetic experiment. The generator draws
// every episode return from a keyed counter-based stream, so the same spec
// always produces the same log, everywhere.
struct SynthSpec {
    std::vector<SynthEnvironment> environments;
    std::vector<SynthAlgorithm> algorithms;
    int runs = 10;
    int intervals = 200;
    std::int64_t eval_interval = 10'000;
    int eval_episodes = 32;
    int absolute_episodes = 320;
    std::uint64_t seed = 42;

    void validate() const;  // throws InvalidSpec

    // Two algorithms (a saturating learner and a weaker linear one) on three
    // tasks across two environments, sized so the generated log satisfies the
    // recommended protocol for off-policy algorithms.
    static SynthSpec protocolDefaults();

    bool operator==(const SynthSpec&) const = default;
};

SynthSpec parseSynthSpec(const std::string& text);
std::string serializeSynthSpec(const SynthSpec& spec);

ExperimentLog generateSyntheticLog(const SynthSpec& spec);

// ---------------------------------------------------------------------------
// Reference implementations
// ---------------------------------------------------------------------------
// Deliberately naive re-implementations of statistics the library computes
// by cleverer means elsewhere. Tests cross-check the optimised code against
// these; they are not part of the command-line surface.

// Interquartile mean by literal slicing of the sorted values and pairwise
// summation of the kept slice.
double oracleIqm(std::vector<double> values);

// Probability of improvement by the O(n^2) definition: compare every
// candidate run against every baseline run per task (ties count half),
// average the per-task probabilities across tasks.
double oracleProbabilityOfImprovement(const EvalMatrix& candidate,
                                      const EvalMatrix& baseline);

}  // namespace marleval
