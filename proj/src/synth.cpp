#include "marleval/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <span>

#include <json.hpp>

#include "marleval/rng.hpp"

namespace marleval {

namespace {

using nlohmann::json;

void requireFiniteModel(const TaskModel& model, const std::string& where) {
    if (!std::isfinite(model.mean)) {
        throw InvalidSpec(where, "mean must be finite");
    }
    if (!std::isfinite(model.stddev) || model.stddev < 0.0) {
        throw InvalidSpec(where, "stddev must be finite and non-negative");
    }
}

// Mean return after a fraction `progress` of training, scaled so the curve
// reaches `model.mean` exactly at progress 1.
double shapedMean(const TaskModel& model, double progress) {
    switch (model.curve) {
        case CurveShape::Linear:
            return model.mean * progress;
        case CurveShape::Saturating:
            return model.mean * (1.0 - std::exp(-5.0 * progress)) /
                   (1.0 - std::exp(-5.0));
    }
    return model.mean;
}

std::string runId(int index, int width) {
    std::string digits = std::to_string(index);
    if (digits.size() < static_cast<std::size_t>(width)) {
        digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
    }
    return "run_" + digits;
}

// --- JSON helpers ----------------------------------------------------------

void rejectUnknownKeys(const json& object, std::initializer_list<const char*> known,
                       const std::string& where) {
    for (const auto& [key, value] : object.items()) {
        (void)value;
        if (std::find_if(known.begin(), known.end(), [&key](const char* k) {
                return key == k;
            }) == known.end()) {
            throw InvalidSpec(where, "unknown key '" + key + "'");
        }
    }
}

std::string requireString(const json& object, const char* key, const std::string& where) {
    if (!object.contains(key) || !object.at(key).is_string()) {
        throw InvalidSpec(where, std::string("'") + key + "' must be a string");
    }
    return object.at(key).get<std::string>();
}

TaskModel parseTaskModel(const json& object, const std::string& where) {
    if (!object.is_object()) throw InvalidSpec(where, "model must be an object");
    rejectUnknownKeys(object, {"mean", "stddev", "curve"}, where);
    TaskModel model;
    if (object.contains("mean")) {
        if (!object.at("mean").is_number()) {
            throw InvalidSpec(where, "'mean' must be a number");
        }
        model.mean = object.at("mean").get<double>();
    }
    if (object.contains("stddev")) {
        if (!object.at("stddev").is_number()) {
            throw InvalidSpec(where, "'stddev' must be a number");
        }
        model.stddev = object.at("stddev").get<double>();
    }
    if (object.contains("curve")) {
        if (!object.at("curve").is_string()) {
            throw InvalidSpec(where, "'curve' must be a string");
        }
        model.curve = curveShapeFromString(object.at("curve").get<std::string>());
    }
    requireFiniteModel(model, where);
    return model;
}

json taskModelToJson(const TaskModel& model) {
    return json{{"mean", model.mean},
                {"stddev", model.stddev},
                {"curve", toString(model.curve)}};
}

template <typename T>
void readPositiveInt(const json& doc, const char* key, T& out) {
    if (!doc.contains(key)) return;
    const json& value = doc.at(key);
    if (!value.is_number_integer() || value.get<std::int64_t>() <= 0) {
        throw InvalidSpec(std::string("$.") + key, "must be a positive integer");
    }
    out = static_cast<T>(value.get<std::int64_t>());
}

}  // namespace

std::string toString(CurveShape shape) {
    return shape == CurveShape::Linear ? "linear" : "saturating";
}

CurveShape curveShapeFromString(const std::string& text) {
    if (text == "linear") return CurveShape::Linear;
    if (text == "saturating") return CurveShape::Saturating;
    throw InvalidSpec("curve", "unknown curve shape '" + text +
                                   "' (expected linear or saturating)");
}

const TaskModel& SynthAlgorithm::modelFor(const std::string& env,
                                          const std::string& task) const {
    const auto it = task_models.find(env + "/" + task);
    return it == task_models.end() ? model : it->second;
}

void SynthSpec::validate() const {
    if (environments.empty()) {
        throw InvalidSpec("$.environments", "at least one environment is required");
    }
    std::set<std::string> env_names;
    std::set<std::string> task_keys;
    for (const auto& env : environments) {
        if (env.name.empty()) {
            throw InvalidSpec("$.environments", "environment names must be non-empty");
        }
        if (!env_names.insert(env.name).second) {
            throw InvalidSpec("$.environments",
                              "duplicate environment '" + env.name + "'");
        }
        if (env.tasks.empty()) {
            throw InvalidSpec("$.environments." + env.name,
                              "at least one task is required");
        }
        for (const auto& task : env.tasks) {
            if (task.empty()) {
                throw InvalidSpec("$.environments." + env.name,
                                  "task names must be non-empty");
            }
            if (!task_keys.insert(env.name + "/" + task).second) {
                throw InvalidSpec("$.environments." + env.name,
                                  "duplicate task '" + task + "'");
            }
        }
    }

    if (algorithms.empty()) {
        throw InvalidSpec("$.algorithms", "at least one algorithm is required");
    }
    std::set<std::string> alg_names;
    for (const auto& alg : algorithms) {
        if (alg.name.empty()) {
            throw InvalidSpec("$.algorithms", "algorithm names must be non-empty");
        }
        if (!alg_names.insert(alg.name).second) {
            throw InvalidSpec("$.algorithms", "duplicate algorithm '" + alg.name + "'");
        }
        const std::string where = "$.algorithms." + alg.name;
        requireFiniteModel(alg.model, where + ".model");
        for (const auto& [key, model] : alg.task_models) {
            if (task_keys.count(key) == 0) {
                throw InvalidSpec(where + ".task_models",
                                  "'" + key + "' does not name a declared "
                                  "environment/task");
            }
            requireFiniteModel(model, where + ".task_models." + key);
        }
    }

    if (runs < 1) throw InvalidSpec("$.runs", "must be a positive integer");
    if (intervals < 1) throw InvalidSpec("$.intervals", "must be a positive integer");
    if (eval_interval < 1) {
        throw InvalidSpec("$.eval_interval", "must be a positive integer");
    }
    if (eval_episodes < 1) {
        throw InvalidSpec("$.eval_episodes", "must be a positive integer");
    }
    if (absolute_episodes < 1) {
        throw InvalidSpec("$.absolute_episodes", "must be a positive integer");
    }
    if (eval_interval > std::numeric_limits<std::int64_t>::max() / intervals) {
        throw InvalidSpec("$.eval_interval", "eval_interval * intervals overflows");
    }
}

SynthSpec SynthSpec::protocolDefaults() {
    SynthSpec spec;
    spec.environments = {SynthEnvironment{"env_a", {"task_1", "task_2"}},
                         SynthEnvironment{"env_b", {"task_1"}}};
    spec.algorithms = {
        SynthAlgorithm{"alpha", TaskModel{10.0, 1.0, CurveShape::Saturating}, {}},
        SynthAlgorithm{"beta", TaskModel{8.0, 1.0, CurveShape::Linear}, {}},
    };
    return spec;  // remaining fields already default to the protocol values
}

SynthSpec parseSynthSpec(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& error) {
        throw MalformedJson("$", error.what());
    }
    if (!doc.is_object()) throw InvalidSpec("$", "spec must be a JSON object");
    rejectUnknownKeys(doc,
                      {"environments", "algorithms", "runs", "intervals",
                       "eval_interval", "eval_episodes", "absolute_episodes", "seed"},
                      "$");

    SynthSpec spec;
    if (!doc.contains("environments") || !doc.at("environments").is_array()) {
        throw InvalidSpec("$.environments", "must be an array");
    }
    for (const json& entry : doc.at("environments")) {
        if (!entry.is_object()) {
            throw InvalidSpec("$.environments", "entries must be objects");
        }
        rejectUnknownKeys(entry, {"name", "tasks"}, "$.environments");
        SynthEnvironment env;
        env.name = requireString(entry, "name", "$.environments");
        if (!entry.contains("tasks") || !entry.at("tasks").is_array()) {
            throw InvalidSpec("$.environments." + env.name, "'tasks' must be an array");
        }
        for (const json& task : entry.at("tasks")) {
            if (!task.is_string()) {
                throw InvalidSpec("$.environments." + env.name,
                                  "task names must be strings");
            }
            env.tasks.push_back(task.get<std::string>());
        }
        spec.environments.push_back(std::move(env));
    }

    if (!doc.contains("algorithms") || !doc.at("algorithms").is_array()) {
        throw InvalidSpec("$.algorithms", "must be an array");
    }
    for (const json& entry : doc.at("algorithms")) {
        if (!entry.is_object()) {
            throw InvalidSpec("$.algorithms", "entries must be objects");
        }
        rejectUnknownKeys(entry, {"name", "model", "task_models"}, "$.algorithms");
        SynthAlgorithm alg;
        alg.name = requireString(entry, "name", "$.algorithms");
        const std::string where = "$.algorithms." + alg.name;
        if (entry.contains("model")) {
            alg.model = parseTaskModel(entry.at("model"), where + ".model");
        }
        if (entry.contains("task_models")) {
            if (!entry.at("task_models").is_object()) {
                throw InvalidSpec(where + ".task_models", "must be an object");
            }
            for (const auto& [key, value] : entry.at("task_models").items()) {
                alg.task_models.emplace(
                    key, parseTaskModel(value, where + ".task_models." + key));
            }
        }
        spec.algorithms.push_back(std::move(alg));
    }

    readPositiveInt(doc, "runs", spec.runs);
    readPositiveInt(doc, "intervals", spec.intervals);
    readPositiveInt(doc, "eval_interval", spec.eval_interval);
    readPositiveInt(doc, "eval_episodes", spec.eval_episodes);
    readPositiveInt(doc, "absolute_episodes", spec.absolute_episodes);
    if (doc.contains("seed")) {
        if (!doc.at("seed").is_number_unsigned() && !doc.at("seed").is_number_integer()) {
            throw InvalidSpec("$.seed", "must be a non-negative integer");
        }
        if (doc.at("seed").is_number_integer() && doc.at("seed").get<std::int64_t>() < 0) {
            throw InvalidSpec("$.seed", "must be a non-negative integer");
        }
        spec.seed = doc.at("seed").get<std::uint64_t>();
    }

    spec.validate();
    return spec;
}

std::string serializeSynthSpec(const SynthSpec& spec) {
    spec.validate();
    json doc;
    doc["environments"] = json::array();
    for (const auto& env : spec.environments) {
        doc["environments"].push_back(json{{"name", env.name}, {"tasks", env.tasks}});
    }
    doc["algorithms"] = json::array();
    for (const auto& alg : spec.algorithms) {
        json entry{{"name", alg.name}, {"model", taskModelToJson(alg.model)}};
        if (!alg.task_models.empty()) {
            json models = json::object();
            for (const auto& [key, model] : alg.task_models) {
                models[key] = taskModelToJson(model);
            }
            entry["task_models"] = std::move(models);
        }
        doc["algorithms"].push_back(std::move(entry));
    }
    doc["runs"] = spec.runs;
    doc["intervals"] = spec.intervals;
    doc["eval_interval"] = spec.eval_interval;
    doc["eval_episodes"] = spec.eval_episodes;
    doc["absolute_episodes"] = spec.absolute_episodes;
    doc["seed"] = spec.seed;
    return doc.dump(2) + "\n";
}

ExperimentLog generateSyntheticLog(const SynthSpec& spec) {
    spec.validate();

    const int id_width =
        std::max<int>(2, static_cast<int>(std::to_string(spec.runs - 1).size()));
    const std::int64_t final_step =
        spec.eval_interval * static_cast<std::int64_t>(spec.intervals);

    ExperimentLog::EnvMap environments;
    for (const auto& env : spec.environments) {
        for (const auto& task : env.tasks) {
            for (const auto& alg : spec.algorithms) {
                const TaskModel& model = alg.modelFor(env.name, task);
                ExperimentLog::RunMap runs;
                for (int r = 0; r < spec.runs; ++r) {
                    const std::string run = runId(r, id_width);
                    const std::string label =
                        env.name + "|" + task + "|" + alg.name + "|" + run;

                    std::vector<IntervalRecord> intervals;
                    intervals.reserve(static_cast<std::size_t>(spec.intervals));
                    for (int i = 0; i < spec.intervals; ++i) {
                        const std::int64_t step =
                            spec.eval_interval * static_cast<std::int64_t>(i + 1);
                        const double progress = static_cast<double>(step) /
                                                static_cast<double>(final_step);
                        const double mean_i = shapedMean(model, progress);
                        rng::Stream stream(
                            rng::deriveKey(spec.seed, label,
                                           static_cast<std::uint64_t>(i)));
                        std::vector<double> episodes(
                            static_cast<std::size_t>(spec.eval_episodes));
                        for (double& value : episodes) {
                            value = mean_i + model.stddev * stream.nextGaussian();
                        }
                        intervals.emplace_back(
                            step, IntervalRecord::MetricMap{{kReturnMetric, episodes}});
                    }

                    rng::Stream abs_stream(
                        rng::deriveKey(spec.seed, label + "|absolute"));
                    std::vector<double> absolute(
                        static_cast<std::size_t>(spec.absolute_episodes));
                    for (double& value : absolute) {
                        value = model.mean + model.stddev * abs_stream.nextGaussian();
                    }

                    runs.emplace(run, RunRecord(std::move(intervals),
                                                AbsoluteRecord(AbsoluteRecord::MetricMap{
                                                    {kReturnMetric, absolute}})));
                }
                environments[env.name][task].emplace(alg.name, std::move(runs));
            }
        }
    }

    std::vector<MetricDescriptor> descriptors{MetricDescriptor(kReturnMetric)};
    std::map<std::string, std::string> metadata{
        {"generator", "synth"}, {"synth_seed", std::to_string(spec.seed)}};
    return ExperimentLog(std::move(environments), std::move(descriptors),
                         std::move(metadata));
}

// ---------------------------------------------------------------------------
// Reference implementations
// ---------------------------------------------------------------------------

namespace {

double pairwiseSum(std::span<const double> values) {
    if (values.size() <= 8) {
        double sum = 0.0;
        for (double v : values) sum += v;
        return sum;
    }
    const std::size_t half = values.size() / 2;
    return pairwiseSum(values.first(half)) + pairwiseSum(values.subspan(half));
}

}  // namespace

double oracleIqm(std::vector<double> values) {
    if (values.empty()) throw EmptyInput("oracleIqm: no values");
    std::sort(values.begin(), values.end());
    const std::size_t trim = values.size() / 4;
    const std::vector<double> kept(values.begin() + static_cast<std::ptrdiff_t>(trim),
                                   values.end() - static_cast<std::ptrdiff_t>(trim));
    return pairwiseSum(kept) / static_cast<double>(kept.size());
}

double oracleProbabilityOfImprovement(const EvalMatrix& candidate,
                                      const EvalMatrix& baseline) {
    if (candidate.tasks() != baseline.tasks()) {
        throw TaskListMismatch("oracleProbabilityOfImprovement",
                               "candidate and baseline cover different task lists");
    }
    const double pairs =
        static_cast<double>(candidate.runs()) * static_cast<double>(baseline.runs());
    double acc = 0.0;
    for (std::size_t t = 0; t < candidate.taskCount(); ++t) {
        const std::vector<double> x = candidate.column(t);
        const std::vector<double> y = baseline.column(t);
        double wins = 0.0;
        for (double xi : x) {
            for (double yj : y) {
                if (xi > yj) {
                    wins += 1.0;
                } else if (xi == yj) {
                    wins += 0.5;
                }
            }
        }
        acc += wins / pairs;
    }
    return acc / static_cast<double>(candidate.taskCount());
}

}  // namespace marleval
