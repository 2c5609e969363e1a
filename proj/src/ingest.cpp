#include "marleval/ingest.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

namespace marleval {

namespace {

using nlohmann::json;

const char* kKnownTopLevel[] = {"version", "metrics", "environments", "metadata"};

bool isKnownTopLevel(const std::string& key) {
    for (const char* known : kKnownTopLevel) {
        if (key == known) return true;
    }
    return false;
}

// True when the descriptor set means stored values are the negation of the
// document values (lower-is-better metrics are flipped on ingestion so all
// downstream statistics can assume higher-is-better).
std::set<std::string> negatedMetrics(const std::vector<MetricDescriptor>& descriptors) {
    std::set<std::string> negated;
    for (const auto& d : descriptors) {
        if (!d.higherIsBetter()) negated.insert(d.name());
    }
    return negated;
}

std::vector<double> readEpisodeList(const json& node, const std::string& path,
                                    bool negate) {
    if (!node.is_array()) {
        throw SchemaViolation(path, "expected an array of numbers");
    }
    std::vector<double> episodes;
    episodes.reserve(node.size());
    std::size_t i = 0;
    for (const auto& item : node) {
        const std::string item_path = path + "[" + std::to_string(i) + "]";
        if (!item.is_number()) {
            throw SchemaViolation(item_path, "expected a number");
        }
        const double v = item.get<double>();
        if (!std::isfinite(v)) {
            throw SchemaViolation(item_path,
                                  "number is outside the IEEE-754 double range");
        }
        episodes.push_back(negate ? -v : v);
        ++i;
    }
    return episodes;
}

IntervalRecord::MetricMap readMetricMap(const json& node, const std::string& path,
                                        const std::set<std::string>& negated) {
    if (!node.is_object()) {
        throw SchemaViolation(path, "expected an object mapping metric name to values");
    }
    IntervalRecord::MetricMap metrics;
    for (const auto& [name, values] : node.items()) {
        metrics[name] = readEpisodeList(values, path + "." + name,
                                        negated.count(name) != 0);
    }
    return metrics;
}

RunRecord readRun(const json& node, const std::string& path,
                  const std::set<std::string>& negated) {
    if (!node.is_object()) {
        throw SchemaViolation(path, "expected a run object");
    }
    for (const auto& [key, value] : node.items()) {
        (void)value;
        if (key != "intervals" && key != "absolute") {
            throw SchemaViolation(path + "." + key, "unknown run field");
        }
    }
    if (!node.contains("intervals")) {
        throw SchemaViolation(path, "run is missing 'intervals'");
    }
    const json& intervals_node = node.at("intervals");
    if (!intervals_node.is_array()) {
        throw SchemaViolation(path + ".intervals", "expected an array");
    }
    std::vector<IntervalRecord> intervals;
    intervals.reserve(intervals_node.size());
    std::size_t i = 0;
    for (const auto& interval_node : intervals_node) {
        const std::string interval_path = path + ".intervals[" + std::to_string(i) + "]";
        if (!interval_node.is_object()) {
            throw SchemaViolation(interval_path, "expected an interval object");
        }
        if (!interval_node.contains("step_count")) {
            throw SchemaViolation(interval_path, "interval is missing 'step_count'");
        }
        const json& step_node = interval_node.at("step_count");
        if (!step_node.is_number_integer()) {
            throw SchemaViolation(interval_path + ".step_count",
                                  "expected an integer step count");
        }
        if (!interval_node.contains("metrics")) {
            throw SchemaViolation(interval_path, "interval is missing 'metrics'");
        }
        try {
            intervals.emplace_back(step_node.get<std::int64_t>(),
                                   readMetricMap(interval_node.at("metrics"),
                                                 interval_path + ".metrics", negated));
        } catch (const InvariantViolation& e) {
            throw InvariantViolation(interval_path, e.message());
        }
        ++i;
    }
    std::optional<AbsoluteRecord> absolute;
    if (node.contains("absolute")) {
        const json& absolute_node = node.at("absolute");
        if (!absolute_node.is_object() || !absolute_node.contains("metrics")) {
            throw SchemaViolation(path + ".absolute",
                                  "expected an object with a 'metrics' field");
        }
        try {
            absolute.emplace(readMetricMap(absolute_node.at("metrics"),
                                           path + ".absolute.metrics", negated));
        } catch (const InvariantViolation& e) {
            throw InvariantViolation(path + ".absolute", e.message());
        }
    }
    try {
        return RunRecord(std::move(intervals), std::move(absolute));
    } catch (const InvariantViolation& e) {
        throw InvariantViolation(path, e.message());
    }
}

json episodeListToJson(const std::vector<double>& episodes, bool negate) {
    json list = json::array();
    for (double v : episodes) list.push_back(negate ? -v : v);
    return list;
}

json metricMapToJson(const IntervalRecord::MetricMap& metrics,
                     const std::set<std::string>& negated) {
    json node = json::object();
    for (const auto& [name, episodes] : metrics) {
        node[name] = episodeListToJson(episodes, negated.count(name) != 0);
    }
    return node;
}

}  // namespace

ExperimentLog parseExperimentLog(const std::string& utf8_json) {
    json doc;
    try {
        doc = json::parse(utf8_json);
    } catch (const json::exception& e) {
        // Covers syntax errors and numbers no double can hold (e.g. 1e999).
        throw MalformedJson("$", e.what());
    }
    if (!doc.is_object()) {
        throw SchemaViolation("$", "the log document must be a JSON object");
    }
    if (doc.contains("version")) {
        const json& version = doc.at("version");
        if (!version.is_string() || version.get<std::string>() != "1") {
            throw SchemaViolation("$.version", "unsupported log version (expected \"1\")");
        }
    }

    std::vector<MetricDescriptor> descriptors;
    if (!doc.contains("metrics") || !doc.at("metrics").is_array()) {
        throw SchemaViolation("$.metrics", "a 'metrics' descriptor array is required");
    }
    std::size_t d = 0;
    for (const auto& entry : doc.at("metrics")) {
        const std::string entry_path = "$.metrics[" + std::to_string(d) + "]";
        if (!entry.is_object() || !entry.contains("name") || !entry.at("name").is_string()) {
            throw SchemaViolation(entry_path, "descriptor needs a string 'name'");
        }
        bool unit_interval = false;
        bool higher_is_better = true;
        if (entry.contains("unit_interval")) {
            if (!entry.at("unit_interval").is_boolean()) {
                throw SchemaViolation(entry_path + ".unit_interval", "expected a boolean");
            }
            unit_interval = entry.at("unit_interval").get<bool>();
        }
        if (entry.contains("higher_is_better")) {
            if (!entry.at("higher_is_better").is_boolean()) {
                throw SchemaViolation(entry_path + ".higher_is_better",
                                      "expected a boolean");
            }
            higher_is_better = entry.at("higher_is_better").get<bool>();
        }
        try {
            descriptors.emplace_back(entry.at("name").get<std::string>(), unit_interval,
                                     higher_is_better);
        } catch (const InvariantViolation& e) {
            throw SchemaViolation(entry_path, e.message());
        }
        ++d;
    }
    bool has_return_descriptor = false;
    for (const auto& descriptor : descriptors) {
        if (descriptor.name() == kReturnMetric) has_return_descriptor = true;
    }
    if (!has_return_descriptor) {
        throw SchemaViolation("$.metrics", "a 'return' metric descriptor is required");
    }
    const std::set<std::string> negated = negatedMetrics(descriptors);

    if (!doc.contains("environments") || !doc.at("environments").is_object()) {
        throw SchemaViolation("$.environments", "an 'environments' object is required");
    }
    ExperimentLog::EnvMap environments;
    for (const auto& [env, tasks_node] : doc.at("environments").items()) {
        const std::string env_path = "$.environments." + env;
        if (!tasks_node.is_object()) {
            throw SchemaViolation(env_path, "expected an object of tasks");
        }
        ExperimentLog::TaskMap tasks;
        for (const auto& [task, algs_node] : tasks_node.items()) {
            const std::string task_path = env_path + "." + task;
            if (!algs_node.is_object()) {
                throw SchemaViolation(task_path, "expected an object of algorithms");
            }
            ExperimentLog::AlgMap algs;
            for (const auto& [alg, runs_node] : algs_node.items()) {
                const std::string alg_path = task_path + "." + alg;
                if (!runs_node.is_object()) {
                    throw SchemaViolation(alg_path, "expected an object of runs");
                }
                ExperimentLog::RunMap runs;
                for (const auto& [run_id, run_node] : runs_node.items()) {
                    runs.emplace(run_id, readRun(run_node, alg_path + "." + run_id, negated));
                }
                algs.emplace(alg, std::move(runs));
            }
            tasks.emplace(task, std::move(algs));
        }
        environments.emplace(env, std::move(tasks));
    }

    std::map<std::string, std::string> metadata;
    if (doc.contains("metadata")) {
        if (!doc.at("metadata").is_object()) {
            throw SchemaViolation("$.metadata", "expected an object of strings");
        }
        for (const auto& [key, value] : doc.at("metadata").items()) {
            if (!value.is_string()) {
                throw SchemaViolation("$.metadata." + key, "metadata values must be strings");
            }
            metadata[key] = value.get<std::string>();
        }
    }
    // Unknown top-level keys survive the round trip inside metadata.
    for (const auto& [key, value] : doc.items()) {
        if (isKnownTopLevel(key)) continue;
        const std::string slot = "extra:" + key;
        if (metadata.count(slot) != 0) {
            throw SchemaViolation("$." + key,
                                  "preserving this key would overwrite metadata '" +
                                      slot + "'");
        }
        metadata[slot] = value.is_string() ? value.get<std::string>() : value.dump();
    }

    return ExperimentLog(std::move(environments), std::move(descriptors),
                         std::move(metadata));
}

std::string serializeExperimentLog(const ExperimentLog& log) {
    const std::set<std::string> negated = negatedMetrics(log.metricDescriptors());
    json doc;
    doc["version"] = "1";
    json metrics = json::array();
    for (const auto& descriptor : log.metricDescriptors()) {
        metrics.push_back({{"name", descriptor.name()},
                           {"unit_interval", descriptor.unitInterval()},
                           {"higher_is_better", descriptor.higherIsBetter()}});
    }
    doc["metrics"] = std::move(metrics);

    json environments = json::object();
    for (const auto& [env, tasks] : log.environments()) {
        json tasks_node = json::object();
        for (const auto& [task, algs] : tasks) {
            json algs_node = json::object();
            for (const auto& [alg, runs] : algs) {
                json runs_node = json::object();
                for (const auto& [run_id, run] : runs) {
                    json intervals = json::array();
                    for (const auto& interval : run.intervals()) {
                        intervals.push_back(
                            {{"step_count", interval.stepCount()},
                             {"metrics", metricMapToJson(interval.metrics(), negated)}});
                    }
                    json run_node = {{"intervals", std::move(intervals)}};
                    if (run.absolute().has_value()) {
                        run_node["absolute"] = {
                            {"metrics", metricMapToJson(run.absolute()->metrics(), negated)}};
                    }
                    runs_node[run_id] = std::move(run_node);
                }
                algs_node[alg] = std::move(runs_node);
            }
            tasks_node[task] = std::move(algs_node);
        }
        environments[env] = std::move(tasks_node);
    }
    doc["environments"] = std::move(environments);
    doc["metadata"] = log.metadata();
    return doc.dump(2) + "\n";
}

ValidationReport validateLog(const ExperimentLog& log, const ProtocolConfig& config) {
    config.validate();
    ValidationReport report;

    std::set<std::string> declared;
    for (const auto& descriptor : log.metricDescriptors()) declared.insert(descriptor.name());
    std::set<std::string> undeclared_reported;

    for (const auto& [env, tasks] : log.environments()) {
        for (const auto& [task, algs] : tasks) {
            for (const auto& [alg, runs] : algs) {
                const std::string group_path =
                    "$.environments." + env + "." + task + "." + alg;

                // Metric names present at a step in some runs but not others.
                std::map<std::int64_t, std::set<std::string>> names_at_step;
                for (const auto& [run_id, run] : runs) {
                    (void)run_id;
                    for (const auto& interval : run.intervals()) {
                        for (const auto& [name, episodes] : interval.metrics()) {
                            (void)episodes;
                            names_at_step[interval.stepCount()].insert(name);
                            if (declared.count(name) == 0 &&
                                undeclared_reported.insert(name).second) {
                                report.warnings.push_back(Finding{
                                    "$.metrics",
                                    "metric '" + name +
                                        "' appears in the data but has no descriptor"});
                            }
                        }
                    }
                }

                for (const auto& [run_id, run] : runs) {
                    const std::string run_path = group_path + "." + run_id;
                    for (std::size_t i = 0; i < run.intervals().size(); ++i) {
                        const IntervalRecord& interval = run.intervals()[i];
                        const std::string interval_path =
                            run_path + ".intervals[" + std::to_string(i) + "]";
                        const std::size_t count = interval.episodeCount();
                        if (count != static_cast<std::size_t>(config.eval_episodes)) {
                            report.warnings.push_back(Finding{
                                interval_path,
                                "episode count " + std::to_string(count) + " != " +
                                    std::to_string(config.eval_episodes)});
                        }
                        for (const std::string& name : names_at_step[interval.stepCount()]) {
                            if (!interval.has(name)) {
                                report.warnings.push_back(Finding{
                                    interval_path,
                                    "metric '" + name + "' is missing here but other "
                                    "runs record it at step " +
                                        std::to_string(interval.stepCount())});
                            }
                        }
                    }
                    if (!run.absolute().has_value()) {
                        report.warnings.push_back(Finding{
                            run_path,
                            "no absolute block; the protocol's absolute metric expects "
                            "the best policy re-evaluated over " +
                                std::to_string(config.absolute_episodes) + " episodes"});
                    }
                }
            }
        }
    }
    return report;
}

ExperimentLog mergeLogs(const std::vector<ExperimentLog>& logs) {
    if (logs.empty()) {
        throw EmptyInput("mergeLogs: at least one log is required");
    }
    ExperimentLog::EnvMap environments;
    std::vector<MetricDescriptor> descriptors;
    std::map<std::string, std::string> metadata;

    for (std::size_t i = 0; i < logs.size(); ++i) {
        const ExperimentLog& log = logs[i];
        for (const auto& incoming : log.metricDescriptors()) {
            bool found = false;
            for (const auto& existing : descriptors) {
                if (existing.name() != incoming.name()) continue;
                if (!(existing == incoming)) {
                    throw SchemaViolation(
                        "$.metrics." + incoming.name(),
                        "conflicting descriptor declarations across merged logs");
                }
                found = true;
                break;
            }
            if (!found) descriptors.push_back(incoming);
        }
        for (const auto& [env, tasks] : log.environments()) {
            for (const auto& [task, algs] : tasks) {
                for (const auto& [alg, runs] : algs) {
                    auto& target = environments[env][task][alg];
                    for (const auto& [run_id, run] : runs) {
                        if (!target.emplace(run_id, run).second) {
                            throw DuplicateRun(
                                "$.environments." + env + "." + task + "." + alg + "." +
                                    run_id,
                                "run id collides while merging log " + std::to_string(i));
                        }
                    }
                }
            }
        }
        for (const auto& [key, value] : log.metadata()) {
            metadata["log" + std::to_string(i) + "." + key] = value;
        }
    }
    return ExperimentLog(std::move(environments), std::move(descriptors),
                         std::move(metadata));
}

ProtocolConfig parseProtocolConfig(const std::string& utf8_json) {
    json doc;
    try {
        doc = json::parse(utf8_json);
    } catch (const json::exception& e) {
        throw MalformedJson("$", e.what());
    }
    if (!doc.is_object()) {
        throw SchemaViolation("$", "the protocol config must be a JSON object");
    }
    ProtocolConfig config;
    for (const auto& [key, value] : doc.items()) {
        try {
            if (key == "timesteps_off_policy") {
                config.timesteps_off_policy = value.get<std::int64_t>();
            } else if (key == "timesteps_on_policy") {
                config.timesteps_on_policy = value.get<std::int64_t>();
            } else if (key == "runs") {
                config.runs = value.get<int>();
            } else if (key == "eval_episodes") {
                config.eval_episodes = value.get<int>();
            } else if (key == "eval_interval") {
                config.eval_interval = value.get<std::int64_t>();
            } else if (key == "absolute_episodes") {
                config.absolute_episodes = value.get<int>();
            } else if (key == "ci_level") {
                config.ci_level = value.get<double>();
            } else if (key == "bootstrap_replicates") {
                config.bootstrap_replicates = value.get<int>();
            } else if (key == "gamma") {
                config.gamma = value.get<double>();
            } else if (key == "seed") {
                config.seed = value.get<std::uint64_t>();
            } else {
                throw SchemaViolation("$." + key, "unknown protocol config field");
            }
        } catch (const json::exception&) {
            throw SchemaViolation("$." + key, "wrong type for this field");
        }
    }
    config.validate();
    return config;
}

std::string serializeProtocolConfig(const ProtocolConfig& config) {
    json doc;
    doc["timesteps_off_policy"] = config.timesteps_off_policy;
    doc["timesteps_on_policy"] = config.timesteps_on_policy;
    doc["runs"] = config.runs;
    doc["eval_episodes"] = config.eval_episodes;
    doc["eval_interval"] = config.eval_interval;
    doc["absolute_episodes"] = config.absolute_episodes;
    doc["ci_level"] = config.ci_level;
    doc["bootstrap_replicates"] = config.bootstrap_replicates;
    doc["gamma"] = config.gamma;
    doc["seed"] = config.seed;
    return doc.dump(2) + "\n";
}

std::string validationReportToJson(const ValidationReport& report) {
    json doc;
    doc["is_valid"] = report.isValid();
    auto findings = [](const std::vector<Finding>& items) {
        json list = json::array();
        for (const auto& finding : items) {
            list.push_back({{"path", finding.path}, {"message", finding.message}});
        }
        return list;
    };
    doc["errors"] = findings(report.errors);
    doc["warnings"] = findings(report.warnings);
    return doc.dump(2) + "\n";
}

}  // namespace marleval
