#pragma once

// Shared builders for the test suites: tiny hand-rolled logs with known
// contents, randomised logs/matrices driven by the library's own keyed
// streams (so failures reproduce exactly), and process-spawning helpers for
// the CLI tests.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "marleval/ingest.hpp"
#include "marleval/model.hpp"
#include "marleval/rng.hpp"

namespace testsupport {

inline std::string readTextFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(static_cast<bool>(in), "cannot open " << path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline void writeTextFile(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE_MESSAGE(static_cast<bool>(out), "cannot write " << path);
    out << content;
}

// Directory for scratch files, unique per test-binary run.
inline std::filesystem::path scratchDir() {
    static const std::filesystem::path dir = [] {
        auto d = std::filesystem::temp_directory_path() /
                 ("marleval_tests_" + std::to_string(::getpid()));
        std::filesystem::create_directories(d);
        return d;
    }();
    return dir;
}

// Path of the command-line binary, exported by CTest.
inline std::string cliPath() {
    const char* env = std::getenv("MARLEVAL_CLI");
    REQUIRE_MESSAGE(env != nullptr, "MARLEVAL_CLI is not set; run through ctest");
    return env;
}

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

// Runs the CLI with `args` appended (caller quotes as needed) and captures
// both streams.
inline CliResult runCli(const std::string& args) {
    const auto out_path = scratchDir() / "cli_stdout.txt";
    const auto err_path = scratchDir() / "cli_stderr.txt";
    const std::string command = "\"" + cliPath() + "\" " + args + " >\"" +
                                out_path.string() + "\" 2>\"" + err_path.string() +
                                "\"";
    const int status = std::system(command.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = readTextFile(out_path.string());
    result.err = readTextFile(err_path.string());
    return result;
}

// --- log builders ------------------------------------------------------------

// One interval record holding only the return metric.
inline marleval::IntervalRecord interval(std::int64_t step, std::vector<double> values) {
    return marleval::IntervalRecord(
        step, marleval::IntervalRecord::MetricMap{{marleval::kReturnMetric,
                                                   std::move(values)}});
}

inline marleval::AbsoluteRecord absolute(std::vector<double> values) {
    return marleval::AbsoluteRecord(
        marleval::AbsoluteRecord::MetricMap{{marleval::kReturnMetric,
                                             std::move(values)}});
}

// A run whose per-interval return means are exactly `interval_means` (one
// episode per interval) on the grid step, 2*step, ... with an absolute block
// of a single episode worth `absolute_mean`.
inline marleval::RunRecord runWithMeans(const std::vector<double>& interval_means,
                                        double absolute_mean,
                                        std::int64_t step = 10'000) {
    std::vector<marleval::IntervalRecord> intervals;
    for (std::size_t i = 0; i < interval_means.size(); ++i) {
        intervals.push_back(
            interval(step * static_cast<std::int64_t>(i + 1), {interval_means[i]}));
    }
    return marleval::RunRecord(std::move(intervals), absolute({absolute_mean}));
}

// Minimal two-environment log: env_a/{task_1,task_2} and env_b/task_1, two
// algorithms ("alg_a", "alg_b"), two runs each, fixed small values.
inline marleval::ExperimentLog tinyLog() {
    using namespace marleval;
    ExperimentLog::EnvMap envs;
    int counter = 0;
    for (const auto& [env, task] :
         std::vector<std::pair<std::string, std::string>>{
             {"env_a", "task_1"}, {"env_a", "task_2"}, {"env_b", "task_1"}}) {
        for (const std::string alg : {"alg_a", "alg_b"}) {
            ExperimentLog::RunMap runs;
            for (const std::string run : {"run_00", "run_01"}) {
                const double base = 0.125 * static_cast<double>(++counter);
                runs.emplace(run, runWithMeans({base, base + 0.5}, base + 1.0));
            }
            envs[env][task].emplace(alg, std::move(runs));
        }
    }
    return ExperimentLog(std::move(envs), {MetricDescriptor(kReturnMetric)},
                         {{"source", "tinyLog"}});
}

// Random structured log: `envs` environments x `tasks` tasks, `algs`
// algorithms, `runs` runs, `intervals` intervals per run, values uniform in
// [0, 5). Groups of the same task share one step grid.
inline marleval::ExperimentLog randomLog(marleval::rng::Stream& stream, int envs = 2,
                                         int tasks = 2, int algs = 2, int runs = 4,
                                         int intervals = 3, int episodes = 4) {
    using namespace marleval;
    ExperimentLog::EnvMap env_map;
    for (int e = 0; e < envs; ++e) {
        const std::string env = "env_" + std::to_string(e);
        for (int t = 0; t < tasks; ++t) {
            const std::string task = "task_" + std::to_string(t);
            for (int a = 0; a < algs; ++a) {
                const std::string alg = "alg_" + std::to_string(a);
                ExperimentLog::RunMap run_map;
                for (int r = 0; r < runs; ++r) {
                    std::vector<IntervalRecord> records;
                    for (int i = 0; i < intervals; ++i) {
                        std::vector<double> values(static_cast<std::size_t>(episodes));
                        for (double& v : values) v = 5.0 * stream.nextUnit();
                        records.push_back(
                            interval(10'000 * static_cast<std::int64_t>(i + 1),
                                     std::move(values)));
                    }
                    std::vector<double> abs_values(static_cast<std::size_t>(episodes));
                    for (double& v : abs_values) v = 5.0 * stream.nextUnit();
                    run_map.emplace("run_" + std::to_string(r),
                                    RunRecord(std::move(records),
                                              absolute(std::move(abs_values))));
                }
                env_map[env][task].emplace(alg, std::move(run_map));
            }
        }
    }
    return ExperimentLog(std::move(env_map), {MetricDescriptor(kReturnMetric)}, {});
}

// Random normalised evaluation matrix with entries in [0, 1).
inline marleval::EvalMatrix randomMatrix(marleval::rng::Stream& stream,
                                         std::size_t runs, std::size_t tasks,
                                         const std::string& algorithm = "alg") {
    std::vector<marleval::TaskId> ids;
    for (std::size_t t = 0; t < tasks; ++t) {
        ids.push_back(marleval::TaskId{"env", "task_" + std::to_string(t)});
    }
    std::vector<double> values(runs * tasks);
    for (double& v : values) v = stream.nextUnit();
    return marleval::EvalMatrix(algorithm, marleval::kReturnMetric, std::move(ids),
                                runs, std::move(values), true);
}

}  // namespace testsupport
