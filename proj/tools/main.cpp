// marleval: command-line front end for the evaluation toolkit. Every
// subcommand is a thin adapter around the library; no statistics live here.
//
// Exit codes: 0 success, 1 data error or lint failure, 2 usage error
// (including unreadable input files).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "marleval/aggregate.hpp"
#include "marleval/compare.hpp"
#include "marleval/errors.hpp"
#include "marleval/ingest.hpp"
#include "marleval/lint.hpp"
#include "marleval/metrics.hpp"
#include "marleval/report.hpp"
#include "marleval/synth.hpp"

namespace {

using namespace marleval;

std::string readFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "no such file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw IoError(path, "read failed");
    return buffer.str();
}

void writeFile(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    out << content;
    out.flush();
    if (!out) throw IoError(path, "write failed");
}

void printWarnings(const WarningLog& warnings) {
    for (const auto& finding : warnings.items) {
        std::cerr << "warning: " << finding.path << ": " << finding.message << "\n";
    }
}

// Shared options that feed a ProtocolConfig: a base config file plus explicit
// flag overrides (flags win).
struct ConfigOptions {
    std::string config_path;
    std::optional<int> replicates;
    std::optional<std::uint64_t> seed;
    std::optional<double> gamma;

    ProtocolConfig resolve() const {
        ProtocolConfig config;
        if (!config_path.empty()) config = parseProtocolConfig(readFile(config_path));
        if (replicates) config.bootstrap_replicates = *replicates;
        if (seed) config.seed = *seed;
        if (gamma) config.gamma = *gamma;
        config.validate();
        return config;
    }
};

void addConfigFlag(CLI::App* cmd, ConfigOptions& options) {
    cmd->add_option("--config", options.config_path,
                    "Protocol-config JSON overriding the built-in defaults");
}

void addBootstrapFlags(CLI::App* cmd, ConfigOptions& options) {
    cmd->add_option("--replicates", options.replicates, "Bootstrap replicate count");
    cmd->add_option("--seed", options.seed, "Seed for all randomised resampling");
}

MetricDescriptor descriptorFor(const ExperimentLog& log, const std::string& metric) {
    const MetricDescriptor* declared = log.findDescriptor(metric);
    return declared ? *declared : MetricDescriptor(metric);
}

// "out/profile.csv" + "qmix" -> "out/profile.qmix.csv"
std::string insertLabel(const std::string& path, const std::string& label) {
    const std::filesystem::path p(path);
    std::filesystem::path result = p.parent_path();
    result /= p.stem().string() + "." + label + p.extension().string();
    return result.string();
}

std::string renderValidationText(const ValidationReport& report) {
    std::ostringstream out;
    for (const auto& finding : report.errors) {
        out << "error: " << finding.path << ": " << finding.message << "\n";
    }
    for (const auto& finding : report.warnings) {
        out << "warning: " << finding.path << ": " << finding.message << "\n";
    }
    out << (report.isValid() ? "valid" : "invalid") << " (" << report.errors.size()
        << " errors, " << report.warnings.size() << " warnings)\n";
    return out.str();
}

// --- subcommand bodies -------------------------------------------------------

int runValidate(const std::string& log_path, bool as_json,
                const ConfigOptions& options) {
    const ProtocolConfig config = options.resolve();
    const std::string text = readFile(log_path);
    ValidationReport report;
    try {
        const ExperimentLog log = parseExperimentLog(text);
        report = validateLog(log, config);
    } catch (const Error& error) {
        report.errors.push_back(Finding{error.path(), error.message()});
    }
    std::cout << (as_json ? validationReportToJson(report)
                          : renderValidationText(report));
    return report.isValid() ? 0 : 1;
}

int runLint(const std::string& log_path, const std::string& policy_path, bool as_json,
            const ConfigOptions& options) {
    const ProtocolConfig config = options.resolve();
    std::map<std::string, PolicyClass> policy;
    if (!policy_path.empty()) policy = parsePolicyClasses(readFile(policy_path));
    const ExperimentLog log = parseExperimentLog(readFile(log_path));
    const LintReport report = lintProtocol(log, config, policy);
    std::cout << (as_json ? lintReportToJson(report) : renderLintText(report));
    return report.hasFailures() ? 1 : 0;
}

int runAggregate(const std::string& log_path, const std::string& metric,
                 const std::string& pooling_name, const std::string& stats_csv,
                 const std::string& out_path, const ConfigOptions& options) {
    const ProtocolConfig config = options.resolve();
    const Pooling pooling = poolingFromString(pooling_name);

    std::vector<Statistic> statistics;
    std::stringstream names(stats_csv);
    std::string name;
    while (std::getline(names, name, ',')) {
        if (!name.empty()) statistics.push_back(statisticFromString(name));
    }
    if (statistics.empty()) {
        throw SchemaViolation("--stats", "no statistics requested");
    }

    const ExperimentLog log = parseExperimentLog(readFile(log_path));
    const MetricDescriptor descriptor = descriptorFor(log, metric);
    WarningLog warnings;
    std::map<std::string, EvalMatrix> matrices;
    for (const std::string& algorithm : log.algorithms()) {
        matrices.emplace(algorithm, buildEvaluationMatrix(log, algorithm, metric,
                                                          pooling, descriptor,
                                                          &warnings));
    }
    printWarnings(warnings);
    const AggregateReport report = aggregateScores(matrices, statistics, config);
    writeFile(out_path, aggregateReportToJson(report));
    return 0;
}

int runCompare(const std::string& log_path, const std::string& candidate,
               const std::string& baseline, const std::string& metric,
               const std::string& pooling_name, const ConfigOptions& options) {
    const ProtocolConfig config = options.resolve();
    const Pooling pooling = poolingFromString(pooling_name);
    const ExperimentLog log = parseExperimentLog(readFile(log_path));
    const MetricDescriptor descriptor = descriptorFor(log, metric);
    WarningLog warnings;
    const EvalMatrix x =
        buildEvaluationMatrix(log, candidate, metric, pooling, descriptor, &warnings);
    const EvalMatrix y =
        buildEvaluationMatrix(log, baseline, metric, pooling, descriptor, &warnings);
    printWarnings(warnings);
    const ImprovementScore score = probabilityOfImprovement(
        x, y, config.bootstrap_replicates, config.ci_level, config.seed);
    std::cout << improvementScoreToJson(score);
    return 0;
}

int runProfile(const std::string& log_path, const std::string& metric,
               std::vector<std::string> algorithms, const std::string& pooling_name,
               std::size_t tau_points, const std::string& out_path,
               const ConfigOptions& options) {
    const ProtocolConfig config = options.resolve();
    const Pooling pooling = poolingFromString(pooling_name);
    const ExperimentLog log = parseExperimentLog(readFile(log_path));
    const MetricDescriptor descriptor = descriptorFor(log, metric);
    if (algorithms.empty()) algorithms = log.algorithms();

    const std::vector<double> taus = defaultTauGrid(tau_points);
    WarningLog warnings;
    for (const std::string& algorithm : algorithms) {
        const EvalMatrix matrix = buildEvaluationMatrix(log, algorithm, metric,
                                                        pooling, descriptor, &warnings);
        const ProfileCurve curve =
            performanceProfile(matrix, taus, config.bootstrap_replicates,
                               config.ci_level, config.seed);
        const std::string path =
            algorithms.size() == 1 ? out_path : insertLabel(out_path, algorithm);
        writeFile(path, emitPlotData(curve));
    }
    printWarnings(warnings);
    return 0;
}

int runCurves(const std::string& log_path, const std::string& algorithm,
              const std::string& metric, const std::string& statistic_name,
              const std::string& align_name, const std::string& pooling_name,
              const std::string& out_path, const ConfigOptions& options) {
    const ProtocolConfig config = options.resolve();
    const Pooling pooling = poolingFromString(pooling_name);
    const Statistic statistic = statisticFromString(statistic_name);
    const StepAlignment alignment = align_name == "intersect" ? StepAlignment::Intersect
                                                              : StepAlignment::Strict;
    const ExperimentLog log = parseExperimentLog(readFile(log_path));
    WarningLog warnings;
    const ProfileCurve curve = sampleEfficiencyCurve(log, algorithm, metric, statistic,
                                                     pooling, config, alignment,
                                                     &warnings);
    printWarnings(warnings);
    writeFile(out_path, emitPlotData(curve));
    return 0;
}

int runTables(const std::string& report_path, const std::string& format_name,
              int precision, const std::string& caption) {
    TableSpec spec;
    spec.format = (format_name == "tex" || format_name == "latex")
                      ? TableFormat::Latex
                      : TableFormat::Markdown;
    spec.precision = precision;
    spec.caption = caption;
    const AggregateReport report = aggregateReportFromJson(readFile(report_path));
    std::cout << renderEnvironmentTable(report, spec);
    return 0;
}

int runCard(const std::string& format_name) {
    const TableFormat format = (format_name == "tex" || format_name == "latex")
                                   ? TableFormat::Latex
                                   : TableFormat::Markdown;
    std::cout << renderReportCard(ReportCard::defaultTemplate(), format);
    return 0;
}

int runPlot(const std::vector<std::string>& csv_paths, const std::string& out_path,
            const std::string& title, const std::string& x_label,
            const std::string& y_label) {
    std::vector<ProfileCurve> curves;
    curves.reserve(csv_paths.size());
    for (const std::string& path : csv_paths) {
        const std::string label = std::filesystem::path(path).stem().string();
        curves.push_back(
            parsePlotData(readFile(path), CurveKind::SampleEfficiency, label));
    }
    SvgStyle style;
    style.title = title;
    style.x_label = x_label;
    style.y_label = y_label;
    writeFile(out_path, renderSvg(curves, style));
    return 0;
}

int runSynth(const std::string& spec_path, const std::string& out_path) {
    const SynthSpec spec = parseSynthSpec(readFile(spec_path));
    writeFile(out_path, serializeExperimentLog(generateSyntheticLog(spec)));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evaluation toolkit for multi-run, multi-task experiment logs"};
    app.require_subcommand(1);

    // validate
    std::string validate_log;
    bool validate_json = false;
    ConfigOptions validate_config;
    CLI::App* validate = app.add_subcommand(
        "validate", "Check a log against the canonical schema and soft rules");
    validate->add_option("LOG", validate_log, "Experiment-log JSON file")->required();
    validate->add_flag("--json", validate_json, "Emit the report as JSON");
    addConfigFlag(validate, validate_config);

    // lint
    std::string lint_log;
    std::string lint_policy;
    bool lint_json = false;
    ConfigOptions lint_config;
    CLI::App* lint = app.add_subcommand(
        "lint", "Check a log against the evaluation protocol's rules");
    lint->add_option("LOG", lint_log, "Experiment-log JSON file")->required();
    lint->add_option("--policy-class", lint_policy,
                     "JSON file mapping algorithm names to off_policy/on_policy");
    lint->add_flag("--json", lint_json, "Emit the report as JSON");
    addConfigFlag(lint, lint_config);

    // aggregate
    std::string agg_log, agg_metric, agg_out;
    std::string agg_pooling = "global";
    std::string agg_stats = "iqm,optimality_gap";
    ConfigOptions agg_config;
    CLI::App* aggregate = app.add_subcommand(
        "aggregate", "Pooled statistics with bootstrap CIs for every algorithm");
    aggregate->add_option("LOG", agg_log, "Experiment-log JSON file")->required();
    aggregate->add_option("--metric", agg_metric, "Metric to aggregate")->required();
    aggregate->add_option("--pooling", agg_pooling,
                          "Normalisation bounds pooling: absolute_only, "
                          "intervals_only or global");
    aggregate->add_option("--stats", agg_stats,
                          "Comma-separated statistics (iqm, mean, median, "
                          "optimality_gap)");
    aggregate->add_option("--gamma", agg_config.gamma,
                          "Optimality-gap target score");
    aggregate->add_option("--out", agg_out, "Output report JSON path")->required();
    addBootstrapFlags(aggregate, agg_config);
    addConfigFlag(aggregate, agg_config);

    // compare
    std::string cmp_log, cmp_candidate, cmp_baseline, cmp_metric;
    std::string cmp_pooling = "global";
    ConfigOptions cmp_config;
    CLI::App* compare = app.add_subcommand(
        "compare", "Probability that one algorithm improves on another");
    compare->add_option("LOG", cmp_log, "Experiment-log JSON file")->required();
    compare->add_option("--candidate", cmp_candidate, "Candidate algorithm")->required();
    compare->add_option("--baseline", cmp_baseline, "Baseline algorithm")->required();
    compare->add_option("--metric", cmp_metric, "Metric to compare on")->required();
    compare->add_option("--pooling", cmp_pooling,
                        "Normalisation bounds pooling: absolute_only, "
                        "intervals_only or global");
    addBootstrapFlags(compare, cmp_config);
    addConfigFlag(compare, cmp_config);

    // profile
    std::string prof_log, prof_metric, prof_out;
    std::string prof_pooling = "global";
    std::vector<std::string> prof_algorithms;
    std::size_t prof_tau_points = 101;
    ConfigOptions prof_config;
    CLI::App* profile = app.add_subcommand(
        "profile", "Performance-profile curve(s) as CSV plot data");
    profile->add_option("LOG", prof_log, "Experiment-log JSON file")->required();
    profile->add_option("--metric", prof_metric, "Metric to profile")->required();
    profile->add_option("--algorithm", prof_algorithms,
                        "Algorithm to profile (repeatable; default: all)");
    profile->add_option("--tau-points", prof_tau_points,
                        "Number of evenly spaced thresholds over [0, 1]");
    profile->add_option("--pooling", prof_pooling,
                        "Normalisation bounds pooling: absolute_only, "
                        "intervals_only or global");
    profile->add_option("--out", prof_out,
                        "Output CSV path (multi-algorithm runs write "
                        "<stem>.<algorithm>.csv)")
        ->required();
    addBootstrapFlags(profile, prof_config);
    addConfigFlag(profile, prof_config);

    // curves
    std::string curves_log, curves_algorithm, curves_metric, curves_out;
    std::string curves_statistic = "iqm";
    std::string curves_align = "strict";
    std::string curves_pooling = "global";
    ConfigOptions curves_config;
    CLI::App* curves = app.add_subcommand(
        "curves", "Sample-efficiency curve over training steps as CSV plot data");
    curves->add_option("LOG", curves_log, "Experiment-log JSON file")->required();
    curves->add_option("--algorithm", curves_algorithm, "Algorithm to trace")
        ->required();
    curves->add_option("--metric", curves_metric, "Metric to trace")->required();
    curves->add_option("--statistic", curves_statistic, "Per-step statistic")
        ->check(CLI::IsMember({"iqm", "mean"}));
    curves->add_option("--align", curves_align,
                       "Step-grid handling across tasks: strict or intersect")
        ->check(CLI::IsMember({"strict", "intersect"}));
    curves->add_option("--pooling", curves_pooling,
                       "Normalisation bounds pooling: absolute_only, "
                       "intervals_only or global");
    curves->add_option("--out", curves_out, "Output CSV path")->required();
    addBootstrapFlags(curves, curves_config);
    addConfigFlag(curves, curves_config);

    // tables
    std::string tables_report;
    std::string tables_format = "md";
    std::string tables_caption;
    int tables_precision = 3;
    CLI::App* tables = app.add_subcommand(
        "tables", "Render an aggregate report as a markdown or LaTeX table");
    tables->add_option("REPORT", tables_report, "Aggregate-report JSON file")
        ->required();
    tables->add_option("--format", tables_format, "Table format")
        ->check(CLI::IsMember({"md", "tex", "markdown", "latex"}));
    tables->add_option("--precision", tables_precision, "Decimal places per cell");
    tables->add_option("--caption", tables_caption, "Optional table caption");

    // card
    std::string card_format = "md";
    CLI::App* card = app.add_subcommand(
        "card", "Print the blank experiment report-card template");
    card->add_option("--format", card_format, "Card format")
        ->check(CLI::IsMember({"md", "tex", "markdown", "latex"}));

    // plot
    std::vector<std::string> plot_csvs;
    std::string plot_out, plot_title, plot_x_label, plot_y_label;
    CLI::App* plot = app.add_subcommand(
        "plot", "Render one or more CSV curves into a single SVG");
    plot->add_option("CSV", plot_csvs, "Curve CSV files (labels from file stems)")
        ->required();
    plot->add_option("--out", plot_out, "Output SVG path")->required();
    plot->add_option("--title", plot_title, "Plot title");
    plot->add_option("--x-label", plot_x_label, "X-axis label");
    plot->add_option("--y-label", plot_y_label, "Y-axis label");

    // synth
    std::string synth_spec, synth_out;
    CLI::App* synth = app.add_subcommand(
        "synth", "Generate a deterministic synthetic experiment log");
    synth->add_option("--spec", synth_spec, "Synthetic-experiment spec JSON")
        ->required();
    synth->add_option("--out", synth_out, "Output log JSON path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& error) {
        const int code = app.exit(error);
        return code == 0 ? 0 : 2;
    }

    try {
        if (validate->parsed()) {
            return runValidate(validate_log, validate_json, validate_config);
        }
        if (lint->parsed()) {
            return runLint(lint_log, lint_policy, lint_json, lint_config);
        }
        if (aggregate->parsed()) {
            return runAggregate(agg_log, agg_metric, agg_pooling, agg_stats, agg_out,
                                agg_config);
        }
        if (compare->parsed()) {
            return runCompare(cmp_log, cmp_candidate, cmp_baseline, cmp_metric,
                              cmp_pooling, cmp_config);
        }
        if (profile->parsed()) {
            return runProfile(prof_log, prof_metric, prof_algorithms, prof_pooling,
                              prof_tau_points, prof_out, prof_config);
        }
        if (curves->parsed()) {
            return runCurves(curves_log, curves_algorithm, curves_metric,
                             curves_statistic, curves_align, curves_pooling,
                             curves_out, curves_config);
        }
        if (tables->parsed()) {
            return runTables(tables_report, tables_format, tables_precision,
                             tables_caption);
        }
        if (card->parsed()) return runCard(card_format);
        if (plot->parsed()) {
            return runPlot(plot_csvs, plot_out, plot_title, plot_x_label,
                           plot_y_label);
        }
        if (synth->parsed()) return runSynth(synth_spec, synth_out);
    } catch (const IoError& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 2;
    } catch (const Error& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }
    return 2;  // unreachable: require_subcommand(1) guarantees a match
}
