#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "marleval/report.hpp"
#include "marleval/rng.hpp"
#include "support.hpp"

using namespace marleval;

namespace {

PointEstimate estimate(double point, double lower, double upper) {
    return PointEstimate{
        point, ConfidenceInterval(lower, upper, 0.95, CiMethod::StratifiedBootstrap)};
}

ProfileCurve sampleCurve(const std::string& label, double offset = 0.0) {
    std::vector<double> xs{0.0, 10'000.0, 20'000.0};
    std::vector<CurvePoint> points;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = offset + 0.1 * static_cast<double>(i + 1);
        points.push_back(
            {e, ConfidenceInterval(e - 0.05, e + 0.05, 0.95,
                                   CiMethod::StratifiedBootstrap)});
    }
    return ProfileCurve(CurveKind::SampleEfficiency, label, std::move(xs),
                        std::move(points));
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("numbers render at fixed precision") {
    CHECK(formatNumber(0.548, 3) == "0.548");
    CHECK(formatNumber(1.0, 3) == "1.000");
    CHECK(formatNumber(0.25, 1) == "0.2");  // round-half-to-even
    CHECK(formatNumber(-0.5, 2) == "-0.50");
    CHECK(formatNumber(2.0, 0) == "2");
    CHECK_THROWS_AS(formatNumber(std::nan(""), 3), InvariantViolation);
    CHECK_THROWS_AS(formatNumber(1.0, -1), InvariantViolation);
}

TEST_CASE("cells render as point and interval") {
    CHECK(formatCell(estimate(0.548, 0.254, 0.842), 3) == "0.548 (0.254, 0.842)");
    CHECK(formatCell(estimate(0.593, 0.189, 0.949), 3) == "0.593 (0.189, 0.949)");
    CHECK(formatCell(estimate(0.5, 0.25, 0.75), 2) == "0.50 (0.25, 0.75)");
}

TEST_CASE("task tables line up algorithms against tasks") {
    std::map<std::string, std::map<TaskId, PointEstimate>> scores;
    const TaskId t1{"env_a", "task_1"};
    const TaskId t2{"env_a", "task_2"};
    scores["vdn"][t1] = estimate(0.548, 0.254, 0.842);
    scores["vdn"][t2] = estimate(0.3, 0.2, 0.4);
    scores["qmix"][t1] = estimate(0.593, 0.189, 0.949);
    scores["qmix"][t2] = estimate(0.35, 0.25, 0.45);

    SUBCASE("markdown") {
        TableSpec spec;  // markdown, precision 3
        const std::string table = renderTaskTable(scores, spec);
        CHECK(table.find("| task | qmix | vdn |") != std::string::npos);
        CHECK(table.find("| --- | --- | --- |") != std::string::npos);
        CHECK(table.find("| env_a/task_1 | 0.593 (0.189, 0.949) | 0.548 (0.254, 0.842) |") !=
              std::string::npos);
    }
    SUBCASE("latex") {
        TableSpec spec;
        spec.format = TableFormat::Latex;
        spec.caption = "Absolute scores";
        const std::string table = renderTaskTable(scores, spec);
        CHECK(table.find("\\begin{tabular}") != std::string::npos);
        CHECK(table.find("\\caption{Absolute scores}") != std::string::npos);
        CHECK(table.find("0.593 (0.189, 0.949)") != std::string::npos);
        CHECK(table.find(" & ") != std::string::npos);
        CHECK(table.find("\\\\") != std::string::npos);
    }
    SUBCASE("precision flows through") {
        TableSpec spec;
        spec.precision = 1;
        const std::string table = renderTaskTable(scores, spec);
        CHECK(table.find("0.5 (0.3, 0.8)") != std::string::npos);
    }
}

TEST_CASE("task tables reject unusable inputs") {
    TableSpec spec;
    CHECK_THROWS_AS(renderTaskTable({}, spec), EmptyInput);

    std::map<std::string, std::map<TaskId, PointEstimate>> ragged;
    ragged["a"][TaskId{"e", "t1"}] = estimate(0.5, 0.4, 0.6);
    ragged["b"][TaskId{"e", "t2"}] = estimate(0.5, 0.4, 0.6);
    CHECK_THROWS_AS(renderTaskTable(ragged, spec), TaskListMismatch);
}

TEST_CASE("environment tables put statistics in columns") {
    rng::Stream stream(rng::deriveKey(41, "report.envtable"));
    std::map<std::string, EvalMatrix> matrices;
    matrices.emplace("alg_a", testsupport::randomMatrix(stream, 5, 3, "alg_a"));
    matrices.emplace("alg_b", testsupport::randomMatrix(stream, 5, 3, "alg_b"));
    ProtocolConfig config;
    config.bootstrap_replicates = 100;
    const AggregateReport report = aggregateScores(
        matrices, {Statistic::Iqm, Statistic::OptimalityGap}, config);

    TableSpec spec;
    const std::string table = renderEnvironmentTable(report, spec);
    CHECK(table.find("| algorithm | iqm | optimality_gap |") != std::string::npos);
    CHECK(table.find("| alg_a | ") != std::string::npos);
    CHECK(table.find("| alg_b | ") != std::string::npos);

    spec.format = TableFormat::Latex;
    const std::string tex = renderEnvironmentTable(report, spec);
    CHECK(tex.find("\\begin{tabular}") != std::string::npos);
    CHECK(tex.find("alg\\_a") != std::string::npos);  // underscore escaped
}

TEST_CASE("table format names round-trip") {
    CHECK(tableFormatFromString("markdown") == TableFormat::Markdown);
    CHECK(tableFormatFromString("latex") == TableFormat::Latex);
    CHECK(toString(TableFormat::Markdown) == "markdown");
    CHECK(toString(TableFormat::Latex) == "latex");
    CHECK_THROWS_AS(tableFormatFromString("html"), SchemaViolation);
}

TEST_CASE("the report-card template covers the reproducibility checklist") {
    const ReportCard card = ReportCard::defaultTemplate();
    const std::vector<std::string> titles{
        "Hyperparameters",       "Code-level optimisations",
        "Computational resources", "Evaluation protocol",
        "Framework",             "Environment settings"};
    REQUIRE(card.sections().size() == titles.size());
    for (std::size_t i = 0; i < titles.size(); ++i) {
        CHECK(card.sections()[i].title == titles[i]);
        CHECK(!card.sections()[i].fields.empty());
        for (const auto& field : card.sections()[i].fields) {
            CHECK(field.value.empty());  // template starts unset
        }
    }
}

TEST_CASE("setting fields fills known names and collects unknown ones") {
    ReportCard card = ReportCard::defaultTemplate();
    card.set("Discount factor", "0.99");
    card.set("Learning rate", "3e-4");
    card.set("Lab rack id", "B-12");  // not part of the template

    bool found = false;
    for (const auto& section : card.sections()) {
        for (const auto& field : section.fields) {
            if (field.name == "Discount factor") {
                CHECK(field.value == "0.99");
                found = true;
            }
        }
    }
    CHECK(found);
    CHECK(card.sections().back().title == "Additional");
    CHECK(card.sections().back().fields.back() == ReportField{"Lab rack id", "B-12"});
}

TEST_CASE("report cards render to markdown and latex") {
    ReportCard card = ReportCard::defaultTemplate();
    card.set("Discount factor", "0.99");

    const std::string md = renderReportCard(card, TableFormat::Markdown);
    CHECK(md.rfind("# Experiment report", 0) == 0);
    CHECK(md.find("## Hyperparameters") != std::string::npos);
    CHECK(md.find("- **Discount factor**: 0.99") != std::string::npos);
    CHECK(md.find("- **Batch size**: n/a") != std::string::npos);

    const std::string tex = renderReportCard(card, TableFormat::Latex);
    CHECK(tex.find("\\subsection*{Hyperparameters}") != std::string::npos);
    CHECK(tex.find("\\begin{itemize}") != std::string::npos);
    CHECK(tex.find("Discount factor") != std::string::npos);
}

TEST_CASE("report cards reject malformed structure") {
    CHECK_THROWS_AS(ReportCard({ReportSection{"", {}}}), InvariantViolation);
    CHECK_THROWS_AS(
        ReportCard({ReportSection{"S", {ReportField{"a", ""}, ReportField{"a", ""}}}}),
        InvariantViolation);
    CHECK_THROWS_AS(ReportCard({ReportSection{"S", {ReportField{"", ""}}}}),
                    InvariantViolation);
}

TEST_CASE("plot data round-trips through csv exactly") {
    const ProfileCurve curve = sampleCurve("alg_a");
    const std::string csv = emitPlotData(curve);
    CHECK(csv.rfind("x,estimate,ci_lower,ci_upper\n", 0) == 0);

    const ProfileCurve parsed = parsePlotData(csv, curve.kind(), curve.label());
    CHECK(parsed.xs() == curve.xs());
    REQUIRE(parsed.points().size() == curve.points().size());
    for (std::size_t i = 0; i < parsed.points().size(); ++i) {
        CHECK(parsed.points()[i].estimate == curve.points()[i].estimate);
        CHECK(parsed.points()[i].ci.lower() == curve.points()[i].ci.lower());
        CHECK(parsed.points()[i].ci.upper() == curve.points()[i].ci.upper());
    }

    // Values that need many digits survive the trip bit for bit.
    std::vector<double> xs{0.1, 1.0 / 3.0};
    std::vector<CurvePoint> points{
        {0.12345678901234567,
         ConfidenceInterval(0.1, 0.2, 0.95, CiMethod::StratifiedBootstrap)},
        {0.1, ConfidenceInterval(0.0999999999999999, 0.1000000000000001, 0.95,
                                 CiMethod::StratifiedBootstrap)}};
    const ProfileCurve awkward(CurveKind::SampleEfficiency, "x", xs, points);
    const ProfileCurve rebuilt =
        parsePlotData(emitPlotData(awkward), CurveKind::SampleEfficiency, "x");
    CHECK(rebuilt.xs() == awkward.xs());
    CHECK(rebuilt.points()[0].estimate == awkward.points()[0].estimate);
    CHECK(rebuilt.points()[1].ci.lower() == awkward.points()[1].ci.lower());
}

TEST_CASE("plot data parsing rejects malformed documents") {
    CHECK_THROWS_AS(parsePlotData("a,b\n1,2\n", CurveKind::SampleEfficiency, "l"),
                    SchemaViolation);
    CHECK_THROWS_AS(
        parsePlotData("x,estimate,ci_lower,ci_upper\n1,2,3\n",
                      CurveKind::SampleEfficiency, "l"),
        SchemaViolation);
    CHECK_THROWS_AS(
        parsePlotData("x,estimate,ci_lower,ci_upper\n1,two,0,1\n",
                      CurveKind::SampleEfficiency, "l"),
        SchemaViolation);
    CHECK_THROWS_AS(parsePlotData("x,estimate,ci_lower,ci_upper\n",
                                  CurveKind::SampleEfficiency, "l"),
                    EmptyInput);
}

TEST_CASE("svg plots are self-contained and deterministic") {
    const std::vector<ProfileCurve> curves{sampleCurve("alg_a"),
                                           sampleCurve("a&b", 0.3)};
    SvgStyle style;
    style.title = "Sample efficiency";
    style.x_label = "steps";
    style.y_label = "score";
    const std::string svg = renderSvg(curves, style);

    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>\n") == svg.size() - 7);
    // One confidence band and one line per curve.
    CHECK(std::count(svg.begin(), svg.end(), '\n') > 10);
    std::size_t polylines = 0, polygons = 0, pos = 0;
    while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
        ++polylines;
        ++pos;
    }
    pos = 0;
    while ((pos = svg.find("<polygon", pos)) != std::string::npos) {
        ++polygons;
        ++pos;
    }
    CHECK(polylines == curves.size());
    CHECK(polygons == curves.size());
    // Legend labels are XML-escaped.
    CHECK(svg.find("a&amp;b") != std::string::npos);
    CHECK(svg.find(">a&b<") == std::string::npos);
    CHECK(svg.find("Sample efficiency") != std::string::npos);

    CHECK(renderSvg(curves, style) == svg);
}

TEST_CASE("svg plots reject unusable input") {
    SvgStyle style;
    CHECK_THROWS_AS(renderSvg({}, style), EmptyInput);

    const std::vector<ProfileCurve> mixed{
        sampleCurve("a"),
        ProfileCurve(CurveKind::PerformanceProfile, "p", {0.0, 1.0},
                     {{1.0, {}}, {0.0, {}}})};
    CHECK_THROWS_AS(renderSvg(mixed, style), MixedCurveKinds);

    SvgStyle tiny;
    tiny.width = 100;
    tiny.height = 100;
    CHECK_THROWS_AS(renderSvg({sampleCurve("a")}, tiny), InvariantViolation);
}

}  // TEST_SUITE
