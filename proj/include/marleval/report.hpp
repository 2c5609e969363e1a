#pragma once

#include <map>
#include <string>
#include <vector>

#include "marleval/aggregate.hpp"
#include "marleval/compare.hpp"
#include "marleval/errors.hpp"
#include "marleval/model.hpp"

namespace marleval {

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

enum class TableFormat { Markdown, Latex };

std::string toString(TableFormat format);
TableFormat tableFormatFromString(const std::string& text);

struct TableSpec {
    TableFormat format = TableFormat::Markdown;
    int precision = 3;
    std::string caption;
};

// Fixed-precision decimal rendering ("0.548"); used for every number that
// appears in a human-facing table so output is reproducible byte for byte.
std::string formatNumber(double value, int precision);

// Renders "point (lower, upper)" at the requested precision.
std::string formatCell(const PointEstimate& estimate, int precision);

// One row per task, one column per algorithm.  Every algorithm must report
// the same task set; tasks and algorithms are ordered lexicographically.
std::string renderTaskTable(
    const std::map<std::string, std::map<TaskId, PointEstimate>>& scores,
    const TableSpec& spec);

// One row per algorithm, one column per aggregate statistic.
std::string renderEnvironmentTable(const AggregateReport& report,
                                   const TableSpec& spec);

// ---------------------------------------------------------------------------
// Report card
// ---------------------------------------------------------------------------

struct ReportField {
    std::string name;
    std::string value;

    bool operator==(const ReportField&) const = default;
};

struct ReportSection {
    std::string title;
    std::vector<ReportField> fields;

    bool operator==(const ReportSection&) const = default;
};

// A structured experiment report: fixed sections listing the details a
// reader needs to re-run the experiment (hyperparameters, code-level
// optimisations, compute, evaluation protocol, framework, environment).
class ReportCard {
public:
    ReportCard() = default;
    explicit ReportCard(std::vector<ReportSection> sections);

    // The full template with every field present and values unset.
    static ReportCard defaultTemplate();

    // Sets a field by exact name wherever it lives; unknown names are
    // appended to an "Additional" section so nothing is silently dropped.
    void set(const std::string& field, const std::string& value);

    const std::vector<ReportSection>& sections() const { return sections_; }

    bool operator==(const ReportCard&) const = default;

private:
    std::vector<ReportSection> sections_;
};

std::string renderReportCard(const ReportCard& card, TableFormat format);

// ---------------------------------------------------------------------------
// Plot data
// ---------------------------------------------------------------------------

// Writes a curve as CSV with header "x,estimate,ci_lower,ci_upper".  Numbers
// use the shortest representation that round-trips exactly.
std::string emitPlotData(const ProfileCurve& curve);

// Inverse of emitPlotData; the caller supplies the kind and label the CSV
// does not carry.
ProfileCurve parsePlotData(const std::string& csv, CurveKind kind,
                           const std::string& label);

// ---------------------------------------------------------------------------
// SVG plots
// ---------------------------------------------------------------------------

struct SvgStyle {
    int width = 800;
    int height = 480;
    std::string title;
    std::string x_label;
    std::string y_label;
};

// Renders one or more curves of the same kind into a self-contained SVG
// document: shaded confidence bands, one polyline per curve, axes and a
// legend.  Output is deterministic for identical inputs.
std::string renderSvg(const std::vector<ProfileCurve>& curves,
                      const SvgStyle& style);

}  // namespace marleval
