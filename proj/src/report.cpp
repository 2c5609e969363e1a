#include "marleval/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace marleval {

namespace {

// On unset report-card fields and degenerate table cells.
constexpr const char* kUnset = "n/a";

std::string escapeMarkdown(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        if (c == '|') out += "\\|";
        else if (c == '\n') out += ' ';
        else out += c;
    }
    return out;
}

std::string escapeLatex(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '\\': out += "\\textbackslash{}"; break;
            case '&': case '%': case '$': case '#': case '_':
            case '{': case '}':
                out += '\\';
                out += c;
                break;
            case '~': out += "\\textasciitilde{}"; break;
            case '^': out += "\\textasciicircum{}"; break;
            case '\n': out += ' '; break;
            default: out += c;
        }
    }
    return out;
}

std::string escapeCell(const std::string& text, TableFormat format) {
    return format == TableFormat::Markdown ? escapeMarkdown(text) : escapeLatex(text);
}

std::string escapeXml(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// Renders a rectangular table (first row is the header) in either format.
std::string renderGrid(const std::vector<std::vector<std::string>>& rows,
                       const TableSpec& spec) {
    std::ostringstream out;
    if (spec.format == TableFormat::Markdown) {
        if (!spec.caption.empty()) {
            out << "**" << escapeMarkdown(spec.caption) << "**\n\n";
        }
        for (std::size_t r = 0; r < rows.size(); ++r) {
            out << "|";
            for (const auto& cell : rows[r]) out << " " << cell << " |";
            out << "\n";
            if (r == 0) {
                out << "|";
                for (std::size_t c = 0; c < rows[0].size(); ++c) out << " --- |";
                out << "\n";
            }
        }
        return out.str();
    }

    const bool with_float = !spec.caption.empty();
    if (with_float) {
        out << "\\begin{table}\n\\centering\n\\caption{" << escapeLatex(spec.caption)
            << "}\n";
    }
    out << "\\begin{tabular}{l";
    for (std::size_t c = 1; c < rows[0].size(); ++c) out << "c";
    out << "}\n\\hline\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            if (c != 0) out << " & ";
            out << rows[r][c];
        }
        out << " \\\\\n";
        if (r == 0) out << "\\hline\n";
    }
    out << "\\hline\n\\end{tabular}\n";
    if (with_float) out << "\\end{table}\n";
    return out.str();
}

void validateTableSpec(const TableSpec& spec) {
    if (spec.precision < 0 || spec.precision > 17) {
        throw InvariantViolation("TableSpec", "precision must be in [0, 17], got " +
                                                  std::to_string(spec.precision));
    }
}

// Shortest decimal representation that parses back to the same double.
std::string shortestDouble(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) {
        throw InvariantViolation("emitPlotData", "failed to format a number");
    }
    return std::string(buf, ptr);
}

double parseDoubleField(const std::string& field, std::size_t line_no) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw SchemaViolation("csv:line " + std::to_string(line_no),
                              "'" + field + "' is not a number");
    }
    return value;
}

}  // namespace

std::string toString(TableFormat format) {
    return format == TableFormat::Markdown ? "markdown" : "latex";
}

TableFormat tableFormatFromString(const std::string& text) {
    if (text == "markdown") return TableFormat::Markdown;
    if (text == "latex") return TableFormat::Latex;
    throw SchemaViolation("table_format", "unknown table format '" + text +
                                              "' (expected markdown or latex)");
}

std::string formatNumber(double value, int precision) {
    if (!std::isfinite(value)) {
        throw InvariantViolation("formatNumber", "value must be finite");
    }
    if (precision < 0 || precision > 17) {
        throw InvariantViolation("formatNumber",
                                 "precision must lie between 0 and 17");
    }
    char buf[64];
    const int written = std::snprintf(buf, sizeof(buf), "%.*f", precision, value);
    if (written < 0 || written >= static_cast<int>(sizeof(buf))) {
        throw InvariantViolation("formatNumber", "value does not fit a table cell");
    }
    return std::string(buf, static_cast<std::size_t>(written));
}

std::string formatCell(const PointEstimate& estimate, int precision) {
    return formatNumber(estimate.point, precision) + " (" +
           formatNumber(estimate.ci.lower(), precision) + ", " +
           formatNumber(estimate.ci.upper(), precision) + ")";
}

std::string renderTaskTable(
    const std::map<std::string, std::map<TaskId, PointEstimate>>& scores,
    const TableSpec& spec) {
    validateTableSpec(spec);
    if (scores.empty()) throw EmptyInput("renderTaskTable: no algorithms");

    const auto& reference = scores.begin()->second;
    if (reference.empty()) throw EmptyInput("renderTaskTable: no tasks");
    for (const auto& [alg, per_task] : scores) {
        if (per_task.size() != reference.size() ||
            !std::equal(per_task.begin(), per_task.end(), reference.begin(),
                        [](const auto& a, const auto& b) { return a.first == b.first; })) {
            throw TaskListMismatch("renderTaskTable: algorithm '" + alg +
                                   "' reports a different task set");
        }
    }

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"task"};
    for (const auto& [alg, per_task] : scores) {
        (void)per_task;
        header.push_back(escapeCell(alg, spec.format));
    }
    rows.push_back(std::move(header));
    for (const auto& [task, unused] : reference) {
        (void)unused;
        std::vector<std::string> row{escapeCell(task.str(), spec.format)};
        for (const auto& [alg, per_task] : scores) {
            (void)alg;
            row.push_back(formatCell(per_task.at(task), spec.precision));
        }
        rows.push_back(std::move(row));
    }
    return renderGrid(rows, spec);
}

std::string renderEnvironmentTable(const AggregateReport& report,
                                   const TableSpec& spec) {
    validateTableSpec(spec);
    if (report.entries.empty()) throw EmptyInput("renderEnvironmentTable: no algorithms");

    const auto& reference = report.entries.begin()->second;
    if (reference.empty()) throw EmptyInput("renderEnvironmentTable: no statistics");
    for (const auto& [alg, stats] : report.entries) {
        if (stats.size() != reference.size() ||
            !std::equal(stats.begin(), stats.end(), reference.begin(),
                        [](const auto& a, const auto& b) { return a.first == b.first; })) {
            throw InvariantViolation("renderEnvironmentTable",
                                     "algorithm '" + alg +
                                         "' reports a different statistic set");
        }
    }

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"algorithm"};
    for (const auto& [name, unused] : reference) {
        (void)unused;
        header.push_back(escapeCell(name, spec.format));
    }
    rows.push_back(std::move(header));
    for (const auto& [alg, stats] : report.entries) {
        std::vector<std::string> row{escapeCell(alg, spec.format)};
        for (const auto& [name, estimate] : stats) {
            (void)name;
            row.push_back(formatCell(estimate, spec.precision));
        }
        rows.push_back(std::move(row));
    }
    return renderGrid(rows, spec);
}

// ---------------------------------------------------------------------------
// Report card
// ---------------------------------------------------------------------------

ReportCard::ReportCard(std::vector<ReportSection> sections)
    : sections_(std::move(sections)) {
    std::set<std::string> seen;
    for (const auto& section : sections_) {
        if (section.title.empty()) {
            throw InvariantViolation("ReportCard", "section titles must be non-empty");
        }
        for (const auto& field : section.fields) {
            if (field.name.empty()) {
                throw InvariantViolation("ReportCard", "field names must be non-empty");
            }
            if (!seen.insert(field.name).second) {
                throw InvariantViolation("ReportCard",
                                         "duplicate field '" + field.name + "'");
            }
        }
    }
}

ReportCard ReportCard::defaultTemplate() {
    std::vector<ReportSection> sections;
    auto section = [&sections](std::string title, std::vector<std::string> names) {
        ReportSection s{std::move(title), {}};
        s.fields.reserve(names.size());
        for (auto& name : names) s.fields.push_back(ReportField{std::move(name), ""});
        sections.push_back(std::move(s));
    };

    section("Hyperparameters",
            {"Discount factor",
             "Batch size",
             "Replay buffer size",
             "Minimum replay buffer size before updating",
             "N steps bootstrapping",
             "Target network update period",
             "Epsilon schedule (decay steps, epsilon start, epsilon min)",
             "Value network architecture",
             "Value network initializer",
             "Value network layer size",
             "Value network layer normalisation",
             "Mixing network (architecture, size, activation)",
             "Hypernetworks (size, activation)",
             "Parameter sharing",
             "Parallel workers",
             "Seed range"});
    section("Code-level optimisations",
            {"Optimiser (type, parameters)",
             "Learning rate",
             "Reward normalisation",
             "Death masking",
             "Clipped updates",
             "Eligibility trace",
             "TD(lambda) value"});
    section("Computational resources",
            {"Average wall-clock time per algorithm",
             "CPUs per experiment",
             "GPU per experiment",
             "RAM per experiment"});
    section("Evaluation protocol",
            {"Total training (timesteps)",
             "Evaluation interval (timesteps)",
             "Independent evaluation episodes",
             "Absolute metric (evaluation episodes, aggregation method)",
             "Local aggregation method",
             "Global aggregation method",
             "Metrics",
             "Exploration behaviour"});
    section("Framework", {"Name (version)"});
    section("Environment settings",
            {"Environment name (version)",
             "Training configs",
             "In sample evaluation configs",
             "Out of sample evaluation configs"});

    return ReportCard(std::move(sections));
}

void ReportCard::set(const std::string& field, const std::string& value) {
    if (field.empty()) {
        throw InvariantViolation("ReportCard", "field names must be non-empty");
    }
    for (auto& section : sections_) {
        for (auto& existing : section.fields) {
            if (existing.name == field) {
                existing.value = value;
                return;
            }
        }
    }
    for (auto& section : sections_) {
        if (section.title == "Additional") {
            section.fields.push_back(ReportField{field, value});
            return;
        }
    }
    sections_.push_back(ReportSection{"Additional", {ReportField{field, value}}});
}

std::string renderReportCard(const ReportCard& card, TableFormat format) {
    std::ostringstream out;
    if (format == TableFormat::Markdown) {
        out << "# Experiment report\n";
        for (const auto& section : card.sections()) {
            out << "\n## " << escapeMarkdown(section.title) << "\n\n";
            for (const auto& field : section.fields) {
                out << "- **" << escapeMarkdown(field.name)
                    << "**: " << (field.value.empty() ? kUnset
                                                      : escapeMarkdown(field.value))
                    << "\n";
            }
        }
        return out.str();
    }

    out << "\\section*{Experiment report}\n";
    for (const auto& section : card.sections()) {
        out << "\\subsection*{" << escapeLatex(section.title) << "}\n"
            << "\\begin{itemize}\n";
        for (const auto& field : section.fields) {
            out << "  \\item \\textbf{" << escapeLatex(field.name) << "}: "
                << (field.value.empty() ? kUnset : escapeLatex(field.value)) << "\n";
        }
        out << "\\end{itemize}\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Plot data
// ---------------------------------------------------------------------------

std::string emitPlotData(const ProfileCurve& curve) {
    std::ostringstream out;
    out << "x,estimate,ci_lower,ci_upper\n";
    for (std::size_t i = 0; i < curve.xs().size(); ++i) {
        const CurvePoint& point = curve.points()[i];
        out << shortestDouble(curve.xs()[i]) << "," << shortestDouble(point.estimate)
            << "," << shortestDouble(point.ci.lower()) << ","
            << shortestDouble(point.ci.upper()) << "\n";
    }
    return out.str();
}

ProfileCurve parsePlotData(const std::string& csv, CurveKind kind,
                           const std::string& label) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line != "x,estimate,ci_lower,ci_upper") {
        throw SchemaViolation("csv:line 1",
                              "expected header 'x,estimate,ci_lower,ci_upper'");
    }

    std::vector<double> xs;
    std::vector<CurvePoint> points;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (fields.size() != 4) {
            throw SchemaViolation("csv:line " + std::to_string(line_no),
                                  "expected 4 comma-separated fields, got " +
                                      std::to_string(fields.size()));
        }
        const double x = parseDoubleField(fields[0], line_no);
        const double estimate = parseDoubleField(fields[1], line_no);
        const double lower = parseDoubleField(fields[2], line_no);
        const double upper = parseDoubleField(fields[3], line_no);
        const CiMethod method =
            (lower == upper) ? CiMethod::Degenerate
            : (kind == CurveKind::IntervalSeries) ? CiMethod::Normal
                                                  : CiMethod::StratifiedBootstrap;
        xs.push_back(x);
        points.push_back(CurvePoint{estimate, ConfidenceInterval(lower, upper, 0.95,
                                                                 method)});
    }
    if (xs.empty()) {
        throw EmptyInput("csv: no data rows after the header");
    }
    return ProfileCurve(kind, label, std::move(xs), std::move(points));
}

// ---------------------------------------------------------------------------
// SVG plots
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kPalette[] = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string coord(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    return std::string(buf);
}

std::string tickLabel(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", value);
    return std::string(buf);
}

}  // namespace

std::string renderSvg(const std::vector<ProfileCurve>& curves, const SvgStyle& style) {
    if (curves.empty()) throw EmptyInput("renderSvg: no curves");
    for (const auto& curve : curves) {
        if (curve.kind() != curves.front().kind()) {
            throw MixedCurveKinds("renderSvg: cannot mix " +
                                  toString(curves.front().kind()) + " with " +
                                  toString(curve.kind()));
        }
        if (curve.xs().empty()) {
            throw EmptyInput("renderSvg: curve '" + curve.label() + "' has no points");
        }
    }
    if (style.width < 320 || style.height < 200) {
        throw InvariantViolation("SvgStyle", "canvas must be at least 320x200");
    }

    double x_min = curves.front().xs().front();
    double x_max = x_min;
    double y_min = curves.front().points().front().ci.lower();
    double y_max = y_min;
    for (const auto& curve : curves) {
        for (std::size_t i = 0; i < curve.xs().size(); ++i) {
            x_min = std::min(x_min, curve.xs()[i]);
            x_max = std::max(x_max, curve.xs()[i]);
            const CurvePoint& p = curve.points()[i];
            y_min = std::min({y_min, p.estimate, p.ci.lower()});
            y_max = std::max({y_max, p.estimate, p.ci.upper()});
        }
    }
    if (x_max == x_min) {
        x_min -= 0.5;
        x_max += 0.5;
    }
    if (y_max == y_min) {
        y_min -= 0.5;
        y_max += 0.5;
    }
    const double y_pad = 0.05 * (y_max - y_min);
    y_min -= y_pad;
    y_max += y_pad;

    const double left = 70.0;
    const double right = static_cast<double>(style.width) - 150.0;
    const double top = 40.0;
    const double bottom = static_cast<double>(style.height) - 50.0;
    auto px = [&](double x) {
        return left + (x - x_min) / (x_max - x_min) * (right - left);
    };
    auto py = [&](double y) {
        return bottom - (y - y_min) / (y_max - y_min) * (bottom - top);
    };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
        << style.width << "\" height=\"" << style.height << "\" viewBox=\"0 0 "
        << style.width << " " << style.height << "\">\n";
    out << "  <rect x=\"0\" y=\"0\" width=\"" << style.width << "\" height=\""
        << style.height << "\" fill=\"#ffffff\"/>\n";
    if (!style.title.empty()) {
        out << "  <text x=\"" << coord((left + right) / 2.0)
            << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"16\">"
            << escapeXml(style.title) << "</text>\n";
    }

    // Confidence bands first so lines draw on top of them.
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const auto& curve = curves[c];
        const char* colour = kPalette[c % kPaletteSize];
        std::ostringstream band;
        for (std::size_t i = 0; i < curve.xs().size(); ++i) {
            band << coord(px(curve.xs()[i])) << ","
                 << coord(py(curve.points()[i].ci.upper())) << " ";
        }
        for (std::size_t i = curve.xs().size(); i-- > 0;) {
            band << coord(px(curve.xs()[i])) << ","
                 << coord(py(curve.points()[i].ci.lower()));
            if (i != 0) band << " ";
        }
        out << "  <polygon points=\"" << band.str() << "\" fill=\"" << colour
            << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    }

    // Axes with ticks and labels.
    out << "  <line x1=\"" << coord(left) << "\" y1=\"" << coord(bottom) << "\" x2=\""
        << coord(right) << "\" y2=\"" << coord(bottom)
        << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
    out << "  <line x1=\"" << coord(left) << "\" y1=\"" << coord(top) << "\" x2=\""
        << coord(left) << "\" y2=\"" << coord(bottom)
        << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = x_min + (x_max - x_min) * i / 4.0;
        const double fy = y_min + (y_max - y_min) * i / 4.0;
        out << "  <line x1=\"" << coord(px(fx)) << "\" y1=\"" << coord(bottom)
            << "\" x2=\"" << coord(px(fx)) << "\" y2=\"" << coord(bottom + 5.0)
            << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
        out << "  <text x=\"" << coord(px(fx)) << "\" y=\"" << coord(bottom + 20.0)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << tickLabel(fx) << "</text>\n";
        out << "  <line x1=\"" << coord(left - 5.0) << "\" y1=\"" << coord(py(fy))
            << "\" x2=\"" << coord(left) << "\" y2=\"" << coord(py(fy))
            << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
        out << "  <text x=\"" << coord(left - 9.0) << "\" y=\"" << coord(py(fy) + 4.0)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << tickLabel(fy) << "</text>\n";
    }
    if (!style.x_label.empty()) {
        out << "  <text x=\"" << coord((left + right) / 2.0) << "\" y=\""
            << coord(static_cast<double>(style.height) - 12.0)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
            << escapeXml(style.x_label) << "</text>\n";
    }
    if (!style.y_label.empty()) {
        out << "  <text x=\"18\" y=\"" << coord((top + bottom) / 2.0)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
               "transform=\"rotate(-90 18 "
            << coord((top + bottom) / 2.0) << ")\">" << escapeXml(style.y_label)
            << "</text>\n";
    }

    // One polyline per curve.
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const auto& curve = curves[c];
        const char* colour = kPalette[c % kPaletteSize];
        std::ostringstream pts;
        for (std::size_t i = 0; i < curve.xs().size(); ++i) {
            pts << coord(px(curve.xs()[i])) << ","
                << coord(py(curve.points()[i].estimate));
            if (i + 1 != curve.xs().size()) pts << " ";
        }
        out << "  <polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\""
            << colour << "\" stroke-width=\"2\"/>\n";
    }

    // Legend down the right margin.
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const char* colour = kPalette[c % kPaletteSize];
        const double ly = top + 8.0 + 22.0 * static_cast<double>(c);
        out << "  <rect x=\"" << coord(right + 12.0) << "\" y=\"" << coord(ly)
            << "\" width=\"14\" height=\"14\" fill=\"" << colour << "\"/>\n";
        out << "  <text x=\"" << coord(right + 32.0) << "\" y=\"" << coord(ly + 11.0)
            << "\" font-family=\"sans-serif\" font-size=\"12\">"
            << escapeXml(curves[c].label()) << "</text>\n";
    }

    out << "</svg>\n";
    return out.str();
}

}  // namespace marleval
