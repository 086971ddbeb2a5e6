#include "nadv/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "nadv/report.hpp"

namespace nadv {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string open_svg(const PlotGeometry& g, const std::string& title) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!-- nadv-plot v1 -->\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(g.width) + "\" height=\"" + fmt(g.height) +
         "\" viewBox=\"0 0 " + fmt(g.width) + " " + fmt(g.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n"
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<text x=\"" + fmt(g.width / 2) +
         "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" + escape(title) + "</text>\n";
}

std::string y_axis(const PlotGeometry& g, const std::string& label, double y_max) {
  const double x0 = g.left, x1 = g.width - g.right, y0 = g.height - g.bottom;
  std::string out = "<line x1=\"" + fmt(x0) + "\" y1=\"" + fmt(g.top) + "\" x2=\"" + fmt(x0) + "\" y2=\"" + fmt(y0) +
                    "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = y_max * i / 4.0;
    const double y = g.y_of(v / y_max);
    out += "<line x1=\"" + fmt(x0) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(x1) + "\" y2=\"" + fmt(y) +
           "\" stroke=\"#dddddd\"/>\n<text x=\"" + fmt(x0 - 6) + "\" y=\"" + fmt(y + 4) + "\" text-anchor=\"end\">" +
           fmt(v) + "</text>\n";
  }
  out += "<text x=\"15\" y=\"" + fmt((g.top + y0) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 15 " +
         fmt((g.top + y0) / 2) + ")\">" + escape(label) + "</text>\n";
  return out;
}

std::string share_chart(const ExperimentReport& report, const PlotGeometry& g) {
  int r_max = 0;
  std::set<std::string> arms, costs;
  for (const auto& s : report.summaries) {
    r_max = std::max(r_max, s.r_max);
    arms.insert(s.arm);
    costs.insert(s.cost);
  }
  std::string out = open_svg(g, report.kind + " (seed " + std::to_string(report.seed) + ")");
  out += y_axis(g, "non-adversarial share", 1.0);
  const double y0 = g.height - g.bottom;
  out += "<line x1=\"" + fmt(g.left) + "\" y1=\"" + fmt(y0) + "\" x2=\"" + fmt(g.width - g.right) + "\" y2=\"" +
         fmt(y0) + "\" stroke=\"black\"/>\n";
  for (int r = 0; r <= r_max; ++r)
    out += "<text x=\"" + fmt(g.x_of(r, r_max)) + "\" y=\"" + fmt(y0 + 16) + "\" text-anchor=\"middle\">" +
           std::to_string(r) + "</text>\n";
  out += "<text x=\"" + fmt((g.left + g.width - g.right) / 2) + "\" y=\"" + fmt(g.height - 12) +
         "\" text-anchor=\"middle\">retries r</text>\n";

  std::size_t index = 0;
  for (const auto& s : report.summaries) {
    const char* colour = kPalette[index % std::size(kPalette)];
    const char* dash = index >= std::size(kPalette) ? " stroke-dasharray=\"5,3\"" : "";
    std::string label = s.method;
    if (costs.size() > 1) label += " / " + s.cost;
    if (arms.size() > 1) label = s.arm + ": " + label;
    std::string points;
    for (std::size_t r = 0; r < s.share.size(); ++r) {
      if (std::isnan(s.share[r])) continue;
      if (!points.empty()) points += " ";
      points += fmt(g.x_of(static_cast<double>(r), r_max)) + "," + fmt(g.y_of(s.share[r]));
    }
    out += "<polyline class=\"series\" data-label=\"" + escape(label) + "\" fill=\"none\" stroke=\"" + colour +
           "\" stroke-width=\"2\"" + dash + " points=\"" + points + "\"/>\n";
    const double ly = g.top + 14.0 * static_cast<double>(index);
    const double lx = g.width - g.right + 12;
    out += "<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(ly) + "\" x2=\"" + fmt(lx + 18) + "\" y2=\"" + fmt(ly) +
           "\" stroke=\"" + colour + "\" stroke-width=\"2\"" + dash + "/>\n<text x=\"" + fmt(lx + 24) + "\" y=\"" +
           fmt(ly + 4) + "\" font-size=\"10\">" + escape(label) + "</text>\n";
    ++index;
  }
  return out + "</svg>\n";
}

std::string theorem_chart(const ExperimentReport& report, const PlotGeometry& g) {
  const TheoremReport& t = *report.theorem;
  std::vector<std::pair<std::string, double>> bars{{"optimal", t.expected_nadv_optimal},
                                                   {"identity", t.expected_nadv_identity}};
  if (!t.expected_nadv_random.empty()) bars.emplace_back("random p95", t.random_p95);
  double y_max = 0.0;
  for (const auto& [_, v] : bars)
    if (std::isfinite(v)) y_max = std::max(y_max, v);
  y_max = y_max > 0.0 ? std::ceil(y_max * 4.0) / 4.0 : 1.0;

  std::string out = open_svg(g, "theorem: expected NADV_" + to_string(t.p) + " over " + std::to_string(t.trials) +
                                    " trials");
  out += y_axis(g, "expected NADV", y_max);
  const double plot_w = g.width - g.right - g.left;
  const double slot = plot_w / static_cast<double>(bars.size());
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double v = std::isfinite(bars[i].second) ? bars[i].second : 0.0;
    const double x = g.left + slot * (static_cast<double>(i) + 0.2);
    const double y = g.y_of(v / y_max);
    out += "<rect class=\"bar\" data-label=\"" + escape(bars[i].first) + "\" x=\"" + fmt(x) + "\" y=\"" + fmt(y) +
           "\" width=\"" + fmt(slot * 0.6) + "\" height=\"" + fmt(g.height - g.bottom - y) + "\" fill=\"" +
           kPalette[i] + "\"/>\n<text x=\"" + fmt(x + slot * 0.3) + "\" y=\"" + fmt(g.height - g.bottom + 16) +
           "\" text-anchor=\"middle\">" + escape(bars[i].first) + "</text>\n";
  }
  return out + "</svg>\n";
}

}  // namespace

double PlotGeometry::x_of(double r, int r_max) const {
  const double span = width - right - left;
  return r_max == 0 ? left + span / 2.0 : left + span * r / r_max;
}

double PlotGeometry::y_of(double share) const { return height - bottom - (height - bottom - top) * share; }

std::string render_svg(const ExperimentReport& report, const PlotGeometry& geometry) {
  if (report.theorem) return theorem_chart(report, geometry);
  if (report.summaries.empty()) throw Error("cannot plot an empty report");
  return share_chart(report, geometry);
}

std::vector<std::string> render_plots(const std::vector<std::string>& report_paths, const std::string& output_dir) {
  if (report_paths.empty()) throw Error("no report files given");
  std::vector<std::string> written;
  for (const auto& path : report_paths) {
    const ExperimentReport report = read_report(path);
    const std::string out = (std::filesystem::path(output_dir) / std::filesystem::path(path).stem()).string() + ".svg";
    write_text_file(out, render_svg(report));
    written.push_back(out);
  }
  return written;
}

}  // namespace nadv
