#include "scenegen/svg.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace scenegen {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kMargin = 56.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string Fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

std::string Header(const std::string& title) {
  std::ostringstream ss;
  ss << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
     << "\" height=\"" << kHeight << "\" font-family=\"sans-serif\" "
     << "font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
     << "font-size=\"15\">" << Escape(title) << "</text>\n";
  return ss.str();
}

}  // namespace

std::vector<double> CsvTable::Column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw std::invalid_argument("no column named " + name);
  }
  const size_t idx = static_cast<size_t>(it - header.begin());
  std::vector<double> out;
  for (const auto& row : rows) {
    out.push_back(idx < row.size() ? row[idx]
                                   : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

CsvTable ReadCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line) || line.empty()) {
    throw std::runtime_error(path + " is empty");
  }
  t.header = SplitCsvLine(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const std::string& cell : SplitCsvLine(line)) {
      try {
        size_t used = 0;
        const double v = std::stod(cell, &used);
        row.push_back(used == cell.size()
                          ? v
                          : std::numeric_limits<double>::quiet_NaN());
      } catch (const std::exception&) {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (t.rows.empty()) throw std::runtime_error(path + " has no data rows");
  return t;
}

std::string LineChartSvg(const std::string& title, const std::string& x_label,
                         const std::vector<Series>& series) {
  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -x0;
  double y0 = x0;
  double y1 = -x0;
  for (const Series& s : series) {
    for (size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) {
    x0 = 0.0;
    x1 = 1.0;
    y0 = 0.0;
    y1 = 1.0;
  }
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) y1 = y0 + 1.0;
  const double pw = kWidth - 2 * kMargin;
  const double ph = kHeight - 2 * kMargin;
  auto px = [&](double x) { return kMargin + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kHeight - kMargin - (y - y0) / (y1 - y0) * ph; };

  std::ostringstream ss;
  ss << Header(title);
  ss << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << pw
     << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#333\"/>\n";
  ss << "<text x=\"" << kMargin << "\" y=\"" << kHeight - kMargin + 16
     << "\">" << Fmt(x0) << "</text>\n";
  ss << "<text x=\"" << kWidth - kMargin << "\" y=\"" << kHeight - kMargin + 16
     << "\" text-anchor=\"end\">" << Fmt(x1) << "</text>\n";
  ss << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12
     << "\" text-anchor=\"middle\">" << Escape(x_label) << "</text>\n";
  ss << "<text x=\"" << kMargin - 4 << "\" y=\"" << kHeight - kMargin
     << "\" text-anchor=\"end\">" << Fmt(y0) << "</text>\n";
  ss << "<text x=\"" << kMargin - 4 << "\" y=\"" << kMargin + 10
     << "\" text-anchor=\"end\">" << Fmt(y1) << "</text>\n";
  for (size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    ss << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      ss << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    ss << "\"/>\n";
    ss << "<text x=\"" << kWidth - kMargin - 4 << "\" y=\""
       << kMargin + 16 + 14 * static_cast<double>(k)
       << "\" text-anchor=\"end\" fill=\"" << color << "\">" << Escape(s.name)
       << "</text>\n";
  }
  ss << "</svg>\n";
  return ss.str();
}

std::string BarChartSvg(const std::string& title,
                        const std::vector<std::string>& labels,
                        const std::vector<double>& values) {
  if (labels.size() != values.size()) {
    throw std::invalid_argument("bar labels and values differ in length");
  }
  double top = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) top = std::max(top, v);
  }
  if (top <= 0.0) top = 1.0;
  const double pw = kWidth - 2 * kMargin;
  const double ph = kHeight - 2 * kMargin;
  const double slot = values.empty() ? pw : pw / static_cast<double>(values.size());
  std::ostringstream ss;
  ss << Header(title);
  ss << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\""
     << kWidth - kMargin << "\" y2=\"" << kHeight - kMargin
     << "\" stroke=\"#333\"/>\n";
  for (size_t i = 0; i < values.size(); ++i) {
    const double v = std::isfinite(values[i]) ? std::max(0.0, values[i]) : 0.0;
    const double h = v / top * ph;
    const double x = kMargin + slot * static_cast<double>(i) + slot * 0.15;
    ss << "<rect x=\"" << x << "\" y=\"" << kHeight - kMargin - h
       << "\" width=\"" << slot * 0.7 << "\" height=\"" << h << "\" fill=\""
       << kPalette[i % std::size(kPalette)] << "\"/>\n";
    ss << "<text x=\"" << x + slot * 0.35 << "\" y=\""
       << kHeight - kMargin - h - 4 << "\" text-anchor=\"middle\">"
       << Fmt(values[i]) << "</text>\n";
    ss << "<text x=\"" << x + slot * 0.35 << "\" y=\"" << kHeight - kMargin + 16
       << "\" text-anchor=\"middle\">" << Escape(labels[i]) << "</text>\n";
  }
  ss << "</svg>\n";
  return ss.str();
}

std::string HeatmapSvg(const std::string& title,
                       const std::vector<std::string>& row_labels,
                       const std::vector<std::string>& col_labels,
                       const std::vector<std::vector<double>>& values) {
  if (values.size() != row_labels.size()) {
    throw std::invalid_argument("heatmap rows and labels differ in length");
  }
  for (const auto& row : values) {
    if (row.size() != col_labels.size()) {
      throw std::invalid_argument("heatmap columns and labels differ in length");
    }
  }
  const double pw = kWidth - 2 * kMargin;
  const double ph = kHeight - 2 * kMargin;
  const double cw = col_labels.empty() ? pw : pw / static_cast<double>(col_labels.size());
  const double ch = row_labels.empty() ? ph : ph / static_cast<double>(row_labels.size());
  std::ostringstream ss;
  ss << Header(title);
  for (size_t i = 0; i < values.size(); ++i) {
    const double y = kHeight - kMargin - ch * static_cast<double>(i + 1);
    for (size_t j = 0; j < values[i].size(); ++j) {
      const double v = std::clamp(values[i][j], 0.0, 1.0);
      const int shade = static_cast<int>(std::lround(255.0 * (1.0 - v)));
      const double x = kMargin + cw * static_cast<double>(j);
      ss << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cw
         << "\" height=\"" << ch << "\" fill=\"rgb(" << shade << ',' << shade
         << ",255)\"/>\n";
      ss << "<text x=\"" << x + cw / 2 << "\" y=\"" << y + ch / 2 + 4
         << "\" text-anchor=\"middle\" font-size=\"9\">" << Fmt(values[i][j])
         << "</text>\n";
    }
    ss << "<text x=\"" << kMargin - 4 << "\" y=\"" << y + ch / 2 + 4
       << "\" text-anchor=\"end\">" << Escape(row_labels[i]) << "</text>\n";
  }
  for (size_t j = 0; j < col_labels.size(); ++j) {
    ss << "<text x=\"" << kMargin + cw * (static_cast<double>(j) + 0.5)
       << "\" y=\"" << kHeight - kMargin + 16 << "\" text-anchor=\"middle\">"
       << Escape(col_labels[j]) << "</text>\n";
  }
  ss << "</svg>\n";
  return ss.str();
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace scenegen
