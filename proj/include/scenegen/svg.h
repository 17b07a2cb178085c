#ifndef SCENEGEN_SVG_H_
#define SCENEGEN_SVG_H_

#include <string>
#include <vector>

namespace scenegen {

// Numeric CSV with a header row. Non-numeric cells read as NaN.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  // Throws std::invalid_argument for an unknown column.
  std::vector<double> Column(const std::string& name) const;
};

// Throws std::runtime_error if the file is missing, empty or has no rows.
CsvTable ReadCsv(const std::string& path);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

std::string LineChartSvg(const std::string& title, const std::string& x_label,
                         const std::vector<Series>& series);

std::string BarChartSvg(const std::string& title,
                        const std::vector<std::string>& labels,
                        const std::vector<double>& values);

// values[i][j] in [0, 1]; row i is drawn bottom-up.
std::string HeatmapSvg(const std::string& title,
                       const std::vector<std::string>& row_labels,
                       const std::vector<std::string>& col_labels,
                       const std::vector<std::vector<double>>& values);

void WriteTextFile(const std::string& path, const std::string& text);

}  // namespace scenegen

#endif  // SCENEGEN_SVG_H_
