#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace fracsl::cli {

/// Header plus string cells; rows keep their file order.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a named column; raises MissingColumn.
  std::size_t column(const std::string& name) const;
  static CsvTable read(const std::filesystem::path& path);
  static CsvTable parse(const std::string& text);
};

struct PlotSpec {
  std::string kind = "line";  ///< "line" or "heatmap"
  std::string x;
  std::vector<std::string> y;  ///< one polyline per column for kind=line
  std::string z;               ///< heatmap cell value, numeric or categorical
  bool log_x = false;
  bool log_y = false;
  std::string title;

  static PlotSpec from_json(const nlohmann::json& j);
};

std::string render_svg(const CsvTable& table, const PlotSpec& spec);

void plot(const std::filesystem::path& csv_path, const PlotSpec& spec, const std::filesystem::path& svg_path);

}  // namespace fracsl::cli
