#include "fracsl/cli/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "fracsl/error.hpp"

namespace fracsl::cli {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 72.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 52.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
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

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

// Row numbers in messages are 1-based data rows; the header is line 1 of the file.
double cell_value(const CsvTable& t, std::size_t row, std::size_t col, bool positive) {
  double v = 0.0;
  const auto& cell = col < t.rows[row].size() ? t.rows[row][col] : std::string{};
  if (!parse_double(cell, v)) {
    raise(ErrorKind::kEmptyData, "row " + std::to_string(row + 1) + ", column '" + t.header[col] +
                                     "': not a finite number ('" + cell + "')");
  }
  if (positive && !(v > 0.0)) {
    raise(ErrorKind::kEmptyData, "row " + std::to_string(row + 1) + ", column '" + t.header[col] + "': value " +
                                     num(v) + " is not positive on a log axis");
  }
  return v;
}

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;
  double pix_lo = 0.0, pix_hi = 1.0;

  double map(double v) const {
    const double a = log ? std::log10(lo) : lo, b = log ? std::log10(hi) : hi;
    const double s = log ? std::log10(v) : v;
    return pix_lo + (s - a) / (b - a) * (pix_hi - pix_lo);
  }

  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (double e = std::ceil(std::log10(lo) - 1e-12); e <= std::log10(hi) + 1e-12; e += 1.0) {
        out.push_back(std::pow(10.0, e));
      }
      if (out.size() >= 2) return out;
    }
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
      if (m * mag >= raw) {
        step = m * mag;
        break;
      }
    }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) {
      out.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
    }
    return out;
  }
};

Axis make_axis(double lo, double hi, bool log, double pix_lo, double pix_hi) {
  Axis a;
  a.log = log;
  a.pix_lo = pix_lo;
  a.pix_hi = pix_hi;
  if (lo == hi) {
    if (log) {
      lo /= 2.0;
      hi *= 2.0;
    } else {
      const double pad = lo == 0.0 ? 1.0 : 0.5 * std::abs(lo);
      lo -= pad;
      hi += pad;
    }
  }
  a.lo = lo;
  a.hi = hi;
  return a;
}

void draw_axes(std::ostringstream& os, const Axis& ax, const Axis& ay, const std::string& xlabel,
               const std::string& ylabel) {
  const double x0 = ax.pix_lo, x1 = ax.pix_hi, y0 = ay.pix_lo, y1 = ay.pix_hi;
  os << "<path d=\"M" << px(x0) << ' ' << px(y1) << " V" << px(y0) << " H" << px(x1) << "\" fill=\"none\" "
     << "stroke=\"#000\" stroke-width=\"1\"/>\n";
  for (double t : ax.ticks()) {
    const double p = ax.map(t);
    os << "<line x1=\"" << px(p) << "\" y1=\"" << px(y0) << "\" x2=\"" << px(p) << "\" y2=\"" << px(y0 + 5)
       << "\" stroke=\"#000\"/>\n";
    os << "<text x=\"" << px(p) << "\" y=\"" << px(y0 + 18) << "\" text-anchor=\"middle\">" << num(t) << "</text>\n";
  }
  for (double t : ay.ticks()) {
    const double p = ay.map(t);
    os << "<line x1=\"" << px(x0 - 5) << "\" y1=\"" << px(p) << "\" x2=\"" << px(x0) << "\" y2=\"" << px(p)
       << "\" stroke=\"#000\"/>\n";
    os << "<text x=\"" << px(x0 - 8) << "\" y=\"" << px(p + 4) << "\" text-anchor=\"end\">" << num(t) << "</text>\n";
  }
  os << "<text x=\"" << px(0.5 * (x0 + x1)) << "\" y=\"" << px(kHeight - 10) << "\" text-anchor=\"middle\">"
     << escape(xlabel) << (ax.log ? " (log)" : "") << "</text>\n";
  os << "<text x=\"16\" y=\"" << px(0.5 * (y0 + y1)) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << px(0.5 * (y0 + y1)) << ")\">" << escape(ylabel) << (ay.log ? " (log)" : "") << "</text>\n";
}

const std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                             "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string ramp(double s) {
  // dark blue to yellow
  static const std::array<std::array<double, 3>, 4> stops = {
      {{{68, 1, 84}}, {{59, 82, 139}}, {{33, 145, 140}}, {{253, 231, 37}}}};
  s = std::clamp(s, 0.0, 1.0) * 3.0;
  const int i = std::min(2, static_cast<int>(s));
  const double f = s - i;
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(stops[i][0] * (1 - f) + stops[i + 1][0] * f)),
                static_cast<int>(std::lround(stops[i][1] * (1 - f) + stops[i + 1][1] * f)),
                static_cast<int>(std::lround(stops[i][2] * (1 - f) + stops[i + 1][2] * f)));
  return buf;
}

void header(std::ostringstream& os, const std::string& title) {
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(kWidth) << "\" height=\"" << px(kHeight)
     << "\" viewBox=\"0 0 " << px(kWidth) << ' ' << px(kHeight) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  if (!title.empty()) {
    os << "<text x=\"" << px(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
       << "</text>\n";
  }
}

std::string render_line(const CsvTable& t, const PlotSpec& spec) {
  if (spec.y.empty()) raise(ErrorKind::kMissingColumn, "line plot needs at least one y column");
  const std::size_t cx = t.column(spec.x);
  std::vector<std::size_t> cy;
  for (const auto& name : spec.y) cy.push_back(t.column(name));
  const std::size_t n = t.rows.size();
  std::vector<double> xs(n);
  std::vector<std::vector<double>> ys(cy.size(), std::vector<double>(n));
  for (std::size_t r = 0; r < n; ++r) {
    xs[r] = cell_value(t, r, cx, spec.log_x);
    for (std::size_t k = 0; k < cy.size(); ++k) ys[k][r] = cell_value(t, r, cy[k], spec.log_y);
  }
  const auto [xmin, xmax] = std::minmax_element(xs.begin(), xs.end());
  double ymin = ys[0][0], ymax = ys[0][0];
  for (const auto& col : ys) {
    ymin = std::min(ymin, *std::min_element(col.begin(), col.end()));
    ymax = std::max(ymax, *std::max_element(col.begin(), col.end()));
  }
  const double right = cy.size() > 1 ? 140.0 : 20.0;
  const Axis ax = make_axis(*xmin, *xmax, spec.log_x, kLeft, kWidth - right);
  const Axis ay = make_axis(ymin, ymax, spec.log_y, kHeight - kBottom, kTop);

  std::ostringstream os;
  header(os, spec.title);
  draw_axes(os, ax, ay, spec.x, cy.size() == 1 ? spec.y[0] : std::string("value"));
  for (std::size_t k = 0; k < cy.size(); ++k) {
    os << "<polyline fill=\"none\" stroke=\"" << kPalette[k % kPalette.size()] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t r = 0; r < n; ++r) os << (r ? " " : "") << px(ax.map(xs[r])) << ',' << px(ay.map(ys[k][r]));
    os << "\"/>\n";
  }
  if (cy.size() > 1) {
    for (std::size_t k = 0; k < cy.size(); ++k) {
      const double y = kTop + 14.0 * k + 6.0;
      os << "<line x1=\"" << px(kWidth - right + 12) << "\" y1=\"" << px(y) << "\" x2=\"" << px(kWidth - right + 32)
         << "\" y2=\"" << px(y) << "\" stroke=\"" << kPalette[k % kPalette.size()] << "\" stroke-width=\"2\"/>\n";
      os << "<text x=\"" << px(kWidth - right + 36) << "\" y=\"" << px(y + 4) << "\">" << escape(spec.y[k])
         << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

std::string render_heatmap(const CsvTable& t, const PlotSpec& spec) {
  const std::size_t cx = t.column(spec.x);
  if (spec.y.size() != 1) raise(ErrorKind::kMissingColumn, "heatmap needs exactly one y column");
  const std::size_t cy = t.column(spec.y[0]);
  const std::size_t cz = t.column(spec.z);
  const std::size_t n = t.rows.size();
  std::vector<double> xs(n), ys(n);
  std::vector<std::string> zs(n);
  bool numeric = true;
  std::vector<double> zv(n);
  for (std::size_t r = 0; r < n; ++r) {
    xs[r] = cell_value(t, r, cx, spec.log_x);
    ys[r] = cell_value(t, r, cy, spec.log_y);
    zs[r] = cz < t.rows[r].size() ? t.rows[r][cz] : std::string{};
    if (zs[r].empty()) raise(ErrorKind::kEmptyData, "row " + std::to_string(r + 1) + ": empty value in column '" + spec.z + "'");
    numeric = numeric && parse_double(zs[r], zv[r]);
  }
  std::vector<double> ux(xs), uy(ys);
  std::sort(ux.begin(), ux.end());
  ux.erase(std::unique(ux.begin(), ux.end()), ux.end());
  std::sort(uy.begin(), uy.end());
  uy.erase(std::unique(uy.begin(), uy.end()), uy.end());

  // cell edges halfway between neighbouring centres
  auto edges = [](const std::vector<double>& c) {
    std::vector<double> e(c.size() + 1);
    if (c.size() == 1) {
      e[0] = c[0] - 0.5;
      e[1] = c[0] + 0.5;
      return e;
    }
    for (std::size_t i = 1; i < c.size(); ++i) e[i] = 0.5 * (c[i - 1] + c[i]);
    e[0] = c[0] - (e[1] - c[0]);
    e.back() = c.back() + (c.back() - e[c.size() - 1]);
    return e;
  };
  const auto ex = edges(ux), ey = edges(uy);
  const double right = 170.0;
  const Axis ax = make_axis(ex.front(), ex.back(), false, kLeft, kWidth - right);
  const Axis ay = make_axis(ey.front(), ey.back(), false, kHeight - kBottom, kTop);

  std::map<std::string, std::string> colour;
  double zmin = 0.0, zmax = 1.0;
  if (numeric) {
    zmin = *std::min_element(zv.begin(), zv.end());
    zmax = *std::max_element(zv.begin(), zv.end());
  } else {
    for (const auto& z : zs) colour.emplace(z, "");
    std::size_t k = 0;
    for (auto& [name, c] : colour) c = kPalette[k++ % kPalette.size()];
  }

  std::ostringstream os;
  header(os, spec.title);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t i = std::lower_bound(ux.begin(), ux.end(), xs[r]) - ux.begin();
    const std::size_t j = std::lower_bound(uy.begin(), uy.end(), ys[r]) - uy.begin();
    const double left = ax.map(ex[i]), rightx = ax.map(ex[i + 1]);
    const double top = ay.map(ey[j + 1]), bottom = ay.map(ey[j]);
    const std::string fill =
        numeric ? ramp(zmax > zmin ? (zv[r] - zmin) / (zmax - zmin) : 0.5) : colour.at(zs[r]);
    os << "<rect x=\"" << px(left) << "\" y=\"" << px(top) << "\" width=\"" << px(rightx - left) << "\" height=\""
       << px(bottom - top) << "\" fill=\"" << fill << "\"/>\n";
  }
  draw_axes(os, ax, ay, spec.x, spec.y[0]);
  // legend uses circles so the rect count equals the cell count
  const double lx = kWidth - right + 14;
  if (numeric) {
    for (int k = 0; k <= 4; ++k) {
      const double y = kTop + 16.0 * k + 6.0;
      os << "<circle cx=\"" << px(lx) << "\" cy=\"" << px(y) << "\" r=\"5\" fill=\"" << ramp(k / 4.0) << "\"/>\n";
      os << "<text x=\"" << px(lx + 10) << "\" y=\"" << px(y + 4) << "\">" << num(zmin + (zmax - zmin) * k / 4.0)
         << "</text>\n";
    }
  } else {
    int k = 0;
    for (const auto& [name, c] : colour) {
      const double y = kTop + 16.0 * k++ + 6.0;
      os << "<circle cx=\"" << px(lx) << "\" cy=\"" << px(y) << "\" r=\"5\" fill=\"" << c << "\"/>\n";
      os << "<text x=\"" << px(lx + 10) << "\" y=\"" << px(y + 4) << "\">" << escape(name) << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) raise(ErrorKind::kMissingColumn, "column '" + name + "' not in CSV header");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable CsvTable::parse(const std::string& text) {
  CsvTable t;
  std::istringstream is(text);
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first) {
      t.header = split(line);
      first = false;
      continue;
    }
    if (line.empty()) continue;
    t.rows.push_back(split(line));
  }
  if (t.header.empty()) raise(ErrorKind::kEmptyData, "CSV has no header row");
  return t;
}

CsvTable CsvTable::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::kEmptyData, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

PlotSpec PlotSpec::from_json(const nlohmann::json& j) {
  PlotSpec s;
  s.kind = j.value("kind", std::string("line"));
  s.x = j.at("x").get<std::string>();
  const auto& y = j.at("y");
  if (y.is_array()) {
    s.y = y.get<std::vector<std::string>>();
  } else {
    s.y = {y.get<std::string>()};
  }
  s.z = j.value("z", std::string{});
  s.log_x = j.value("log_x", false);
  s.log_y = j.value("log_y", false);
  s.title = j.value("title", std::string{});
  if (s.kind != "line" && s.kind != "heatmap") raise(ErrorKind::kDomain, "plot kind must be line or heatmap");
  return s;
}

std::string render_svg(const CsvTable& table, const PlotSpec& spec) {
  if (table.rows.empty()) raise(ErrorKind::kEmptyData, "CSV has a header but no data rows");
  return spec.kind == "heatmap" ? render_heatmap(table, spec) : render_line(table, spec);
}

void plot(const std::filesystem::path& csv_path, const PlotSpec& spec, const std::filesystem::path& svg_path) {
  const std::string svg = render_svg(CsvTable::read(csv_path), spec);
  std::ofstream out(svg_path, std::ios::binary);
  out << svg;
  if (!out) raise(ErrorKind::kEmptyData, "cannot write " + svg_path.string());
}

}  // namespace fracsl::cli
