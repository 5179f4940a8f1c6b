#include "nlsp/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nlsp {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trajectory_csv(const TrajectoryRecord& record) {
  std::string out = kTrajectoryHeader;
  out += '\n';
  for (const TrajectorySample& s : record.samples) {
    for (double v : {s.t, s.l2_norm, s.h1_seminorm, s.l2_mean_x1, s.l2_perp, s.blowup_energy}) {
      out += format_double(v);
      out += ',';
    }
    out += format_double(s.energy_residual);
    out += '\n';
  }
  return out;
}

std::string Table::csv() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
      if (!quote) {
        out += cells[i];
        continue;
      }
      out += '"';
      for (char c : cells[i]) out += c == '"' ? std::string("\"\"") : std::string(1, c);
      out += '"';
    }
    out += '\n';
  };
  line(columns);
  for (const auto& r : rows) line(r);
  return out;
}

std::string decay_svg(const std::vector<PlotSeries>& series, const std::string& title) {
  constexpr double width = 640, height = 400, left = 70, right = 20, top = 40, bottom = 50;
  double t0 = INFINITY, t1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (const auto& [t, v] : s.points) {
      if (!(v > 0.0) || !std::isfinite(v)) continue;
      t0 = std::min(t0, t);
      t1 = std::max(t1, t);
      y0 = std::min(y0, std::log10(v));
      y1 = std::max(y1, std::log10(v));
    }
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
     << title << "</text>\n";
  if (!(t1 >= t0)) {
    os << "</svg>\n";
    return os.str();
  }
  if (t1 == t0) t1 = t0 + 1.0;
  y0 = std::floor(y0);
  y1 = std::max(std::ceil(y1), y0 + 1.0);
  const double pw = width - left - right, ph = height - top - bottom;
  auto sx = [&](double t) { return left + pw * (t - t0) / (t1 - t0); };
  auto sy = [&](double ly) { return top + ph * (1.0 - (ly - y0) / (y1 - y0)); };

  os << "<g stroke=\"black\" fill=\"none\"><rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw
     << "\" height=\"" << ph << "\"/></g>\n";
  const int decades = static_cast<int>(y1 - y0);
  const int stride = std::max(1, decades / 8);
  for (int d = 0; d <= decades; d += stride) {
    const double y = sy(y0 + d);
    os << "<line x1=\"" << left - 4 << "\" y1=\"" << y << "\" x2=\"" << left << "\" y2=\"" << y
       << "\" stroke=\"black\"/>";
    os << "<text x=\"" << left - 8 << "\" y=\"" << y + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" << static_cast<int>(y0 + d)
       << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double t = t0 + (t1 - t0) * i / 4.0;
    os << "<text x=\"" << sx(t) << "\" y=\"" << height - bottom + 16
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << format_double(t).substr(0, 8)
       << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 10
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">t</text>\n";

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"};
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = colors[i % 5];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [t, v] : series[i].points)
      if (v > 0.0 && std::isfinite(v)) os << sx(t) << ',' << sy(std::log10(v)) << ' ';
    os << "\"/>\n";
    os << "<text x=\"" << left + pw - 8 << "\" y=\"" << top + 16 + 14 * i << "\" text-anchor=\"end\" fill=\"" << color
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << series[i].label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

OutputDir::OutputDir(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) fail("", "cannot create output directory: " + ec.message());
}

void OutputDir::write(const std::string& name, const std::string& contents) {
  std::ofstream out(root_ / name, std::ios::binary | std::ios::trunc);
  if (!out) fail(name, "cannot open for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.close();
  if (!out) fail(name, "write failed");
  written_.push_back(name);
}

void OutputDir::fail(const std::string& name, const std::string& reason) {
  std::string manifest = "failed: " + (name.empty() ? root_.string() : name) + " (" + reason + ")\ncompleted:\n";
  for (const auto& w : written_) manifest += "  " + w + "\n";
  // Best effort: the directory itself may be the thing that failed.
  std::ofstream(root_ / "MANIFEST.partial") << manifest;
  throw OutputError("output failure in " + root_.string() + ": " + manifest);
}

}  // namespace nlsp
