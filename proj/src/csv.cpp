#include "qdlab/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "qdlab/error.hpp"

namespace qdlab {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& cell, std::size_t line_no) {
  if (cell == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto* first = cell.data();
  const auto* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw Error("csv: cannot parse '" + cell + "' on line " + std::to_string(line_no));
  }
  return v;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  if (ec != std::errc()) throw Error("csv: number formatting failed");
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const TimeSeries& series) {
  out << 't';
  for (const auto& name : series.names()) out << ',' << name;
  out << '\n';
  for (std::size_t r = 0; r < series.size(); ++r) {
    out << format_double(series.times()[r]);
    for (std::size_t c = 0; c < series.num_columns(); ++c) out << ',' << format_double(series.column(c)[r]);
    out << '\n';
  }
}

std::string to_csv(const TimeSeries& series) {
  std::ostringstream out;
  write_csv(out, series);
  return out.str();
}

void write_csv_file(const std::string& path, const TimeSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("csv: cannot open '" + path + "' for writing");
  write_csv(out, series);
  if (!out) throw Error("csv: write to '" + path + "' failed");
}

TimeSeries parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("csv: missing header row");
  auto header = split(line);
  if (header.empty() || header.front() != "t") throw Error("csv: first column must be 't'");
  header.erase(header.begin());
  TimeSeries series(header);
  std::size_t line_no = 1;
  std::vector<double> row(header.size());
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size() + 1) {
      throw Error("csv: line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) + " cells");
    }
    const double t = parse_double(cells[0], line_no);
    for (std::size_t i = 0; i < header.size(); ++i) row[i] = parse_double(cells[i + 1], line_no);
    series.push_row(t, row);
  }
  return series;
}

TimeSeries parse_csv(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in);
}

}  // namespace qdlab
