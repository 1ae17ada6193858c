#pragma once

#include <iosfwd>
#include <string>

#include "qdlab/time_series.hpp"

namespace qdlab {

// Header row "t,<names...>", then one row per sample. Numbers are written with
// 17 significant digits via std::to_chars (no locale); NaN is written as "nan".
std::string format_double(double x);
void write_csv(std::ostream& out, const TimeSeries& series);
std::string to_csv(const TimeSeries& series);
void write_csv_file(const std::string& path, const TimeSeries& series);

TimeSeries parse_csv(std::istream& in);
TimeSeries parse_csv(const std::string& text);

}  // namespace qdlab
