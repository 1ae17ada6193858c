#include "qdlab/time_series.hpp"

#include <algorithm>

#include "qdlab/error.hpp"

namespace qdlab {

TimeSeries::TimeSeries(std::vector<std::string> names) : names_(std::move(names)), columns_(names_.size()) {}

void TimeSeries::push_row(double t, const std::vector<double>& values) {
  if (values.size() != names_.size()) {
    throw Error("time series: row has " + std::to_string(values.size()) + " values, expected " +
                std::to_string(names_.size()));
  }
  if (!times_.empty() && !(t > times_.back())) throw Error("time series: times must be strictly increasing");
  times_.push_back(t);
  for (std::size_t i = 0; i < values.size(); ++i) columns_[i].push_back(values[i]);
}

const std::vector<double>& TimeSeries::column(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw Error("time series: no column named '" + std::string(name) + "'");
  return columns_[static_cast<std::size_t>(it - names_.begin())];
}

bool TimeSeries::has_column(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

}  // namespace qdlab
