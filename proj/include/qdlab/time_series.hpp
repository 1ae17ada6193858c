#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace qdlab {

// Sampled trajectory: strictly increasing times plus named real columns of
// equal length. Complex quantities are stored as separate re/im columns.
class TimeSeries {
 public:
  TimeSeries() = default;
  explicit TimeSeries(std::vector<std::string> names);

  void push_row(double t, const std::vector<double>& values);

  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<double>& column(std::string_view name) const;
  const std::vector<double>& column(std::size_t i) const { return columns_.at(i); }
  bool has_column(std::string_view name) const;
  std::size_t num_columns() const { return names_.size(); }

  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

 private:
  std::vector<double> times_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
};

}  // namespace qdlab
