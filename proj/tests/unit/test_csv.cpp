#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "qdlab/csv.hpp"
#include "qdlab/error.hpp"

using namespace qdlab;

namespace {

bool same_bits(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return std::memcmp(&a, &b, sizeof a) == 0;
}

bool same_series(const TimeSeries& a, const TimeSeries& b) {
  if (a.names() != b.names() || a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_bits(a.times()[i], b.times()[i])) return false;
    for (std::size_t c = 0; c < a.num_columns(); ++c) {
      if (!same_bits(a.column(c)[i], b.column(c)[i])) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(-2.5e-20) == "-2.4999999999999999e-20");
}

TEST_CASE("header and layout") {
  TimeSeries s({"N", "g2"});
  s.push_row(0.0, {1.0, 0.0});
  s.push_row(0.5, {0.25, std::numeric_limits<double>::quiet_NaN()});
  CHECK(to_csv(s) == "t,N,g2\n0,1,0\n0.5,0.25,nan\n");
}

TEST_CASE("round trip over random series") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-300, 300);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t cols = 1 + static_cast<std::size_t>(trial % 5);
    std::vector<std::string> names;
    for (std::size_t c = 0; c < cols; ++c) names.push_back("c" + std::to_string(c));
    TimeSeries s(names);
    double t = uni(rng);
    for (int r = 0; r < 20; ++r) {
      t += std::abs(uni(rng)) + 1e-3;
      std::vector<double> row;
      for (std::size_t c = 0; c < cols; ++c) {
        const double v = uni(rng) * std::pow(10.0, expo(rng));
        row.push_back((r + c) % 7 == 3 ? std::numeric_limits<double>::quiet_NaN() : v);
      }
      s.push_row(t, row);
    }
    const auto text = to_csv(s);
    const auto back = parse_csv(text);
    CHECK(same_series(s, back));
    CHECK(to_csv(back) == text);
  }
}

TEST_CASE("malformed input") {
  CHECK_THROWS_AS(parse_csv(std::string("x,N\n0,1\n")), Error);
  CHECK_THROWS_AS(parse_csv(std::string("t,N\n0,1,2\n")), Error);
  CHECK_THROWS_AS(parse_csv(std::string("t,N\n0,abc\n")), Error);
  CHECK_THROWS_AS(parse_csv(std::string("t,N\n1,0\n0,0\n")), Error);
}

TEST_CASE("time series bookkeeping") {
  TimeSeries s({"a"});
  CHECK_THROWS_AS(s.push_row(0.0, {1.0, 2.0}), Error);
  s.push_row(0.0, {1.0});
  CHECK_THROWS_AS(s.push_row(0.0, {1.0}), Error);
  CHECK_THROWS_AS(s.column("b"), Error);
  CHECK(s.has_column("a"));
}
