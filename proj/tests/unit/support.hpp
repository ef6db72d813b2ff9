#ifndef CFBVA_TEST_SUPPORT_HPP
#define CFBVA_TEST_SUPPORT_HPP

#include <cmath>
#include <numeric>
#include <vector>

#include "cfbva/market.hpp"

namespace cfbva::test {

inline DriverConfig flat(std::initializer_list<std::pair<Driver, double>> values) {
  DriverConfig c;
  for (const auto& [d, v] : values) c[d] = DeterministicProcess{Curve(v)};
  return c;
}

struct Stats {
  double mean;
  double se;
};

inline Stats stats(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace cfbva::test

#endif
