#include "cfbva/curve.hpp"

#include <algorithm>
#include <cmath>

#include "cfbva/errors.hpp"

namespace cfbva {

Curve::Curve(double flat) : times_{0.0}, values_{flat}, cumulative_{0.0} {}

Curve::Curve(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
  if (times_.empty() || times_.size() != values_.size())
    throw ConfigError("curve: times and values must be non-empty and of equal length");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i]) || !std::isfinite(values_[i]))
      throw ConfigError("curve: non-finite knot");
    if (i > 0 && !(times_[i] > times_[i - 1]))
      throw ConfigError("curve: knot times must be strictly increasing");
  }
  cumulative_.assign(times_.size(), 0.0);
  for (std::size_t i = 1; i < times_.size(); ++i)
    cumulative_[i] = cumulative_[i - 1] +
                     0.5 * (times_[i] - times_[i - 1]) * (values_[i] + values_[i - 1]);
}

double Curve::operator()(double t) const {
  if (t <= times_.front()) return values_.front();
  if (t >= times_.back()) return values_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
  const double w = (t - times_[i]) / (times_[i + 1] - times_[i]);
  return values_[i] + w * (values_[i + 1] - values_[i]);
}

double Curve::primitive(double t) const {
  if (t <= times_.front()) return (t - times_.front()) * values_.front();
  if (t >= times_.back()) return cumulative_.back() + (t - times_.back()) * values_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
  return cumulative_[i] + 0.5 * (t - times_[i]) * (values_[i] + (*this)(t));
}

double Curve::integral(double a, double b) const {
  if (times_.size() == 1) return (b - a) * values_.front();
  return primitive(b) - primitive(a);
}

bool Curve::is_flat() const {
  return std::all_of(values_.begin(), values_.end(),
                     [&](double v) { return v == values_.front(); });
}

}  // namespace cfbva
