#ifndef CFBVA_CURVE_HPP
#define CFBVA_CURVE_HPP

#include <vector>

namespace cfbva {

// Piecewise-linear function of time with flat extrapolation on both ends.
class Curve {
 public:
  Curve() : Curve(0.0) {}
  explicit Curve(double flat);
  Curve(std::vector<double> times, std::vector<double> values);

  double operator()(double t) const;
  // Exact integral of the interpolant over [a, b].
  double integral(double a, double b) const;
  bool is_flat() const;

  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }

 private:
  double primitive(double t) const;

  std::vector<double> times_;
  std::vector<double> values_;
  std::vector<double> cumulative_;  // integral from times_.front() to each knot
};

}  // namespace cfbva

#endif
