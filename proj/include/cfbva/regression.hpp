#ifndef CFBVA_REGRESSION_HPP
#define CFBVA_REGRESSION_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cfbva/market.hpp"

namespace cfbva {

struct RegressionSpec {
  std::vector<Driver> state;  // empty: every stochastic driver among S, r, lambda_I, lambda_C, fx
  int degree = 2;
  std::size_t paths_per_basis = 10;  // below this the fit falls back to the mean
};

struct RegressionDiagnostics {
  std::size_t population = 0;
  std::size_t variables = 0;  // state variables with non-zero spread
  int degree = 0;
  std::size_t basis_size = 0;
  double residual_rms = 0.0;
  double condition = 1.0;
  bool ridge = false;
  bool degree_fallback = false;
};

// Least-squares projection on a full multivariate polynomial basis in
// standardized state variables. Variables without spread over the population
// are dropped, so a degenerate state reduces to the sample mean.
class LeastSquares {
 public:
  LeastSquares(const std::vector<std::span<const double>>& state,
               std::span<const std::uint32_t> population, int degree,
               std::size_t paths_per_basis);

  // Replaces target[p] by its fitted value for p in the population.
  void project(std::span<double> target) const;
  // Fitted values of several targets at once (same layout, in place).
  void project(const std::vector<std::span<double>>& targets) const;
  const RegressionDiagnostics& diagnostics() const { return diag_; }

 private:
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  std::vector<std::uint32_t> population_;
  Eigen::MatrixXd basis_;  // population x basis_size
  Eigen::MatrixXd gram_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
  Eigen::LDLT<Eigen::MatrixXd> ridge_;
  RegressionDiagnostics diag_;
};

// Conditional expectation estimate of `target` given the state, over the
// paths in `population`. Other entries are left unchanged.
std::vector<double> regress_conditional_expectation(
    const std::vector<std::span<const double>>& state, std::span<const std::uint32_t> population,
    std::span<const double> target, const RegressionSpec& spec,
    RegressionDiagnostics* diagnostics = nullptr);

std::size_t polynomial_basis_size(std::size_t variables, int degree);

}  // namespace cfbva

#endif
