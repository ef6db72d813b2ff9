#include "cfbva/regression.hpp"

#include <cmath>
#include <string>

#include "cfbva/errors.hpp"

namespace cfbva {

namespace {

void exponents(std::size_t vars, int degree, std::vector<int>& current, std::size_t at,
               std::vector<std::vector<int>>& out) {
  if (at == vars) {
    out.push_back(current);
    return;
  }
  for (int e = 0; e <= degree; ++e) {
    current[at] = e;
    exponents(vars, degree - e, current, at + 1, out);
  }
  current[at] = 0;
}

}  // namespace

std::size_t polynomial_basis_size(std::size_t variables, int degree) {
  // C(variables + degree, degree)
  std::size_t n = 1;
  for (int i = 1; i <= degree; ++i) n = n * (variables + static_cast<std::size_t>(i)) / i;
  return n;
}

LeastSquares::LeastSquares(const std::vector<std::span<const double>>& state,
                           std::span<const std::uint32_t> population, int degree,
                           std::size_t paths_per_basis)
    : population_(population.begin(), population.end()) {
  const std::size_t n = population.size();
  if (n == 0) throw SolverError("regression: empty population");
  if (degree < 0) throw ConfigError("run.degree: must be >= 0");
  diag_.population = n;

  struct Standardized {
    std::span<const double> values;
    double mean;
    double scale;
  };
  std::vector<Standardized> vars;
  for (const auto& column : state) {
    double mean = 0.0;
    for (auto p : population) mean += column[p];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (auto p : population) var += (column[p] - mean) * (column[p] - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    if (sd > 1e-12 * std::max(1.0, std::abs(mean))) vars.push_back({column, mean, sd});
  }
  diag_.variables = vars.size();

  int d = vars.empty() ? 0 : degree;
  while (d > 0 && n < paths_per_basis * polynomial_basis_size(vars.size(), d)) {
    --d;
    diag_.degree_fallback = true;
  }
  diag_.degree = d;

  std::vector<std::vector<int>> powers;
  std::vector<int> current(vars.size(), 0);
  exponents(vars.size(), d, current, 0, powers);
  const auto k = static_cast<Eigen::Index>(powers.size());
  diag_.basis_size = powers.size();

  basis_.resize(static_cast<Eigen::Index>(n), k);
  std::vector<double> z(vars.size());
  std::vector<double> pw;
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = population[i];
    for (std::size_t v = 0; v < vars.size(); ++v)
      z[v] = (vars[v].values[p] - vars[v].mean) / vars[v].scale;
    for (Eigen::Index j = 0; j < k; ++j) {
      double term = 1.0;
      const auto& e = powers[static_cast<std::size_t>(j)];
      for (std::size_t v = 0; v < vars.size(); ++v)
        for (int r = 0; r < e[v]; ++r) term *= z[v];
      basis_(static_cast<Eigen::Index>(i), j) = term;
    }
  }

  gram_ = basis_.transpose() * basis_;
  qr_.setThreshold(1e-12);
  qr_.compute(gram_);
  const auto rdiag = qr_.matrixR().diagonal().cwiseAbs();
  const double largest = rdiag.maxCoeff();
  const double smallest = rdiag.minCoeff();
  diag_.condition = smallest > 0.0 ? largest / smallest : std::numeric_limits<double>::infinity();
  if (qr_.rank() < k) {
    diag_.ridge = true;
    const double lambda = 1e-10 * gram_.trace() / static_cast<double>(k);
    ridge_.compute(gram_ + lambda * Eigen::MatrixXd::Identity(k, k));
  }
}

Eigen::VectorXd LeastSquares::solve(const Eigen::VectorXd& rhs) const {
  return diag_.ridge ? Eigen::VectorXd(ridge_.solve(rhs)) : Eigen::VectorXd(qr_.solve(rhs));
}

void LeastSquares::project(std::span<double> target) const {
  project(std::vector<std::span<double>>{target});
}

void LeastSquares::project(const std::vector<std::span<double>>& targets) const {
  const auto n = static_cast<Eigen::Index>(population_.size());
  Eigen::MatrixXd y(n, static_cast<Eigen::Index>(targets.size()));
  for (std::size_t c = 0; c < targets.size(); ++c)
    for (Eigen::Index i = 0; i < n; ++i)
      y(i, static_cast<Eigen::Index>(c)) = targets[c][population_[static_cast<std::size_t>(i)]];
  const Eigen::MatrixXd rhs = basis_.transpose() * y;
  Eigen::MatrixXd beta(rhs.rows(), rhs.cols());
  for (Eigen::Index c = 0; c < rhs.cols(); ++c) beta.col(c) = solve(rhs.col(c));
  const Eigen::MatrixXd fitted = basis_ * beta;
  for (std::size_t c = 0; c < targets.size(); ++c)
    for (Eigen::Index i = 0; i < n; ++i)
      targets[c][population_[static_cast<std::size_t>(i)]] =
          fitted(i, static_cast<Eigen::Index>(c));
}

std::vector<double> regress_conditional_expectation(
    const std::vector<std::span<const double>>& state, std::span<const std::uint32_t> population,
    std::span<const double> target, const RegressionSpec& spec,
    RegressionDiagnostics* diagnostics) {
  LeastSquares fit(state, population, spec.degree, spec.paths_per_basis);
  std::vector<double> out(target.begin(), target.end());
  fit.project(std::span<double>(out));
  if (diagnostics) {
    *diagnostics = fit.diagnostics();
    double ss = 0.0;
    for (auto p : population) ss += (target[p] - out[p]) * (target[p] - out[p]);
    diagnostics->residual_rms = std::sqrt(ss / static_cast<double>(population.size()));
  }
  return out;
}

}  // namespace cfbva
