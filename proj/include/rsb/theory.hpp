#pragma once

#include <cstddef>
#include <optional>

// Closed-form limits of the perturbed free energy, high-point measures and
// the two-overlap law. f_sigma takes the standard deviation sigma; callers
// holding a variance V pass sqrt(V).

namespace rsb::theory {

struct TheoryPoint {
  double beta = 1.0;
  double alpha = 0.5;
  double u = 0.0;
  std::optional<double> gamma;

  /// Throws invalid-argument unless beta > 0, 0 < alpha < 1, |u| < 1, gamma >= 0.
  void validate() const;
  /// Variance factor (1+u)^2 alpha + (1 - alpha).
  double variance_factor() const noexcept;
};

/// beta^2 sigma^2 / 4 for beta <= 2/sigma, else beta sigma - 1.
double f_sigma(double beta, double sigma);

/// Limit of F_T / loglog T. u < 0: f(beta, sqrt(V)); u >= 0:
/// alpha f(beta, 1+u) + (1-alpha) f(beta, 1).
double limiting_free_energy(const TheoryPoint& p);

enum class Side { Left, Right };
/// Analytic one-sided u-derivative of limiting_free_energy.
double du_limiting_free_energy(const TheoryPoint& p, Side side);

/// Maximal level: sqrt(V) for u <= 0, (1+u) alpha + (1 - alpha) for u > 0.
double gamma_star(double alpha, double u);
/// Branch-change level V / (1+u); defined for u >= 0 only.
double gamma_c(double alpha, double u);

/// Optimal intermediate level; requires 0 < gamma < gamma_star.
double lambda_star(double gamma, double alpha, double u);

/// Limit of the normalised log-measure of gamma-high points; requires 0 < gamma < gamma_star.
double high_points_exponent(double gamma, const TheoryPoint& p);
/// Same formula on the closed interval [0, gamma_star] without range checks.
double high_points_exponent_closed(double gamma, double alpha, double u);

struct VariationalResult {
  double value = 0.0;
  double maximizer = 0.0;
};

/// max over gamma in [0, gamma_star] of beta gamma + E(gamma) on a uniform
/// grid of grid_size points plus geometric refinement toward gamma_c and gamma_star.
VariationalResult variational_free_energy(const TheoryPoint& p, std::size_t grid_size);

/// (2/beta) 1{0 in [lo,hi]} + (1 - 2/beta) 1{1 in [lo,hi]}; beta > 2.
double limiting_overlap_law(double beta, double lo, double hi);

/// 1 + beta^2/4 for beta < 2, beta otherwise.
double rem_free_energy(double beta);

}  // namespace rsb::theory
