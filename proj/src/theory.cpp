#include "rsb/theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rsb/error.hpp"

namespace rsb::theory {

namespace {

void check_alpha_u(double alpha, double u) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw_invalid("alpha must lie in (0,1), got " + std::to_string(alpha));
  if (!(std::abs(u) < 1.0)) throw_invalid("u must lie in (-1,1), got " + std::to_string(u));
}

double variance_factor(double alpha, double u) { return (1.0 + u) * (1.0 + u) * alpha + (1.0 - alpha); }

}  // namespace

void TheoryPoint::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw_invalid("beta must be > 0, got " + std::to_string(beta));
  check_alpha_u(alpha, u);
  if (gamma && !(*gamma >= 0.0)) throw_invalid("gamma must be >= 0");
}

double TheoryPoint::variance_factor() const noexcept { return theory::variance_factor(alpha, u); }

double f_sigma(double beta, double sigma) {
  if (!(sigma > 0.0)) throw_invalid("sigma must be > 0, got " + std::to_string(sigma));
  if (!(beta > 0.0)) throw_invalid("beta must be > 0, got " + std::to_string(beta));
  if (beta <= 2.0 / sigma) return beta * beta * sigma * sigma / 4.0;
  return beta * sigma - 1.0;
}

double limiting_free_energy(const TheoryPoint& p) {
  p.validate();
  if (p.u < 0.0) return f_sigma(p.beta, std::sqrt(p.variance_factor()));
  return p.alpha * f_sigma(p.beta, 1.0 + p.u) + (1.0 - p.alpha) * f_sigma(p.beta, 1.0);
}

double du_limiting_free_energy(const TheoryPoint& p, Side side) {
  p.validate();
  const double b = p.beta;
  const double a = p.alpha;
  const bool left_branch = p.u < 0.0 || (p.u == 0.0 && side == Side::Left);
  if (left_branch) {
    // d/du f(beta, sqrt(V)), dV/du = 2 (1+u) alpha.
    const double v = p.variance_factor();
    const double dv = 2.0 * (1.0 + p.u) * a;
    const double sigma = std::sqrt(v);
    const bool quadratic = b < 2.0 / sigma || (b == 2.0 / sigma && side == Side::Left);
    if (quadratic) return b * b * dv / 4.0;
    return b * dv / (2.0 * sigma);
  }
  // d/du alpha f(beta, 1+u).
  const double sigma = 1.0 + p.u;
  const bool quadratic = b < 2.0 / sigma || (b == 2.0 / sigma && side == Side::Left);
  if (quadratic) return a * b * b * sigma / 2.0;
  return a * b;
}

double gamma_star(double alpha, double u) {
  check_alpha_u(alpha, u);
  if (u <= 0.0) return std::sqrt(variance_factor(alpha, u));
  return (1.0 + u) * alpha + (1.0 - alpha);
}

double gamma_c(double alpha, double u) {
  check_alpha_u(alpha, u);
  if (u < 0.0) throw_invalid("gamma_c is defined for u >= 0 only, got u = " + std::to_string(u));
  return variance_factor(alpha, u) / (1.0 + u);
}

double lambda_star(double gamma, double alpha, double u) {
  const double gs = gamma_star(alpha, u);
  if (!(gamma > 0.0 && gamma < gs))
    throw_invalid("gamma must lie in (0, gamma_star = " + std::to_string(gs) + "), got " + std::to_string(gamma));
  const double v = variance_factor(alpha, u);
  const double interior = gamma * (1.0 + u) * (1.0 + u) * alpha / v;
  if (u < 0.0 || gamma < gamma_c(alpha, u)) return interior;
  return (1.0 + u) * alpha;
}

double high_points_exponent_closed(double gamma, double alpha, double u) {
  const double v = variance_factor(alpha, u);
  if (u < 0.0 || gamma < v / (1.0 + u)) return -gamma * gamma / v;
  const double excess = gamma - (1.0 + u) * alpha;
  return -alpha - excess * excess / (1.0 - alpha);
}

double high_points_exponent(double gamma, const TheoryPoint& p) {
  p.validate();
  const double gs = gamma_star(p.alpha, p.u);
  if (!(gamma > 0.0 && gamma < gs))
    throw_invalid("gamma must lie in (0, gamma_star = " + std::to_string(gs) + "), got " + std::to_string(gamma));
  return high_points_exponent_closed(gamma, p.alpha, p.u);
}

VariationalResult variational_free_energy(const TheoryPoint& p, std::size_t grid_size) {
  p.validate();
  if (grid_size < 1000) throw_invalid("variational grid needs at least 1000 points");
  const double gs = gamma_star(p.alpha, p.u);
  VariationalResult best{-INFINITY, 0.0};
  auto consider = [&](double g) {
    if (!(g >= 0.0 && g <= gs)) return;
    const double val = p.beta * g + high_points_exponent_closed(g, p.alpha, p.u);
    if (val > best.value) best = {val, g};
  };
  for (std::size_t i = 0; i < grid_size; ++i)
    consider(gs * static_cast<double>(i) / static_cast<double>(grid_size - 1));
  std::vector<double> kinks{gs};
  if (p.u >= 0.0) kinks.push_back(gamma_c(p.alpha, p.u));
  for (double k : kinks) {
    consider(k);
    for (int j = 1; j <= 48; ++j) {
      const double off = gs * std::ldexp(1.0, -j);
      consider(k - off);
      consider(k + off);
    }
  }
  return best;
}

double limiting_overlap_law(double beta, double lo, double hi) {
  if (!(beta > 2.0)) throw_invalid("the two-overlap limit law holds for beta > 2, got " + std::to_string(beta));
  if (!(lo <= hi)) throw_invalid("interval must satisfy lo <= hi");
  double mass = 0.0;
  if (lo <= 0.0 && 0.0 <= hi) mass += 2.0 / beta;
  if (lo <= 1.0 && 1.0 <= hi) mass += 1.0 - 2.0 / beta;
  return mass;
}

double rem_free_energy(double beta) {
  if (!(beta > 0.0)) throw_invalid("beta must be > 0");
  return beta < 2.0 ? 1.0 + beta * beta / 4.0 : beta;
}

}  // namespace rsb::theory
