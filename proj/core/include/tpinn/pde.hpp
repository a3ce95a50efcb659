#pragma once

// 1D transport (advection) equation u_t + c u_x = s0 with u(x, 0) = g(x).
// Solved exactly along characteristics: u(x, t) = g(x - c t) + t s0.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace tpinn::pde {

class Profile {
 public:
  enum class Kind { Sine, Gaussian, Polynomial };

  // sin(k x)
  static Profile sine(double k);
  // Normal density exp(-(x - center)^2 / (2 width^2)) / (width sqrt(2 pi)).
  static Profile gaussian(double center, double width);
  // coeffs[0] + coeffs[1] x + coeffs[2] x^2 + ...
  static Profile polynomial(std::vector<double> coeffs);
  // "sine:K", "gaussian:CENTER:WIDTH", "poly:C0,C1,..." (ConfigError otherwise).
  static Profile parse(std::string_view text);

  double operator()(double x) const;
  double derivative(double x) const;

  Kind kind() const noexcept { return kind_; }
  std::string describe() const;

 private:
  Kind kind_ = Kind::Sine;
  double a_ = 1.0;  // k, or center
  double b_ = 1.0;  // width
  std::vector<double> coeffs_;
};

struct TransportProblem {
  double c = 1.0;
  Profile g = Profile::sine(1.0);
  double source = 0.0;  // constant s0
  double x_min = 0.0;
  double x_max = 1.0;
  double t_max = 1.0;

  // x_min < x_max and t_max > 0; ConfigError otherwise.
  void validate() const;
};

// Throws DomainError for t < 0.
double analytic_solution(const TransportProblem& p, double x, double t);

inline double residual(double u_t, double u_x, double c) { return u_t + c * u_x; }

struct SolutionGrid {
  std::vector<double> xs;
  std::vector<double> ts;
  std::vector<double> u;  // u[i * ts.size() + j] = u(xs[i], ts[j])

  double at(std::size_t i, std::size_t j) const { return u[i * ts.size() + j]; }
};

// nx, nt >= 2; ConfigError otherwise.
std::vector<double> linspace(double lo, double hi, std::size_t n);
SolutionGrid solve_grid(const TransportProblem& p, std::size_t nx, std::size_t nt);

// Trapezoidal integral of u(., ts[j]) over xs. Throws ConfigError for bad j.
double mass_integral(const SolutionGrid& grid, std::size_t j);

// Largest |mass(j) - mass(0)| / max(1, |mass(0)|) over all time indices.
double mass_drift(const SolutionGrid& grid);

// CSV with header "x,t,u", one row per (i, j), i outer, 17 significant digits.
std::string grid_to_csv(const SolutionGrid& grid);

struct Range {
  double min = 0.0;
  double max = 1.0;
  std::size_t count = 2;
};
// "MIN:MAX:COUNT"; MIN and MAX accept a trailing "pi" multiplier ("2pi", "pi").
// Requires MIN < MAX and COUNT >= 2; ConfigError otherwise.
Range parse_range(std::string_view text);

}  // namespace tpinn::pde
