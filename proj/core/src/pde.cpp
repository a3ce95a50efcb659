#include "tpinn/pde.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "tpinn/error.hpp"
#include "tpinn/numfmt.hpp"

namespace tpinn::pde {

Profile Profile::sine(double k) {
  Profile p;
  p.kind_ = Kind::Sine;
  p.a_ = k;
  return p;
}

Profile Profile::gaussian(double center, double width) {
  if (!(width > 0.0)) throw ConfigError("gaussian width must be positive");
  Profile p;
  p.kind_ = Kind::Gaussian;
  p.a_ = center;
  p.b_ = width;
  return p;
}

Profile Profile::polynomial(std::vector<double> coeffs) {
  if (coeffs.empty()) throw ConfigError("polynomial profile needs at least one coefficient");
  Profile p;
  p.kind_ = Kind::Polynomial;
  p.coeffs_ = std::move(coeffs);
  return p;
}

namespace {

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : text) {
    if (ch == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  return parts;
}

double parse_number(std::string_view text, std::string_view what) {
  try {
    return parse_double(text, what);
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
}

// Accepts plain numbers plus "pi", "2pi", "-0.5pi".
double parse_scalar(std::string_view text, std::string_view what) {
  if (text.size() >= 2 && text.substr(text.size() - 2) == "pi") {
    const std::string_view head = text.substr(0, text.size() - 2);
    double mult = 1.0;
    if (head == "-") {
      mult = -1.0;
    } else if (!head.empty()) {
      mult = parse_number(head, what);
    }
    return mult * std::numbers::pi;
  }
  return parse_number(text, what);
}

}  // namespace

Profile Profile::parse(std::string_view text) {
  const auto parts = split(text, ':');
  const std::string& kind = parts[0];
  if (kind == "sine" && parts.size() == 2) {
    return sine(parse_number(parts[1], "sine wavenumber"));
  }
  if (kind == "gaussian" && parts.size() == 3) {
    return gaussian(parse_number(parts[1], "gaussian center"), parse_number(parts[2], "gaussian width"));
  }
  if (kind == "poly" && parts.size() == 2) {
    std::vector<double> coeffs;
    for (const auto& c : split(parts[1], ',')) coeffs.push_back(parse_number(c, "polynomial coefficient"));
    return polynomial(std::move(coeffs));
  }
  throw ConfigError("bad profile '" + std::string(text) +
                    "'; expected sine:K, gaussian:CENTER:WIDTH or poly:C0,C1,...");
}

double Profile::operator()(double x) const {
  switch (kind_) {
    case Kind::Sine:
      return std::sin(a_ * x);
    case Kind::Gaussian: {
      const double z = (x - a_) / b_;
      return std::exp(-0.5 * z * z) / (b_ * std::sqrt(2.0 * std::numbers::pi));
    }
    case Kind::Polynomial: {
      double acc = 0.0;
      for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
      return acc;
    }
  }
  return 0.0;
}

double Profile::derivative(double x) const {
  switch (kind_) {
    case Kind::Sine:
      return a_ * std::cos(a_ * x);
    case Kind::Gaussian: {
      const double z = (x - a_) / b_;
      return -z / b_ * (*this)(x);
    }
    case Kind::Polynomial: {
      double acc = 0.0;
      for (std::size_t i = coeffs_.size(); i-- > 1;) acc = acc * x + static_cast<double>(i) * coeffs_[i];
      return acc;
    }
  }
  return 0.0;
}

std::string Profile::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Sine:
      os << "sine:" << format_shortest(a_);
      break;
    case Kind::Gaussian:
      os << "gaussian:" << format_shortest(a_) << ':' << format_shortest(b_);
      break;
    case Kind::Polynomial:
      os << "poly:";
      for (std::size_t i = 0; i < coeffs_.size(); ++i) os << (i ? "," : "") << format_shortest(coeffs_[i]);
      break;
  }
  return os.str();
}

void TransportProblem::validate() const {
  if (!(x_min < x_max)) throw ConfigError("x domain must satisfy x_min < x_max");
  if (!(t_max > 0.0)) throw ConfigError("t_max must be positive");
  if (!std::isfinite(c) || !std::isfinite(source)) throw ConfigError("velocity and source must be finite");
}

double analytic_solution(const TransportProblem& p, double x, double t) {
  if (t < 0.0) throw DomainError("time must be non-negative, got " + format_shortest(t));
  const double base = p.g(x - p.c * t);
  return p.source == 0.0 ? base : base + t * p.source;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n < 2) throw ConfigError("grid needs at least 2 points");
  std::vector<double> v(n);
  const double span = hi - lo;
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + span * (static_cast<double>(i) / denom);
  v.back() = hi;
  return v;
}

SolutionGrid solve_grid(const TransportProblem& p, std::size_t nx, std::size_t nt) {
  if (nx < 2 || nt < 2) throw ConfigError("solve_grid needs nx >= 2 and nt >= 2");
  p.validate();
  SolutionGrid g;
  g.xs = linspace(p.x_min, p.x_max, nx);
  g.ts = linspace(0.0, p.t_max, nt);
  g.u.resize(nx * nt);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < nt; ++j) g.u[i * nt + j] = analytic_solution(p, g.xs[i], g.ts[j]);
  }
  return g;
}

double mass_integral(const SolutionGrid& grid, std::size_t j) {
  if (j >= grid.ts.size()) throw ConfigError("time index out of range");
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < grid.xs.size(); ++i) {
    acc += 0.5 * (grid.xs[i + 1] - grid.xs[i]) * (grid.at(i, j) + grid.at(i + 1, j));
  }
  return acc;
}

double mass_drift(const SolutionGrid& grid) {
  const double m0 = mass_integral(grid, 0);
  const double ref = std::max(1.0, std::abs(m0));
  double worst = 0.0;
  for (std::size_t j = 1; j < grid.ts.size(); ++j) {
    worst = std::max(worst, std::abs(mass_integral(grid, j) - m0) / ref);
  }
  return worst;
}

std::string grid_to_csv(const SolutionGrid& grid) {
  std::string out = "x,t,u\n";
  out.reserve(out.size() + grid.u.size() * 64);
  for (std::size_t i = 0; i < grid.xs.size(); ++i) {
    for (std::size_t j = 0; j < grid.ts.size(); ++j) {
      out += format_g17(grid.xs[i]);
      out += ',';
      out += format_g17(grid.ts[j]);
      out += ',';
      out += format_g17(grid.at(i, j));
      out += '\n';
    }
  }
  return out;
}

Range parse_range(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw ConfigError("bad range '" + std::string(text) + "'; expected MIN:MAX:COUNT");
  Range r;
  r.min = parse_scalar(parts[0], "range minimum");
  r.max = parse_scalar(parts[1], "range maximum");
  std::size_t pos = 0;
  long long n = 0;
  try {
    n = std::stoll(parts[2], &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != parts[2].size()) throw ConfigError("bad range count '" + parts[2] + "'");
  if (n < 2) throw ConfigError("range count must be at least 2");
  if (!(r.min < r.max)) throw ConfigError("range '" + std::string(text) + "' must satisfy MIN < MAX");
  r.count = static_cast<std::size_t>(n);
  return r;
}

}  // namespace tpinn::pde
