#include "asyncact/cubic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace asyncact {

namespace {

constexpr double kDegenerate = 1e-14;

double horner(double a, double b, double c, double d, double u) {
  return ((a * u + b) * u + c) * u + d;
}

std::vector<double> quadratic_roots(double a, double b, double c) {
  const double scale = std::max({std::abs(b), std::abs(c)});
  if (std::abs(a) <= kDegenerate * scale || a == 0.0) {
    if (b == 0.0) return {};
    return {-c / b};
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) {
    // tangency within rounding
    if (disc > -1e-14 * b * b) return {-b / (2.0 * a)};
    return {};
  }
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  std::vector<double> r;
  if (q != 0.0) {
    r = {q / a, c / q};
  } else {
    r = {0.0};
  }
  std::sort(r.begin(), r.end());
  return r;
}

}  // namespace

std::vector<double> real_cubic_roots(double a, double b, double c, double d) {
  const double scale = std::max({std::abs(b), std::abs(c), std::abs(d)});
  if (a == 0.0 || std::abs(a) <= kDegenerate * scale) {
    auto r = quadratic_roots(b, c, d);
    return r;
  }

  const double B = b / a;
  const double C = c / a;
  const double D = d / a;
  // u = y - B/3 gives y^3 + p y + q = 0
  const double shift = B / 3.0;
  const double p = C - B * B / 3.0;
  const double q = 2.0 * B * B * B / 27.0 - B * C / 3.0 + D;
  const double disc = 0.25 * q * q + p * p * p / 27.0;

  std::vector<double> ys;
  const double guard = 1e-14 * std::max(0.25 * q * q, std::abs(p * p * p) / 27.0);
  if (p >= 0.0 && disc <= guard) {
    ys.push_back(std::cbrt(-q));
  } else if (p == 0.0) {
    ys.push_back(std::cbrt(-q));
  } else if (disc > guard) {
    const double A = -std::copysign(std::cbrt(std::abs(q) / 2.0 + std::sqrt(disc)), q);
    ys.push_back(A != 0.0 ? A - p / (3.0 * A) : 0.0);
  } else {
    // three real roots (two may coincide); p < 0 here
    const double r = std::sqrt(std::max(-p / 3.0, 0.0));
    const double arg = std::clamp(-q / (2.0 * r * r * r), -1.0, 1.0);
    const double phi = std::acos(arg);
    for (int k = 0; k < 3; ++k) {
      ys.push_back(2.0 * r * std::cos((phi - 2.0 * std::numbers::pi * k) / 3.0));
    }
  }

  std::vector<double> roots;
  for (double y : ys) {
    double u = y - shift;
    for (int it = 0; it < 4; ++it) {
      const double f = horner(a, b, c, d, u);
      const double fp = (3.0 * a * u + 2.0 * b) * u + c;
      if (fp == 0.0) break;
      const double next = u - f / fp;
      if (!std::isfinite(next)) break;
      if (std::abs(horner(a, b, c, d, next)) > std::abs(f)) break;
      u = next;
    }
    roots.push_back(u);
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](double x, double y) {
                            return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(x));
                          }),
              roots.end());
  return roots;
}

std::array<double, 4> stationary_polynomial(const CubicCoeffs& c) {
  const double x1 = c.xi1;
  const double l = c.lambda;
  const double mu = c.mu;
  const double b = c.b_target;
  return {
      mu * x1 * x1,
      l * x1 * x1 + mu * (2.0 * x1 - b * x1 * x1),
      x1 * x1 + 2.0 * l * x1 + mu * (1.0 - 2.0 * b * x1),
      x1 - c.xi2 + l - mu * b,
  };
}

double coordinate_objective(const CubicCoeffs& c, double u) {
  const double w = 1.0 + c.xi1 * u;
  if (w <= 0.0) return std::numeric_limits<double>::infinity();
  const double du = u - c.b_target;
  return std::log(w) - c.xi2 * u / w + c.lambda * du + 0.5 * c.mu * du * du;
}

std::vector<double> cubic_stationary_points(const CubicCoeffs& c) {
  const auto k = stationary_polynomial(c);
  std::vector<double> out;
  for (double u : real_cubic_roots(k[0], k[1], k[2], k[3])) {
    if (1.0 + c.xi1 * u > 1e-12) out.push_back(u);
  }
  return out;
}

std::optional<double> coordinate_minimizer(const CubicCoeffs& c) {
  std::optional<double> best;
  double best_val = std::numeric_limits<double>::infinity();
  for (double u : cubic_stationary_points(c)) {
    const double v = coordinate_objective(c, u);
    if (v < best_val) {
      best_val = v;
      best = u;
    }
  }
  return best;
}

double box_coordinate_minimizer(double xi1, double xi2) {
  CubicCoeffs c{xi1, xi2, 0.0, 0.0, 0.0};
  std::vector<double> cands{0.0, 1.0};
  for (double u : cubic_stationary_points(c)) cands.push_back(std::clamp(u, 0.0, 1.0));
  double best = 0.0;
  double best_val = std::numeric_limits<double>::infinity();
  for (double u : cands) {
    const double v = coordinate_objective(c, u);
    if (v < best_val) {
      best_val = v;
      best = u;
    }
  }
  return best;
}

}  // namespace asyncact
