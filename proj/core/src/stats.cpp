#include "plucase/stats.hpp"

#include <cmath>
#include <limits>

namespace plucase::stats {
namespace {

const double kSqrtPi = std::sqrt(std::acos(-1.0));
const double kSqrt2 = std::sqrt(2.0);

// erf(x) = 2/sqrt(pi) * sum (-1)^n x^(2n+1) / (n! (2n+1)), |x| small.
double erf_series(double x) {
  double term = x;  // x^(2n+1) / n!
  double sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= -x * x / n;
    double delta = term / (2 * n + 1);
    sum += delta;
    if (std::abs(delta) <= std::abs(sum) * 1e-17) break;
  }
  return 2.0 / kSqrtPi * sum;
}

// sqrt(pi) exp(x^2) erfc(x) = 1/(x+ 1/2/(x+ 1/(x+ 3/2/(x+ ...)))), x > 0,
// evaluated with the modified Lentz algorithm.
double erfc_fraction(double x) {
  const double tiny = 1e-300;
  double f = tiny;
  double c = f;
  double d = 0.0;
  for (int n = 1; n <= 300; ++n) {
    double a = n == 1 ? 1.0 : (n - 1) / 2.0;
    d = x + a * d;
    if (d == 0.0) d = tiny;
    d = 1.0 / d;
    c = x + a / c;
    if (c == 0.0) c = tiny;
    double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-17) break;
  }
  return std::exp(-x * x) / kSqrtPi * f;
}

}  // namespace

double erfc(double x) {
  if (x < 0) return 2.0 - erfc(-x);
  if (x < 2.0) return 1.0 - erf_series(x);
  if (x > 27.0) return 0.0;  // below double underflow of exp(-x^2)
  return erfc_fraction(x);
}

double normal_cdf(double z) { return 0.5 * erfc(-z / kSqrt2); }

}  // namespace plucase::stats
