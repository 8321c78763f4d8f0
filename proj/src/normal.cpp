#include "jdoi/normal.hpp"

#include <cmath>

namespace jdoi {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kInvSqrtPi = 0.56418958354775628695;

// Continued fraction for erfcx(x), x >= 4:
// erfcx(x) = 1/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
double erfcx_cf(double x) {
  double f = x;
  for (int k = 60; k >= 1; --k) f = x + 0.5 * k / f;
  return kInvSqrtPi / f;
}
}  // namespace

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double erfcx(double x) {
  if (x < 4.0) {
    if (x < -26.0) return INFINITY;
    // exp(x^2) split into an exact square and a small remainder to keep the
    // product accurate for moderate x.
    const double xh = std::round(x * 4096.0) / 4096.0;
    const double rem = (x - xh) * (x + xh);
    return std::exp(xh * xh) * std::exp(rem) * std::erfc(x);
  }
  return erfcx_cf(x);
}

double exp_times_norm_cdf(double a, double b) {
  if (b >= -1.0) return std::exp(a) * norm_cdf(b);
  return 0.5 * std::exp(a - 0.5 * b * b) * erfcx(-b * kInvSqrt2);
}

}  // namespace jdoi
