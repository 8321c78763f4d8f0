#pragma once

namespace jdoi {

/// Standard normal density.
double norm_pdf(double x);

/// Standard normal CDF via erfc, accurate in both tails.
double norm_cdf(double x);

/// Scaled complementary error function exp(x^2) * erfc(x).
double erfcx(double x);

/// exp(a) * N(b) without overflow when a is large and b very negative.
///
/// The tilted terms of the jump integrals pair a large exponent with a
/// vanishing normal tail; for b < 0 the product is evaluated as
/// exp(a - b^2/2) * erfcx(-b/sqrt2) / 2.
double exp_times_norm_cdf(double a, double b);

}  // namespace jdoi
