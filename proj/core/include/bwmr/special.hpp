#pragma once

namespace bwmr::special {

// psi(x) = d/dx log Gamma(x).  Upward recurrence to x >= 6, then the
// asymptotic series through x^-14.  Reflection for x < 0; poles throw.
double digamma(double x);

// psi'(x).  Same scheme, switching to the series at x >= 10.
double trigamma(double x);

// log B(a, b) via std::lgamma.
double log_beta(double a, double b);

// Two-sided normal p-value 2 * (1 - Phi(|z|)) computed as erfc(|z|/sqrt 2).
double two_sided_p(double z);

}  // namespace bwmr::special
