#pragma once

// Logarithmic mean and the derived quantities used by the Bochner forms.
//
//   theta(r, s) = (r - s) / (log r - log s),   theta(r, r) = r
//
// All functions are pure. Inputs must be nonnegative; partials and the
// deficit additionally require strictly positive arguments.

namespace ricci::logmean {

struct DerivativePair {
    double d1 = 0.0;  // d/dr theta(r, s)
    double d2 = 0.0;  // d/ds theta(r, s)
};

/// Logarithmic mean. theta(0, s) = theta(r, 0) = 0 by continuity.
/// Throws std::domain_error on negative or non-finite input.
double theta(double r, double s);

/// Both partial derivatives of theta at (r, s); r, s > 0.
DerivativePair theta_partials(double r, double s);

/// Deficit in the four-point inequality
///   u d1theta(s,t) + v d2theta(s,t) >= theta(u,v),
/// i.e. the left side minus the right side. Nonnegative up to rounding.
double deficit(double s, double t, double u, double v);

}  // namespace ricci::logmean
