#include "ricci/logmean.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ricci::logmean {
namespace {

// Taylor coefficients of phi(x) = x / atanh(x) in powers of x^2.
constexpr std::array<double, 7> kPhiSeries = {
    1.0,
    -1.0 / 3.0,
    -4.0 / 45.0,
    -44.0 / 945.0,
    -428.0 / 14175.0,
    -10196.0 / 467775.0,
    -10719068.0 / 638512875.0,
};

// |x| below this uses the series; truncation error is below 1e-19 there.
constexpr double kSeriesRadius = 0.05;
// Arguments closer than a factor 2 (|x| < 1/3) are handled in x = (r-s)/(r+s).
constexpr double kNearRadius = 1.0 / 3.0;

void require_nonnegative(double v, const char* what) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
        throw std::domain_error(std::string("logmean: ") + what + " must be finite and nonnegative");
    }
}

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::domain_error(std::string("logmean: ") + what + " must be finite and positive");
    }
}

double phi(double x) {
    if (std::abs(x) < kSeriesRadius) {
        const double x2 = x * x;
        double acc = 0.0;
        for (auto it = kPhiSeries.rbegin(); it != kPhiSeries.rend(); ++it) {
            acc = acc * x2 + *it;
        }
        return acc;
    }
    return x / std::atanh(x);
}

double phi_prime(double x) {
    if (std::abs(x) < kSeriesRadius) {
        const double x2 = x * x;
        double acc = 0.0;
        for (std::size_t k = kPhiSeries.size() - 1; k >= 1; --k) {
            acc = acc * x2 + 2.0 * static_cast<double>(k) * kPhiSeries[k];
        }
        return acc * x;
    }
    const double a = std::atanh(x);
    return (a - x / (1.0 - x * x)) / (a * a);
}

}  // namespace

double theta(double r, double s) {
    require_nonnegative(r, "r");
    require_nonnegative(s, "s");
    if (r == 0.0 || s == 0.0) {
        return 0.0;
    }
    if (r == s) {
        return r;
    }
    const double sum = r + s;
    const double x = (r - s) / sum;
    if (std::abs(x) < kNearRadius) {
        return 0.5 * sum * phi(x);
    }
    return (r - s) / (std::log(r) - std::log(s));
}

DerivativePair theta_partials(double r, double s) {
    require_positive(r, "r");
    require_positive(s, "s");
    if (r == s) {
        return {0.5, 0.5};
    }
    const double x = (r - s) / (r + s);
    if (std::abs(x) < kNearRadius) {
        // theta = m phi(x) with m = (r+s)/2; differentiate through x.
        const double p = phi(x);
        const double dp = phi_prime(x);
        return {0.5 * p + 0.5 * dp * (1.0 - x), 0.5 * p - 0.5 * dp * (1.0 + x)};
    }
    const double ell = std::log(r) - std::log(s);
    const double th = (r - s) / ell;
    return {(r - th) / (r * ell), (th - s) / (s * ell)};
}

double deficit(double s, double t, double u, double v) {
    require_positive(u, "u");
    require_positive(v, "v");
    const DerivativePair p = theta_partials(s, t);
    return u * p.d1 + v * p.d2 - theta(u, v);
}

}  // namespace ricci::logmean
