#include "subrayleigh/specfun.hpp"

#include "subrayleigh/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace subrayleigh::specfun {
namespace {

// Below this the power series is accurate to ~1e-13 absolute; above it the
// optimally truncated Hankel remainder is below ~e^{-2x}.
constexpr double kSeriesLimit = 12.0;

void require_finite(double x, const char* fn) {
    if (!std::isfinite(x)) {
        throw DomainError(std::string(fn) + ": argument must be finite");
    }
}

double j0_series(double x) {
    const double q = -0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<double>(k) * k);
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum) && std::abs(term) < 1e-17) break;
    }
    return sum;
}

double j1_series(double x) {
    const double q = -0.25 * x * x;
    double term = 0.5 * x;
    double sum = term;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<double>(k) * (k + 1));
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum) && std::abs(term) < 1e-17) break;
    }
    return sum;
}

// Hankel expansion J_nu(x) = sqrt(2/(pi x)) (P cos chi - Q sin chi), truncated
// at the smallest term. Returns {P, Q}.
struct HankelPQ {
    double p;
    double q;
};

HankelPQ hankel_pq(int nu, double x) {
    const double mu = 4.0 * nu * nu;
    double p = 1.0;
    double q = 0.0;
    double term = 1.0;
    double previous = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = term * (mu - odd * odd) / (k * 8.0 * x);
        if (std::abs(next) >= previous) break;
        previous = std::abs(next);
        term = next;
        // a_k / x^k enters P (even k) or Q (odd k) with alternating sign.
        const int half = (k - (k % 2)) / 2;
        const double sign = (half % 2 == 0) ? 1.0 : -1.0;
        if (k % 2 == 0) {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if (std::abs(term) < 1e-17) break;
    }
    return {p, q};
}

double ipow(double base, int exponent) {
    double result = 1.0;
    while (exponent > 0) {
        if (exponent & 1) result *= base;
        base *= base;
        exponent >>= 1;
    }
    return result;
}

}  // namespace

double bessel_j0(double x) {
    require_finite(x, "bessel_j0");
    const double ax = std::abs(x);
    if (ax <= kSeriesLimit) return j0_series(ax);
    const auto [p, q] = hankel_pq(0, ax);
    const double s = std::sin(ax);
    const double c = std::cos(ax);
    // chi = x - pi/4
    const double cos_chi = (c + s) * std::numbers::sqrt2 / 2.0;
    const double sin_chi = (s - c) * std::numbers::sqrt2 / 2.0;
    return std::sqrt(2.0 / (std::numbers::pi * ax)) * (p * cos_chi - q * sin_chi);
}

double bessel_j1(double x) {
    require_finite(x, "bessel_j1");
    const double ax = std::abs(x);
    double value;
    if (ax <= kSeriesLimit) {
        value = j1_series(ax);
    } else {
        const auto [p, q] = hankel_pq(1, ax);
        const double s = std::sin(ax);
        const double c = std::cos(ax);
        // chi = x - 3 pi/4
        const double cos_chi = (s - c) * std::numbers::sqrt2 / 2.0;
        const double sin_chi = -(s + c) * std::numbers::sqrt2 / 2.0;
        value = std::sqrt(2.0 / (std::numbers::pi * ax)) * (p * cos_chi - q * sin_chi);
    }
    return x < 0.0 ? -value : value;
}

double bessel_j1_zero(int n) {
    if (n < 1) throw RangeError("bessel_j1_zero: n must be >= 1");
    const double beta = (n + 0.25) * std::numbers::pi;
    const double estimate = beta - 3.0 / (8.0 * beta);
    double lo = estimate - 0.5;
    double hi = estimate + 0.5;
    double flo = bessel_j1(lo);
    if (flo * bessel_j1(hi) > 0.0) {
        throw ConvergenceError("bessel_j1_zero: no sign change near McMahon estimate");
    }
    for (int it = 0; it < 200 && hi - lo > 4e-16 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = bessel_j1(mid);
        if (fmid == 0.0) return mid;
        if ((fmid < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double somb(double x) {
    require_finite(x, "somb");
    const double ax = std::abs(x);
    if (ax == 0.0) return 1.0;
    if (ax < 1e-4) {
        const double x2 = ax * ax;
        return 1.0 - x2 / 8.0 + x2 * x2 / 192.0;
    }
    return 2.0 * bessel_j1(ax) / ax;
}

double somb_pow(double x, int power) {
    if (power < 1) throw RangeError("somb_pow: power must be >= 1");
    return ipow(somb(x), power);
}

RadialProfile RadialProfile::for_photon_number(int photon_number) {
    if (photon_number < 1) throw RangeError("RadialProfile: photon number must be >= 1");
    RadialProfile profile;
    profile.exponent = 2 * photon_number;
    profile.cutoff_radius = 50.0 * kJ1FirstZero / std::sqrt(static_cast<double>(photon_number));
    return profile;
}

void RadialProfile::validate() const {
    if (exponent < 2 || exponent % 2 != 0) {
        throw DomainError("RadialProfile: exponent must be even and >= 2");
    }
    if (!(cutoff_radius > 0.0) || !std::isfinite(cutoff_radius)) {
        throw DomainError("RadialProfile: cutoff_radius must be positive");
    }
    if (node_count < 64 || node_count % 2 != 0) {
        throw DomainError("RadialProfile: node_count must be even and >= 64");
    }
}

EncircledEnergy::EncircledEnergy(const RadialProfile& profile) : profile_(profile) {
    profile_.validate();
    const int n = profile_.node_count;
    step_ = profile_.cutoff_radius / n;
    cumulative_.assign(static_cast<std::size_t>(n / 2 + 1), 0.0);
    double left = integrand(0.0);
    for (int j = 0; j < n / 2; ++j) {
        const double mid = integrand((2 * j + 1) * step_);
        const double right = integrand((2 * j + 2) * step_);
        cumulative_[j + 1] = cumulative_[j] + step_ / 3.0 * (left + 4.0 * mid + right);
        left = right;
    }
}

double EncircledEnergy::integrand(double r) const {
    return somb_pow(r, profile_.exponent) * r;
}

double EncircledEnergy::operator()(double radius) const {
    if (!(radius >= 0.0 && radius <= profile_.cutoff_radius)) {
        throw RangeError("encircled_energy: radius must lie in [0, " +
                         std::to_string(profile_.cutoff_radius) + "]");
    }
    if (radius == profile_.cutoff_radius) return 1.0;
    const auto pairs = cumulative_.size() - 1;
    auto j = static_cast<std::size_t>(radius / (2.0 * step_));
    if (j >= pairs) j = pairs - 1;
    const double a = 2.0 * static_cast<double>(j) * step_;
    const double width = radius - a;
    double partial = 0.0;
    if (width > 0.0) {
        partial = width / 6.0 *
                  (integrand(a) + 4.0 * integrand(a + 0.5 * width) + integrand(radius));
    }
    const double value = (cumulative_[j] + partial) / total();
    return value > 1.0 ? 1.0 : value;
}

double EncircledEnergy::radius_for(double fraction) const {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw RangeError("radius_for_fraction: fraction must lie in (0, 1)");
    }
    double lo = 0.0;
    double hi = profile_.cutoff_radius;
    if ((*this)(hi) < fraction) {
        throw ConvergenceError("radius_for_fraction: fraction not reached below cutoff radius " +
                               std::to_string(hi));
    }
    for (int it = 0; it < 4000 && hi - lo > 1e-10 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((*this)(mid) >= fraction) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

double encircled_energy(const RadialProfile& profile, double radius) {
    return EncircledEnergy(profile)(radius);
}

double radius_for_fraction(const RadialProfile& profile, double fraction) {
    return EncircledEnergy(profile).radius_for(fraction);
}

double airy_first_ring_fraction() {
    static const double fraction =
        EncircledEnergy(RadialProfile::for_photon_number(1))(kJ1FirstZero);
    return fraction;
}

}  // namespace subrayleigh::specfun
