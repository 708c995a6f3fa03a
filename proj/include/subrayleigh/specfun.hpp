#pragma once

#include <vector>

namespace subrayleigh::specfun {

/// First positive zero of J1.
inline constexpr double kJ1FirstZero = 3.8317059702075125;

double bessel_j0(double x);
double bessel_j1(double x);

/// n-th positive zero of J1 (n >= 1), refined by bisection from McMahon's estimate.
double bessel_j1_zero(int n);

/// Airy amplitude 2 J1(x)/x, even in x, exactly 1 at the origin.
double somb(double x);

/// somb(x)^power for power >= 1.
double somb_pow(double x, int power);

/// Radial intensity profile somb^exponent(r) integrated against r dr on [0, cutoff_radius].
struct RadialProfile {
    int exponent = 2;
    double cutoff_radius = 50.0 * kJ1FirstZero;
    int node_count = 16384;

    /// somb^{2N} profile with the default cutoff 50 j11 / sqrt(N).
    static RadialProfile for_photon_number(int photon_number);

    /// Throws DomainError unless exponent is even and >= 2, cutoff > 0, node_count >= 64 and even.
    void validate() const;
};

/// Cumulative Simpson table for one profile; cheap repeated queries.
class EncircledEnergy {
public:
    explicit EncircledEnergy(const RadialProfile& profile);

    const RadialProfile& profile() const noexcept { return profile_; }

    /// Fraction of the truncated profile's area inside `radius`.
    double operator()(double radius) const;

    /// Smallest radius whose encircled fraction reaches `fraction`, relative tolerance 1e-10.
    double radius_for(double fraction) const;

    /// Unnormalized integral over [0, cutoff].
    double total() const noexcept { return cumulative_.back(); }

private:
    double integrand(double r) const;

    RadialProfile profile_;
    double step_;
    std::vector<double> cumulative_;  // at even nodes
};

double encircled_energy(const RadialProfile& profile, double radius);
double radius_for_fraction(const RadialProfile& profile, double fraction);

/// Encircled fraction of the default N = 1 profile at the first dark ring (about 0.8406).
/// This is the convention behind the generalized Rayleigh radius.
double airy_first_ring_fraction();

}  // namespace subrayleigh::specfun
