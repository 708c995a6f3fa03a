#pragma once

#include "subrayleigh/engines.hpp"
#include "subrayleigh/optics.hpp"
#include "subrayleigh/specfun.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace subrayleigh {

struct ScalingPoint {
    double n = 0.0;
    double value = 0.0;
};

/// value ~ exp(intercept) * n^slope, fitted by least squares in log-log space.
struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::vector<ScalingPoint> points;
};

ScalingFit fit_scaling(std::span<const ScalingPoint> points);

/// Image-plane radius enclosing `fraction` of somb^{2N}, evaluated on the ideal radial
/// profile. The default fraction makes x_R(1) the first dark ring.
double generalized_rayleigh_radius(const OpticalConfig& cfg, int photon_number,
                                   double fraction = specfun::airy_first_ring_fraction());

/// First zero of the k -> N k PSF, located by bisection, in image-plane units.
double heisenberg_first_zero(const OpticalConfig& cfg, int photon_number);

enum class Axis { horizontal, vertical };

/// 1 - I_mid / I_peak along the row (horizontal) or column (vertical) through the
/// image maximum. The lobes are searched within one separation of the image center.
/// Returns 0 when the profile is single-lobed. Separation is in object units.
double two_point_dip(const ImageGrid& image, Axis axis, double separation);

/// sum |grad I|^2 / sum I^2 over interior pixels, central differences per unit length.
double sharpness(const Raster& image);
double sharpness(const ImageGrid& image);

struct McConfig {
    std::uint64_t seed = 1;
    std::size_t samples = 100000;    // number of centroids
    double truncation_radius = 10.0;  // in units of the Rayleigh radius
    int batch = 1;                    // photons averaged per centroid
    unsigned threads = 1;

    void validate() const;
};

/// Radial standard deviation (image-plane units) of centroids of `batch` photon
/// positions drawn from the Airy density truncated at truncation_radius * x_R.
/// Sample i depends only on (seed, i).
double mc_centroid_spread(const OpticalConfig& cfg, const McConfig& mc);

/// Uniform draw in [0, 1) determined by (seed, counter).
double counter_uniform(std::uint64_t seed, std::uint64_t counter);

}  // namespace subrayleigh
