#pragma once

#include <string>
#include <vector>

namespace subrayleigh {

/// Object-plane displacement r_o + r_i/m, in image widths.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

double norm(Vec2 v);

/// Thin circular-pupil lens geometry. Lengths are in image widths; the wavenumber
/// is in inverse image widths. Only the ratio object_distance / lens_radius enters
/// the point-spread function.
struct OpticalConfig {
    double wavenumber = 6000.0;
    double lens_radius = 1.0;
    double object_distance = 250.0;
    double image_distance = 250.0;
    double theta = 0.0;  // PSF phase; always treated as compensated

    /// Builds a config from k, D_o/R and m with R = 1.
    static OpticalConfig from_ratio(double wavenumber, double object_over_radius,
                                    double magnification);

    double magnification() const { return image_distance / object_distance; }
    double focal_length() const { return 1.0 / (1.0 / object_distance + 1.0 / image_distance); }

    /// R k / D_o, the factor mapping an object-plane distance to the somb argument.
    double psf_scale() const { return lens_radius * wavenumber / object_distance; }

    /// Copy with k replaced by factor * k.
    OpticalConfig with_wavenumber_scaled(int factor) const;

    void validate() const;
    std::vector<std::string> warnings() const;
};

/// Illumination and detection parameters.
struct SourceConfig {
    int photon_number = 1;
    double delta_k_t = 600.0;
    double alpha_sq = 1.0;
    double mu = 1.0;
    double delta_omega_dt = 0.01;
    double eta = 1.0;
    double detector_area_ratio = 1e-4;  // S / A
    double object_intensity = 1.0;      // I_o
    double object_area = 1.0;           // A, the full unit frame

    void validate() const;
    std::vector<std::string> warnings() const;
};

/// m * 0.61 * 2 pi * D_o / (k R), in image-plane units.
double rayleigh_radius(const OpticalConfig& cfg);

/// Peak-normalized amplitude PSF somb(R k |d| / D_o).
double psf(const OpticalConfig& cfg, Vec2 displacement);
double psf_radial(const OpticalConfig& cfg, double distance);

/// PSF for photons of N times the illumination frequency (k -> N k).
double psf_heisenberg(const OpticalConfig& cfg, int photon_number, Vec2 displacement);

/// Prefactor R^2 k^2 A / (4 pi D_o D_i) stripped from psf().
double psf_prefactor(const OpticalConfig& cfg, double object_area = 1.0);

/// Peak-normalized focusing profile somb(delta_k_t * distance / 2).
double focusing_kernel(const SourceConfig& src, double distance);

/// Radius of the n-th zero of the focusing profile.
double focusing_zero_radius(const SourceConfig& src, int zero_index = 1);

/// xi = eta (dw dt) / (pi dk_t^2 A) * (S / A).
double efficiency_xi(const SourceConfig& src);

/// (mu |alpha|^2)^N / N!, the count-rate factor of the lossy coherent-state mixture.
double source_efficiency(const SourceConfig& src);
double log_source_efficiency(const SourceConfig& src);

/// Normalization of the focused Fock superposition, 16 pi A / dk_t^2.
double fock_norm(const SourceConfig& src);

/// Threshold-screen transmission factor (s_F / (pi R^2))^N.
double heisenberg_gamma(const OpticalConfig& cfg, double cell_area, int photon_number);

/// D_o / R > k / dk_t: each focused spot is far smaller than the object-plane Rayleigh spot.
bool focused_spot_condition(const OpticalConfig& cfg, const SourceConfig& src);

/// Throws RegimeError when focused_spot_condition fails.
void require_focused_spot(const OpticalConfig& cfg, const SourceConfig& src);

}  // namespace subrayleigh
