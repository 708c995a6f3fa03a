#include "subrayleigh/optics.hpp"

#include "subrayleigh/error.hpp"
#include "subrayleigh/specfun.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace subrayleigh {
namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

double norm(Vec2 v) { return std::hypot(v.x, v.y); }

OpticalConfig OpticalConfig::from_ratio(double wavenumber, double object_over_radius,
                                        double magnification) {
    OpticalConfig cfg;
    cfg.wavenumber = wavenumber;
    cfg.lens_radius = 1.0;
    cfg.object_distance = object_over_radius;
    cfg.image_distance = magnification * object_over_radius;
    return cfg;
}

OpticalConfig OpticalConfig::with_wavenumber_scaled(int factor) const {
    OpticalConfig scaled = *this;
    scaled.wavenumber = wavenumber * factor;
    return scaled;
}

void OpticalConfig::validate() const {
    if (!positive_finite(wavenumber)) throw DomainError("OpticalConfig: k must be positive");
    if (!positive_finite(lens_radius)) throw DomainError("OpticalConfig: R must be positive");
    if (!positive_finite(object_distance)) throw DomainError("OpticalConfig: D_o must be positive");
    if (!positive_finite(image_distance)) throw DomainError("OpticalConfig: D_i must be positive");
    if (!std::isfinite(theta)) throw DomainError("OpticalConfig: theta must be finite");
}

std::vector<std::string> OpticalConfig::warnings() const {
    std::vector<std::string> out;
    if (lens_radius / object_distance >= 0.2) {
        std::ostringstream os;
        os << "R/D_o = " << lens_radius / object_distance << " exceeds the paraxial bound 0.2";
        out.push_back(os.str());
    }
    return out;
}

void SourceConfig::validate() const {
    if (photon_number < 1) throw DomainError("SourceConfig: N must be >= 1");
    if (!positive_finite(delta_k_t)) throw DomainError("SourceConfig: delta_k_t must be positive");
    if (!(std::isfinite(alpha_sq) && alpha_sq >= 0.0)) {
        throw DomainError("SourceConfig: |alpha|^2 must be nonnegative");
    }
    if (!(mu > 0.0 && mu <= 1.0)) throw DomainError("SourceConfig: mu must lie in (0, 1]");
    if (!(std::isfinite(delta_omega_dt) && delta_omega_dt >= 0.0)) {
        throw DomainError("SourceConfig: delta_omega_dt must be nonnegative");
    }
    if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("SourceConfig: eta must lie in [0, 1]");
    if (!(std::isfinite(detector_area_ratio) && detector_area_ratio >= 0.0)) {
        throw DomainError("SourceConfig: S/A must be nonnegative");
    }
    if (!positive_finite(object_intensity)) throw DomainError("SourceConfig: I_o must be positive");
    if (!positive_finite(object_area)) throw DomainError("SourceConfig: object area must be positive");
}

std::vector<std::string> SourceConfig::warnings() const {
    std::vector<std::string> out;
    const double focus = std::numbers::pi * delta_k_t * delta_k_t * object_area;
    if (focus < 10.0) {
        std::ostringstream os;
        os << "pi dk_t^2 A = " << focus << " is below 10; the focusing assumption is weak";
        out.push_back(os.str());
    }
    if (delta_omega_dt >= 1.0) {
        out.push_back("delta_omega_dt >= 1; the monochromatic assumption is violated");
    }
    return out;
}

double rayleigh_radius(const OpticalConfig& cfg) {
    return 0.61 * 2.0 * std::numbers::pi * cfg.magnification() * cfg.object_distance /
           (cfg.wavenumber * cfg.lens_radius);
}

double psf_radial(const OpticalConfig& cfg, double distance) {
    return specfun::somb(cfg.psf_scale() * distance);
}

double psf(const OpticalConfig& cfg, Vec2 displacement) {
    return psf_radial(cfg, norm(displacement));
}

double psf_heisenberg(const OpticalConfig& cfg, int photon_number, Vec2 displacement) {
    if (photon_number < 1) throw RangeError("psf_heisenberg: N must be >= 1");
    return psf(cfg.with_wavenumber_scaled(photon_number), displacement);
}

double psf_prefactor(const OpticalConfig& cfg, double object_area) {
    const double rk = cfg.lens_radius * cfg.wavenumber;
    return rk * rk * object_area /
           (4.0 * std::numbers::pi * cfg.object_distance * cfg.image_distance);
}

double focusing_kernel(const SourceConfig& src, double distance) {
    if (!(distance >= 0.0)) throw RangeError("focusing_kernel: distance must be nonnegative");
    return specfun::somb(0.5 * src.delta_k_t * distance);
}

double focusing_zero_radius(const SourceConfig& src, int zero_index) {
    return 2.0 * specfun::bessel_j1_zero(zero_index) / src.delta_k_t;
}

double efficiency_xi(const SourceConfig& src) {
    return src.eta * src.delta_omega_dt /
           (std::numbers::pi * src.delta_k_t * src.delta_k_t * src.object_area) *
           src.detector_area_ratio;
}

double log_source_efficiency(const SourceConfig& src) {
    const double n = static_cast<double>(src.photon_number);
    return n * std::log(src.mu * src.alpha_sq) - std::lgamma(n + 1.0);
}

double source_efficiency(const SourceConfig& src) {
    if (src.alpha_sq < 0.0) throw DomainError("source_efficiency: |alpha|^2 must be nonnegative");
    double value = 1.0;
    const double rate = src.mu * src.alpha_sq;
    for (int i = 1; i <= src.photon_number; ++i) value *= rate / i;
    return value;
}

double fock_norm(const SourceConfig& src) {
    if (!(src.delta_k_t > 0.0)) throw DomainError("fock_norm: delta_k_t must be positive");
    return 16.0 * std::numbers::pi * src.object_area / (src.delta_k_t * src.delta_k_t);
}

double heisenberg_gamma(const OpticalConfig& cfg, double cell_area, int photon_number) {
    const double pupil = std::numbers::pi * cfg.lens_radius * cfg.lens_radius;
    if (!(cell_area > 0.0 && cell_area <= pupil * (1.0 + 1e-12))) {
        throw RangeError("heisenberg_gamma: s_F must lie in (0, pi R^2]");
    }
    return std::pow(cell_area / pupil, photon_number);
}

bool focused_spot_condition(const OpticalConfig& cfg, const SourceConfig& src) {
    return cfg.object_distance / cfg.lens_radius > cfg.wavenumber / src.delta_k_t;
}

void require_focused_spot(const OpticalConfig& cfg, const SourceConfig& src) {
    if (!focused_spot_condition(cfg, src)) {
        std::ostringstream os;
        os << "focused-spot regime violated: need D_o/R ≫ k/Δk_t, got D_o/R = "
           << cfg.object_distance / cfg.lens_radius << " and k/Δk_t = "
           << cfg.wavenumber / src.delta_k_t;
        throw RegimeError(os.str());
    }
}

}  // namespace subrayleigh
