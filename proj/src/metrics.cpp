#include "subrayleigh/metrics.hpp"

#include "subrayleigh/convolution.hpp"
#include "subrayleigh/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace subrayleigh {

ScalingFit fit_scaling(std::span<const ScalingPoint> points) {
    if (points.size() < 3) throw DomainError("fit_scaling: need at least 3 points");
    const double count = static_cast<double>(points.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& p : points) {
        if (!(p.n > 0.0) || !(p.value > 0.0) || !std::isfinite(p.value)) {
            throw DomainError("fit_scaling: N and values must be positive");
        }
        sx += std::log(p.n);
        sy += std::log(p.value);
    }
    const double mx = sx / count;
    const double my = sy / count;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& p : points) {
        const double dx = std::log(p.n) - mx;
        const double dy = std::log(p.value) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw DomainError("fit_scaling: N values must not all coincide");
    ScalingFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (const auto& p : points) {
        const double r = std::log(p.value) - (fit.intercept + fit.slope * std::log(p.n));
        ss_res += r * r;
    }
    fit.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - ss_res / syy) : 1.0;
    fit.points.assign(points.begin(), points.end());
    return fit;
}

double generalized_rayleigh_radius(const OpticalConfig& cfg, int photon_number, double fraction) {
    if (photon_number < 1) throw RangeError("generalized_rayleigh_radius: N must be >= 1");
    cfg.validate();
    const auto profile = specfun::RadialProfile::for_photon_number(photon_number);
    const double t = specfun::radius_for_fraction(profile, fraction);
    return t * cfg.magnification() / cfg.psf_scale();
}

double heisenberg_first_zero(const OpticalConfig& cfg, int photon_number) {
    if (photon_number < 1) throw RangeError("heisenberg_first_zero: N must be >= 1");
    cfg.validate();
    const auto value = [&](double d) { return psf_heisenberg(cfg, photon_number, {d, 0.0}); };
    // Walk out in steps well below the zero spacing until the sign flips.
    const double step = 0.25 / (cfg.psf_scale() * photon_number);
    double lo = 0.0;
    double hi = step;
    while (value(hi) > 0.0) {
        lo = hi;
        hi += step;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (value(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi) * cfg.magnification();
}

double two_point_dip(const ImageGrid& image, Axis axis, double separation) {
    const Raster& r = image.raster;
    const std::size_t g = r.resolution;
    if (!(separation > 0.0)) throw GeometryError("two_point_dip: separation must be positive");
    const double sep_px = separation / r.pitch();
    const double center = 0.5 * static_cast<double>(g - 1);
    if (center - sep_px < 0.0 || center + sep_px > static_cast<double>(g - 1)) {
        throw GeometryError("two_point_dip: lobes fall outside the image");
    }
    const auto peak_at = static_cast<std::size_t>(
        std::max_element(r.values.begin(), r.values.end()) - r.values.begin());
    const std::size_t line = axis == Axis::horizontal ? peak_at / g : peak_at % g;
    const auto sample = [&](std::size_t i) {
        return axis == Axis::horizontal ? r.at(line, i) : r.at(i, line);
    };

    const auto left_begin = static_cast<std::size_t>(std::ceil(center - sep_px));
    const auto left_end = static_cast<std::size_t>(std::floor(center));
    const auto right_begin = static_cast<std::size_t>(std::ceil(center));
    const auto right_end = static_cast<std::size_t>(std::floor(center + sep_px));
    std::size_t left = left_begin;
    for (std::size_t i = left_begin; i <= left_end; ++i) {
        if (sample(i) > sample(left)) left = i;
    }
    std::size_t right = right_end;
    for (std::size_t i = right_end + 1; i-- > right_begin;) {
        if (sample(i) > sample(right)) right = i;
    }
    if (right <= left + 1) return 0.0;
    double mid = sample(left + 1);
    for (std::size_t i = left + 1; i < right; ++i) mid = std::min(mid, sample(i));
    const double lo_peak = std::min(sample(left), sample(right));
    if (!(lo_peak > 0.0)) throw GeometryError("two_point_dip: lobes not locatable");
    if (mid >= lo_peak) return 0.0;
    const double peak = 0.5 * (sample(left) + sample(right));
    return std::clamp(1.0 - mid / peak, 0.0, 1.0);
}

double sharpness(const Raster& image) {
    const std::size_t g = image.resolution;
    const double inv = 1.0 / (2.0 * image.pitch());
    double grad = 0.0;
    double energy = 0.0;
    for (std::size_t i = 1; i + 1 < g; ++i) {
        for (std::size_t j = 1; j + 1 < g; ++j) {
            const double gx = (image.at(i, j + 1) - image.at(i, j - 1)) * inv;
            const double gy = (image.at(i + 1, j) - image.at(i - 1, j)) * inv;
            grad += gx * gx + gy * gy;
            energy += image.at(i, j) * image.at(i, j);
        }
    }
    return energy > 0.0 ? grad / energy : 0.0;
}

double sharpness(const ImageGrid& image) { return sharpness(image.raster); }

// Monte Carlo ----------------------------------------------------------------

void McConfig::validate() const {
    if (samples < 1000) throw DomainError("McConfig: samples must be >= 1000");
    if (!(truncation_radius >= 3.0)) throw DomainError("McConfig: truncation radius must be >= 3");
    if (batch < 1) throw DomainError("McConfig: batch must be >= 1");
}

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Inverse CDF of the radial density somb^2(t) t on [0, t_max], 4096 nodes.
class AiryRadialSampler {
public:
    static constexpr std::size_t kNodes = 4096;

    explicit AiryRadialSampler(double t_max) : step_(t_max / (kNodes - 1)), cdf_(kNodes, 0.0) {
        double prev = 0.0;
        for (std::size_t i = 1; i < kNodes; ++i) {
            const double t = step_ * static_cast<double>(i);
            const double s = specfun::somb(t);
            const double density = s * s * t;
            cdf_[i] = cdf_[i - 1] + 0.5 * step_ * (prev + density);
            prev = density;
        }
        const double total = cdf_.back();
        for (double& c : cdf_) c /= total;
    }

    double operator()(double u) const {
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        if (it == cdf_.end()) return step_ * (kNodes - 1);
        const auto i = static_cast<std::size_t>(it - cdf_.begin()) - 1;
        const double width = cdf_[i + 1] - cdf_[i];
        const double frac = width > 0.0 ? (u - cdf_[i]) / width : 0.0;
        return step_ * (static_cast<double>(i) + frac);
    }

private:
    double step_;
    std::vector<double> cdf_;
};

}  // namespace

double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
    const std::uint64_t z = mix64(counter * 0x9E3779B97F4A7C15ull + mix64(seed));
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

double mc_centroid_spread(const OpticalConfig& cfg, const McConfig& mc) {
    cfg.validate();
    mc.validate();
    const double to_image = cfg.magnification() / cfg.psf_scale();
    const double t_max = mc.truncation_radius * rayleigh_radius(cfg) / to_image;
    const AiryRadialSampler sampler(t_max);
    const std::size_t m = mc.samples;
    const auto batch = static_cast<std::uint64_t>(mc.batch);
    std::vector<double> cx(m), cy(m);

    parallel_for(m, mc.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            double sx = 0.0, sy = 0.0;
            for (std::uint64_t p = 0; p < batch; ++p) {
                const std::uint64_t index = static_cast<std::uint64_t>(j) * batch + p;
                const double r = sampler(counter_uniform(mc.seed, 2 * index)) * to_image;
                const double phi = 2.0 * std::numbers::pi * counter_uniform(mc.seed, 2 * index + 1);
                sx += r * std::cos(phi);
                sy += r * std::sin(phi);
            }
            cx[j] = sx / static_cast<double>(batch);
            cy[j] = sy / static_cast<double>(batch);
        }
    });

    double mx = 0.0, my = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        mx += cx[j];
        my += cy[j];
    }
    mx /= static_cast<double>(m);
    my /= static_cast<double>(m);
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double dx = cx[j] - mx;
        const double dy = cy[j] - my;
        acc += dx * dx + dy * dy;
    }
    return std::sqrt(acc / static_cast<double>(m));
}

}  // namespace subrayleigh
