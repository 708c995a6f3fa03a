#include "subrayleigh/scene.hpp"

#include "subrayleigh/error.hpp"
#include "subrayleigh/specfun.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <sstream>

namespace subrayleigh {
namespace {

void validate_aperture(const Raster& r) {
    if (r.resolution < 16) throw DomainError("ApertureGrid: resolution must be >= 16");
    if (!(r.side > 0.0) || !std::isfinite(r.side)) {
        throw DomainError("ApertureGrid: side must be positive");
    }
    if (r.values.size() != r.resolution * r.resolution) {
        throw DomainError("ApertureGrid: value count does not match resolution^2");
    }
    for (double v : r.values) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw DomainError("ApertureGrid: transmissivity must lie in [0, 1]");
        }
    }
}

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
    return h;
}

}  // namespace

ApertureGrid::ApertureGrid(std::size_t resolution, double side, std::vector<double> values)
    : ApertureGrid(Raster(resolution, side, std::move(values))) {}

ApertureGrid::ApertureGrid(Raster raster) : raster_(std::move(raster)) {
    validate_aperture(raster_);
}

std::uint64_t ApertureGrid::content_hash() const {
    std::uint64_t h = kFnvOffset;
    const std::uint64_t g = raster_.resolution;
    h = fnv1a(h, &g, sizeof g);
    h = fnv1a(h, &raster_.side, sizeof raster_.side);
    return fnv1a(h, raster_.values.data(), raster_.values.size() * sizeof(double));
}

std::size_t required_resolution(double side, const SourceConfig& src) {
    const double max_pitch = 0.25 * focusing_zero_radius(src, 1);
    return static_cast<std::size_t>(std::ceil(side / max_pitch - 1e-9));
}

void require_resolved_focusing(const ApertureGrid& grid, const SourceConfig& src) {
    const std::size_t needed = required_resolution(grid.side(), src);
    if (grid.resolution() < needed) {
        std::ostringstream os;
        os << "grid pitch " << grid.pitch() << " does not resolve the focusing kernel (first zero "
           << focusing_zero_radius(src, 1) << "); need G >= " << needed << " for side "
           << grid.side();
        throw ResolutionError(os.str(), needed);
    }
}

Kernel focusing_grid_kernel(const ApertureGrid& grid, const SourceConfig& src,
                            int truncation_zero) {
    const double radius = focusing_zero_radius(src, truncation_zero);
    Kernel k = Kernel::radial(grid.pitch(), grid.resolution() - 1, radius,
                              [&src](double d) { return focusing_kernel(src, d); });
    const double mass = k.sum();
    for (double& v : k.values) v /= mass;
    return k;
}

SmoothedAperture smooth(const ApertureGrid& grid, const SourceConfig& src,
                        const SmoothOptions& options) {
    src.validate();
    require_resolved_focusing(grid, src);
    const Kernel kernel = focusing_grid_kernel(grid, src, options.truncation_zero);

    SmoothedAperture out;
    out.raster = Raster(grid.resolution(), grid.side(),
                        convolve_same(grid.values(), grid.resolution(), kernel, options.path,
                                      options.threads));
    out.max_value = out.raster.max_value();
    out.source_hash = grid.content_hash();
    out.delta_k_t = src.delta_k_t;
    out.truncation_radius = focusing_zero_radius(src, options.truncation_zero);
    out.truncated_mass_fraction =
        specfun::bessel_j0(specfun::bessel_j1_zero(options.truncation_zero));
    return out;
}

// Targets --------------------------------------------------------------------

ApertureGrid two_point_target(std::size_t resolution, double separation,
                              std::size_t pixels_between) {
    if (pixels_between == 0 || pixels_between % 2 != 0 || pixels_between >= resolution) {
        throw DomainError("two_point_target: pixels_between must be even and below the resolution");
    }
    if (!(separation > 0.0)) throw DomainError("two_point_target: separation must be positive");
    const double pitch = separation / static_cast<double>(pixels_between);
    Raster r(resolution, pitch * static_cast<double>(resolution));
    const std::size_t c = resolution / 2;
    r.at(c, c - pixels_between / 2) = 1.0;
    r.at(c, c + pixels_between / 2) = 1.0;
    return ApertureGrid(std::move(r));
}

ApertureGrid point_target(std::size_t resolution, double side) {
    Raster r(resolution, side);
    r.at(resolution / 2, resolution / 2) = 1.0;
    return ApertureGrid(std::move(r));
}

ApertureGrid two_bar_target(std::size_t resolution, double side, double gap, double bar_width,
                            double bar_height) {
    Raster r(resolution, side);
    for (std::size_t i = 0; i < resolution; ++i) {
        for (std::size_t j = 0; j < resolution; ++j) {
            const Vec2 p = r.center(i, j);
            const double ax = std::abs(p.x);
            if (std::abs(p.y) < 0.5 * bar_height && ax > 0.5 * gap && ax < 0.5 * gap + bar_width) {
                r.at(i, j) = 1.0;
            }
        }
    }
    return ApertureGrid(std::move(r));
}

ApertureGrid glyph_target(std::size_t resolution, double side, double height) {
    static constexpr std::array<const char*, 7> kGlyph = {
        "####.",
        "#...#",
        "#...#",
        "####.",
        "#.#..",
        "#..#.",
        "#...#",
    };
    const double cell = height / 7.0;
    const double left = -2.5 * cell;
    const double top = 3.5 * cell;
    Raster r(resolution, side);
    for (std::size_t i = 0; i < resolution; ++i) {
        for (std::size_t j = 0; j < resolution; ++j) {
            const Vec2 p = r.center(i, j);
            const double gx = std::floor((p.x - left) / cell);
            const double gy = std::floor((top - p.y) / cell);
            if (gx < 0 || gx >= 5 || gy < 0 || gy >= 7) continue;
            if (kGlyph[static_cast<std::size_t>(gy)][static_cast<std::size_t>(gx)] == '#') {
                r.at(i, j) = 1.0;
            }
        }
    }
    return ApertureGrid(std::move(r));
}

ApertureGrid uniform_target(std::size_t resolution, double side, double value) {
    return ApertureGrid(Raster(resolution, side, value));
}

}  // namespace subrayleigh
