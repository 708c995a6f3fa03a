#include "subrayleigh/engines.hpp"

#include "subrayleigh/error.hpp"
#include "subrayleigh/specfun.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

namespace subrayleigh {
namespace {

double ipow(double base, int exponent) {
    double result = 1.0;
    while (exponent > 0) {
        if (exponent & 1) result *= base;
        base *= base;
        exponent >>= 1;
    }
    return result;
}

ImageGrid finalize(Raster raster, EngineMode mode, std::vector<LogScalar> scalars) {
    for (double& v : raster.values) {
        if (!std::isfinite(v)) throw DataError(mode.to_string() + ": non-finite image value");
        if (v < 0.0) v = 0.0;  // FFT round-off on nonnegative sums
    }
    const double peak = raster.max_value();
    if (!(peak > 0.0)) {
        throw DataError(mode.to_string() + ": image has zero peak (empty aperture?)");
    }
    for (double& v : raster.values) v /= peak;
    ImageGrid image;
    image.raster = std::move(raster);
    image.mode = mode;
    image.normalization.raw_peak = peak;
    image.normalization.log_raw_peak = std::log(peak);
    image.normalization.scalars = std::move(scalars);
    return image;
}

std::vector<double> squared(std::vector<double> v) {
    for (double& x : v) x *= x;
    return v;
}

void check_photon_number(int n, const char* fn) {
    if (n < 1) throw RangeError(std::string(fn) + ": N must be >= 1");
}

LogScalar sql_prefactor(const SourceConfig& src) {
    const double n = src.photon_number;
    return {"sql_prefactor",
            std::log(src.delta_k_t * src.delta_k_t * src.object_area / (16.0 * std::numbers::pi)) +
                n * std::log(efficiency_xi(src))};
}

std::vector<LogScalar> conventional_scalars(const OpticalConfig& cfg) {
    return {{"psf_prefactor", std::log(psf_prefactor(cfg))}};
}

SmoothedAperture smoothed(const ApertureGrid& grid, const SourceConfig& src,
                          const EngineOptions& options) {
    return smooth(grid, src, {options.focusing_truncation_zero, options.path, options.threads});
}

Raster powered_source(const SmoothedAperture& at, int exponent, bool absolute) {
    Raster s = at.raster;
    for (double& v : s.values) v = ipow(absolute ? std::abs(v) : v, exponent);
    return s;
}

}  // namespace

// Mode strings ---------------------------------------------------------------

std::string EngineMode::to_string() const {
    const std::string n = ":" + std::to_string(photon_number);
    switch (kind) {
        case EngineKind::conventional_coherent: return "conventional-coherent";
        case EngineKind::conventional_incoherent: return "conventional-incoherent";
        case EngineKind::coincidence: return "coincidence" + n;
        case EngineKind::sql_coherent: return "sql-coherent" + n;
        case EngineKind::sql_coherent_exact: return "sql-coherent-exact" + n;
        case EngineKind::sql_incoherent: return "sql-incoherent" + n;
        case EngineKind::heisenberg_coherent: return "heisenberg-coherent" + n;
        case EngineKind::heisenberg_incoherent: return "heisenberg-incoherent" + n;
    }
    return "unknown";
}

EngineMode EngineMode::parse(const std::string& text) {
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    if (colon == std::string::npos) {
        if (name == "conventional" || name == "conventional-coherent") {
            return {EngineKind::conventional_coherent, 1};
        }
        if (name == "conventional-incoherent") return {EngineKind::conventional_incoherent, 1};
        throw DomainError("unknown engine mode '" + text + "'");
    }
    const std::string count = text.substr(colon + 1);
    int n = 0;
    auto [ptr, ec] = std::from_chars(count.data(), count.data() + count.size(), n);
    if (ec != std::errc() || ptr != count.data() + count.size() || n < 1) {
        throw DomainError("engine mode '" + text + "' needs a photon number >= 1");
    }
    if (name == "coincidence") return {EngineKind::coincidence, n};
    if (name == "sql" || name == "sql-coherent") return {EngineKind::sql_coherent, n};
    if (name == "sql-coherent-exact") return {EngineKind::sql_coherent_exact, n};
    if (name == "sql-incoherent") return {EngineKind::sql_incoherent, n};
    if (name == "heisenberg" || name == "heisenberg-coherent") {
        return {EngineKind::heisenberg_coherent, n};
    }
    if (name == "heisenberg-incoherent") return {EngineKind::heisenberg_incoherent, n};
    throw DomainError("unknown engine mode '" + text + "'");
}

std::optional<double> NormalizationRecord::find(const std::string& name) const {
    for (const auto& s : scalars) {
        if (s.name == name) return s.log_value;
    }
    return std::nullopt;
}

// Kernels --------------------------------------------------------------------

Kernel psf_grid_kernel(const OpticalConfig& cfg, double pitch, std::size_t resolution,
                       int truncation_zero, int wavenumber_factor) {
    const OpticalConfig scaled = cfg.with_wavenumber_scaled(wavenumber_factor);
    const double radius = specfun::bessel_j1_zero(truncation_zero) / scaled.psf_scale();
    return Kernel::radial(pitch, resolution - 1, radius,
                          [&scaled](double d) { return psf_radial(scaled, d); });
}

// Conventional ---------------------------------------------------------------

ImageGrid image_coherent(const ApertureGrid& grid, const OpticalConfig& cfg,
                         const EngineOptions& options) {
    cfg.validate();
    const Kernel k = psf_grid_kernel(cfg, grid.pitch(), grid.resolution(), options.psf_truncation_zero);
    Raster out(grid.resolution(), grid.side(),
               squared(convolve_same(grid.values(), grid.resolution(), k, options.path,
                                     options.threads)));
    return finalize(std::move(out), {EngineKind::conventional_coherent, 1}, conventional_scalars(cfg));
}

ImageGrid image_incoherent(const ApertureGrid& grid, const OpticalConfig& cfg,
                           const EngineOptions& options) {
    cfg.validate();
    const Kernel k2 =
        psf_grid_kernel(cfg, grid.pitch(), grid.resolution(), options.psf_truncation_zero).pow(2);
    std::vector<double> intensity = grid.values();
    for (double& v : intensity) v *= v;
    Raster out(grid.resolution(), grid.side(),
               convolve_same(intensity, grid.resolution(), k2, options.path, options.threads));
    auto scalars = conventional_scalars(cfg);
    scalars.push_back({"incoherent_prefactor",
                       -std::log(2.0 * std::numbers::pi * cfg.wavenumber * cfg.wavenumber)});
    return finalize(std::move(out), {EngineKind::conventional_incoherent, 1}, std::move(scalars));
}

ImageGrid coincidence_postprocess(const ImageGrid& image, int photon_number) {
    check_photon_number(photon_number, "coincidence_postprocess");
    if (image.mode.kind != EngineKind::conventional_coherent &&
        image.mode.kind != EngineKind::conventional_incoherent) {
        throw DomainError("coincidence_postprocess: input must come from a conventional engine");
    }
    Raster out = image.raster;
    for (double& v : out.values) v = ipow(v, photon_number);
    auto scalars = image.normalization.scalars;
    scalars.push_back({"coincidence_factorial", -std::lgamma(photon_number + 1.0)});
    ImageGrid result = finalize(std::move(out), {EngineKind::coincidence, photon_number},
                                std::move(scalars));
    result.normalization.log_raw_peak =
        photon_number * image.normalization.log_raw_peak + result.normalization.log_raw_peak;
    result.normalization.raw_peak = std::exp(result.normalization.log_raw_peak);
    return result;
}

// Standard quantum limit -----------------------------------------------------

ImageGrid image_sql_coherent(const ApertureGrid& grid, const OpticalConfig& cfg,
                             const SourceConfig& src, const EngineOptions& options) {
    cfg.validate();
    src.validate();
    require_focused_spot(cfg, src);
    const int n = src.photon_number;
    const SmoothedAperture at = smoothed(grid, src, options);
    const Raster source = powered_source(at, n, false);
    const Kernel kn =
        psf_grid_kernel(cfg, grid.pitch(), grid.resolution(), options.psf_truncation_zero).pow(n);
    Raster out(grid.resolution(), grid.side(),
               squared(convolve_same(source.values, grid.resolution(), kn, options.path,
                                     options.threads)));
    return finalize(std::move(out), {EngineKind::sql_coherent, n},
                    {sql_prefactor(src), {"fock_norm", std::log(fock_norm(src))}});
}

ImageGrid image_sql_coherent_exact(const ApertureGrid& grid, const OpticalConfig& cfg,
                                   const SourceConfig& src, const EngineOptions& options) {
    cfg.validate();
    src.validate();
    const std::size_t g = grid.resolution();
    if (g > options.exact_max_resolution) {
        throw SizeError("image_sql_coherent_exact: G = " + std::to_string(g) +
                        " exceeds the cost guard " + std::to_string(options.exact_max_resolution));
    }
    require_resolved_focusing(grid, src);
    const int n = src.photon_number;
    const Kernel k = psf_grid_kernel(cfg, grid.pitch(), g, options.psf_truncation_zero);
    const Kernel f = focusing_grid_kernel(grid, src, options.focusing_truncation_zero);
    const auto& a = grid.values();
    const auto lg = static_cast<long>(g);

    // Bounding box of the aperture support; g_u vanishes outside it.
    long r0 = lg, r1 = -1, c0 = lg, c1 = -1;
    for (long i = 0; i < lg; ++i) {
        for (long j = 0; j < lg; ++j) {
            if (a[static_cast<std::size_t>(i * lg + j)] != 0.0) {
                r0 = std::min(r0, i);
                r1 = std::max(r1, i);
                c0 = std::min(c0, j);
                c1 = std::max(c1, j);
            }
        }
    }
    Raster out(g, grid.side());
    if (r1 < 0) return finalize(std::move(out), {EngineKind::sql_coherent_exact, n}, {});

    const auto hf = static_cast<long>(f.half_width);
    std::optional<FftConvolver> conv;
    if (options.path == ConvolutionPath::fft) conv.emplace(g, f);

    parallel_for(g * g, options.threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> field(g * g, 0.0);
        std::vector<double> q(g * g, 0.0);
        std::optional<FftConvolver::Workspace> ws;
        if (conv) ws.emplace(conv->make_workspace());
        for (std::size_t idx = begin; idx < end; ++idx) {
            const auto ui = static_cast<long>(idx / g);
            const auto uj = static_cast<long>(idx % g);
            for (long i = r0; i <= r1; ++i) {
                for (long j = c0; j <= c1; ++j) {
                    const auto at = static_cast<std::size_t>(i * lg + j);
                    field[at] = a[at] * k.value_or_zero(i - ui, j - uj);
                }
            }
            double amplitude = 0.0;
            if (conv) {
                conv->apply(field, q, *ws);
                for (double v : q) amplitude += ipow(v, n);
            } else {
                const long qr0 = std::max(0L, r0 - hf), qr1 = std::min(lg - 1, r1 + hf);
                const long qc0 = std::max(0L, c0 - hf), qc1 = std::min(lg - 1, c1 + hf);
                for (long i = qr0; i <= qr1; ++i) {
                    for (long j = qc0; j <= qc1; ++j) {
                        double acc = 0.0;
                        for (long dr = std::max(-hf, i - r1); dr <= std::min(hf, i - r0); ++dr) {
                            for (long dc = std::max(-hf, j - c1); dc <= std::min(hf, j - c0); ++dc) {
                                acc += field[static_cast<std::size_t>((i - dr) * lg + j - dc)] *
                                       f.at(dr, dc);
                            }
                        }
                        amplitude += ipow(acc, n);
                    }
                }
            }
            out.values[idx] = amplitude * amplitude;
        }
    });
    return finalize(std::move(out), {EngineKind::sql_coherent_exact, n},
                    {sql_prefactor(src), {"fock_norm", std::log(fock_norm(src))}});
}

ImageGrid image_sql_incoherent(const ApertureGrid& grid, const OpticalConfig& cfg,
                               const SourceConfig& src, const EngineOptions& options) {
    cfg.validate();
    src.validate();
    require_focused_spot(cfg, src);
    const int n = src.photon_number;
    const SmoothedAperture at = smoothed(grid, src, options);
    const Raster source = powered_source(at, 2 * n, true);
    const Kernel k2n =
        psf_grid_kernel(cfg, grid.pitch(), grid.resolution(), options.psf_truncation_zero)
            .pow(2 * n);
    Raster out(grid.resolution(), grid.side(),
               convolve_same(source.values, grid.resolution(), k2n, options.path, options.threads));
    return finalize(std::move(out), {EngineKind::sql_incoherent, n},
                    {{"xi_power", n * std::log(efficiency_xi(src))},
                     {"source_efficiency", log_source_efficiency(src)}});
}

// Heisenberg limit -----------------------------------------------------------

ImageGrid image_heisenberg(const ApertureGrid& grid, const OpticalConfig& cfg,
                           const SourceConfig& src, Coherence coherence,
                           const EngineOptions& options) {
    cfg.validate();
    src.validate();
    require_focused_spot(cfg, src);
    if (!(options.screen_cell_fraction > 0.0 && options.screen_cell_fraction <= 1.0)) {
        throw RangeError("image_heisenberg: screen_cell_fraction must lie in (0, 1]");
    }
    const int n = src.photon_number;
    const SmoothedAperture at = smoothed(grid, src, options);
    const Kernel kn =
        psf_grid_kernel(cfg, grid.pitch(), grid.resolution(), options.psf_truncation_zero, n);
    const double pupil = std::numbers::pi * cfg.lens_radius * cfg.lens_radius;
    std::vector<LogScalar> scalars = {
        {"gamma", std::log(heisenberg_gamma(cfg, options.screen_cell_fraction * pupil, n))}};

    if (coherence == Coherence::coherent) {
        const Raster source = powered_source(at, n, false);
        Raster out(grid.resolution(), grid.side(),
                   squared(convolve_same(source.values, grid.resolution(), kn, options.path,
                                         options.threads)));
        return finalize(std::move(out), {EngineKind::heisenberg_coherent, n}, std::move(scalars));
    }
    const Raster source = powered_source(at, 2 * n, true);
    Raster out(grid.resolution(), grid.side(),
               convolve_same(source.values, grid.resolution(), kn.pow(2), options.path,
                             options.threads));
    return finalize(std::move(out), {EngineKind::heisenberg_incoherent, n}, std::move(scalars));
}

ImageGrid render(const EngineMode& mode, const ApertureGrid& grid, const OpticalConfig& cfg,
                 const SourceConfig& src, const EngineOptions& options) {
    SourceConfig s = src;
    s.photon_number = mode.photon_number;
    switch (mode.kind) {
        case EngineKind::conventional_coherent: return image_coherent(grid, cfg, options);
        case EngineKind::conventional_incoherent: return image_incoherent(grid, cfg, options);
        case EngineKind::coincidence:
            return coincidence_postprocess(image_coherent(grid, cfg, options), mode.photon_number);
        case EngineKind::sql_coherent: return image_sql_coherent(grid, cfg, s, options);
        case EngineKind::sql_coherent_exact: return image_sql_coherent_exact(grid, cfg, s, options);
        case EngineKind::sql_incoherent: return image_sql_incoherent(grid, cfg, s, options);
        case EngineKind::heisenberg_coherent:
            return image_heisenberg(grid, cfg, s, Coherence::coherent, options);
        case EngineKind::heisenberg_incoherent:
            return image_heisenberg(grid, cfg, s, Coherence::incoherent, options);
    }
    throw DomainError("render: unknown engine kind");
}

double normalized_rms(const ImageGrid& a, const ImageGrid& b) {
    if (a.values().size() != b.values().size()) {
        throw DomainError("normalized_rms: image sizes differ");
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) {
        const double d = a.values()[i] - b.values()[i];
        num += d * d;
        den += b.values()[i] * b.values()[i];
    }
    return std::sqrt(num / den);
}

}  // namespace subrayleigh
