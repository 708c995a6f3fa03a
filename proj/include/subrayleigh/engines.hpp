#pragma once

#include "subrayleigh/convolution.hpp"
#include "subrayleigh/optics.hpp"
#include "subrayleigh/raster.hpp"
#include "subrayleigh/scene.hpp"

#include <optional>
#include <string>
#include <vector>

namespace subrayleigh {

enum class EngineKind {
    conventional_coherent,
    conventional_incoherent,
    coincidence,
    sql_coherent,
    sql_coherent_exact,
    sql_incoherent,
    heisenberg_coherent,
    heisenberg_incoherent,
};

enum class Coherence { coherent, incoherent };

struct EngineMode {
    EngineKind kind = EngineKind::conventional_coherent;
    int photon_number = 1;

    /// Canonical string, e.g. "sql-coherent:5" or "conventional-incoherent".
    std::string to_string() const;

    /// Accepts the canonical strings plus the shorthands conventional, sql:N and
    /// heisenberg:N (coherent variants) and sql-coherent-exact:N.
    static EngineMode parse(const std::string& text);
};

/// Physical scalar stripped from the pixel data, stored as a natural log.
struct LogScalar {
    std::string name;
    double log_value = 0.0;
};

struct NormalizationRecord {
    double raw_peak = 0.0;      // may underflow; see log_raw_peak
    double log_raw_peak = 0.0;
    std::vector<LogScalar> scalars;

    std::optional<double> find(const std::string& name) const;
};

enum class CoordinateFrame { object_registered };

/// Peak-normalized image sampled at u = -r_i / m on the object grid: upright and
/// aligned with the aperture. The physical image is this array inverted and
/// magnified by m.
struct ImageGrid {
    Raster raster;
    EngineMode mode;
    NormalizationRecord normalization;
    CoordinateFrame frame = CoordinateFrame::object_registered;

    std::size_t resolution() const { return raster.resolution; }
    const std::vector<double>& values() const { return raster.values; }
};

struct EngineOptions {
    ConvolutionPath path = ConvolutionPath::fft;
    int psf_truncation_zero = 8;
    int focusing_truncation_zero = 3;
    std::size_t exact_max_resolution = 128;
    /// s_F / (pi R^2) of the threshold screen; only feeds the recorded gamma.
    double screen_cell_fraction = 1.0;
    /// 0 means hardware concurrency. Output is bitwise independent of this.
    unsigned threads = 1;
};

/// PSF kernel sampled on the grid pitch, truncated at the given somb zero and at
/// the frame span. `wavenumber_factor` = N gives the k -> N k kernel.
Kernel psf_grid_kernel(const OpticalConfig& cfg, double pitch, std::size_t resolution,
                       int truncation_zero = 8, int wavenumber_factor = 1);

ImageGrid image_coherent(const ApertureGrid& grid, const OpticalConfig& cfg,
                         const EngineOptions& options = {});
ImageGrid image_incoherent(const ApertureGrid& grid, const OpticalConfig& cfg,
                           const EngineOptions& options = {});

/// N-fold coincidence on a conventional image: elementwise N-th power, renormalized.
ImageGrid coincidence_postprocess(const ImageGrid& image, int photon_number);

/// |(Ã^N * K^N)(u)|^2, the focused-spot approximation.
ImageGrid image_sql_coherent(const ApertureGrid& grid, const OpticalConfig& cfg,
                             const SourceConfig& src, const EngineOptions& options = {});

/// |sum_{r_o} Q(u, r_o)^N|^2 with Q(u, .) = (A K(. - u)) * F, no focused-spot approximation.
ImageGrid image_sql_coherent_exact(const ApertureGrid& grid, const OpticalConfig& cfg,
                                   const SourceConfig& src, const EngineOptions& options = {});

/// (|Ã|^{2N} * K^{2N})(u). Identical pixels for Fock and coherent-mixture sources.
ImageGrid image_sql_incoherent(const ApertureGrid& grid, const OpticalConfig& cfg,
                               const SourceConfig& src, const EngineOptions& options = {});

/// Threshold-screen imaging with K_N (k -> N k).
ImageGrid image_heisenberg(const ApertureGrid& grid, const OpticalConfig& cfg,
                           const SourceConfig& src, Coherence coherence,
                           const EngineOptions& options = {});

/// Dispatches on mode.kind; the mode's photon number overrides src.photon_number.
ImageGrid render(const EngineMode& mode, const ApertureGrid& grid, const OpticalConfig& cfg,
                 const SourceConfig& src, const EngineOptions& options = {});

/// ||a - b||_2 / ||b||_2 over two peak-normalized images of the same size.
double normalized_rms(const ImageGrid& a, const ImageGrid& b);

}  // namespace subrayleigh
