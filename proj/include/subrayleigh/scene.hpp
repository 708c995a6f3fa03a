#pragma once

#include "subrayleigh/convolution.hpp"
#include "subrayleigh/optics.hpp"
#include "subrayleigh/raster.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace subrayleigh {

/// Real object transmissivity A(r_o) in [0, 1] on a G x G grid (G >= 16).
class ApertureGrid {
public:
    ApertureGrid(std::size_t resolution, double side, std::vector<double> values);
    explicit ApertureGrid(Raster raster);

    const Raster& raster() const noexcept { return raster_; }
    std::size_t resolution() const noexcept { return raster_.resolution; }
    double side() const noexcept { return raster_.side; }
    double pitch() const noexcept { return raster_.pitch(); }
    const std::vector<double>& values() const noexcept { return raster_.values; }

    /// FNV-1a over the sample bytes and geometry.
    std::uint64_t content_hash() const;

private:
    Raster raster_;
};

/// A convolved with the unit-mass focusing kernel. Values may dip slightly below
/// zero next to edges since the kernel has negative rings.
struct SmoothedAperture {
    Raster raster;
    double max_value = 0.0;
    std::uint64_t source_hash = 0;
    double delta_k_t = 0.0;
    double truncation_radius = 0.0;
    /// Continuum kernel mass outside truncation_radius, relative to the full mass
    /// (J0 at the truncation zero; signed).
    double truncated_mass_fraction = 0.0;
};

struct SmoothOptions {
    int truncation_zero = 3;
    ConvolutionPath path = ConvolutionPath::fft;
    unsigned threads = 1;
};

/// Required resolution so that pitch <= first focusing zero / 4.
std::size_t required_resolution(double side, const SourceConfig& src);

/// Throws ResolutionError if the grid cannot resolve the focusing kernel.
void require_resolved_focusing(const ApertureGrid& grid, const SourceConfig& src);

/// Unit-mass focusing kernel sampled on the grid pitch (sum of samples == 1).
Kernel focusing_grid_kernel(const ApertureGrid& grid, const SourceConfig& src,
                            int truncation_zero = 3);

SmoothedAperture smooth(const ApertureGrid& grid, const SourceConfig& src,
                        const SmoothOptions& options = {});

// PGM ------------------------------------------------------------------------

/// Reads a square P2 or P5 PGM; gray levels map linearly to [0, 1] with maxval -> 1.
ApertureGrid load_pgm(const std::filesystem::path& path, double side = 1.0);
ApertureGrid parse_pgm(const std::string& bytes, double side = 1.0);

/// Peak-normalizes, applies value^gamma and writes a 16-bit P5 file.
void save_pgm(const Raster& raster, const std::filesystem::path& path, double gamma = 1.0);
void save_pgm(const ApertureGrid& grid, const std::filesystem::path& path, double gamma = 1.0);
std::string encode_pgm(const Raster& raster, double gamma = 1.0);

// Bundled test objects ------------------------------------------------------

/// Two single-pixel emitters on row G/2 at columns G/2 -/+ pixels_between/2. The
/// side is chosen so their separation is exactly `separation`.
ApertureGrid two_point_target(std::size_t resolution, double separation,
                              std::size_t pixels_between);

/// Single emitter at pixel (G/2, G/2).
ApertureGrid point_target(std::size_t resolution, double side);

/// Two vertical bars of width bar_width and height bar_height separated by an
/// edge-to-edge gap, centered in the frame.
ApertureGrid two_bar_target(std::size_t resolution, double side, double gap, double bar_width,
                            double bar_height);

/// Block letter "R" with stroke width height / 7, centered.
ApertureGrid glyph_target(std::size_t resolution, double side, double height);

/// Constant transmissivity over the whole frame.
ApertureGrid uniform_target(std::size_t resolution, double side, double value = 1.0);

}  // namespace subrayleigh
