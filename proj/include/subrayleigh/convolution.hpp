#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace subrayleigh {

enum class ConvolutionPath { fft, direct };

/// Centered (2H+1) x (2H+1) kernel, row-major, entry (dr, dc) at offset
/// (dr + H) * width + (dc + H).
struct Kernel {
    std::size_t half_width = 0;
    std::vector<double> values;

    std::size_t width() const { return 2 * half_width + 1; }
    double at(long dr, long dc) const {
        const auto h = static_cast<long>(half_width);
        return values[static_cast<std::size_t>((dr + h) * static_cast<long>(width()) + dc + h)];
    }
    /// Zero outside the support.
    double value_or_zero(long dr, long dc) const {
        const auto h = static_cast<long>(half_width);
        if (dr < -h || dr > h || dc < -h || dc > h) return 0.0;
        return at(dr, dc);
    }
    double sum() const;

    /// Samples profile(|d|) at pixel offsets d = pitch * (dr, dc) with |d| <= truncation_radius.
    /// The half width is min(max_half_width, floor(truncation_radius / pitch)).
    static Kernel radial(double pitch, std::size_t max_half_width, double truncation_radius,
                         const std::function<double(double)>& profile);

    /// Elementwise integer power.
    Kernel pow(int exponent) const;
};

/// out(i, j) = sum_{dr, dc} in(i - dr, j - dc) * k(dr, dc) on a G x G grid, zero outside.
std::vector<double> convolve_same(std::span<const double> input, std::size_t resolution,
                                  const Kernel& kernel, ConvolutionPath path,
                                  unsigned threads = 1);

/// Reusable FFT convolution of G x G inputs with one fixed kernel. apply() is safe to
/// call concurrently provided every caller owns its Workspace.
class FftConvolver {
public:
    class Workspace {
    public:
        Workspace(Workspace&&) noexcept;
        Workspace& operator=(Workspace&&) noexcept;
        ~Workspace();

    private:
        friend class FftConvolver;
        struct Buffers;
        explicit Workspace(std::unique_ptr<Buffers> buffers);
        std::unique_ptr<Buffers> buffers_;
    };

    FftConvolver(std::size_t resolution, const Kernel& kernel);
    FftConvolver(FftConvolver&&) noexcept;
    FftConvolver& operator=(FftConvolver&&) noexcept;
    ~FftConvolver();

    Workspace make_workspace() const;
    void apply(std::span<const double> input, std::span<double> output, Workspace& ws) const;

    std::size_t padded_size() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Smallest n' >= n whose prime factors are all in {2, 3, 5, 7}.
std::size_t fast_fft_size(std::size_t n);

/// Runs body(begin, end) over [0, count) split into contiguous chunks, one per thread.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace subrayleigh
