#include "subrayleigh/convolution.hpp"

#include "subrayleigh/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace subrayleigh {
namespace {

// FFTW's planner and plan destruction are not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwDeleter {
    void operator()(void* p) const { fftw_free(p); }
};

template <class T>
std::unique_ptr<T[], FftwDeleter> fftw_array(std::size_t count) {
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * count));
    if (p == nullptr) throw std::bad_alloc();
    return std::unique_ptr<T[], FftwDeleter>(p);
}

double ipow(double base, int exponent) {
    double result = 1.0;
    while (exponent > 0) {
        if (exponent & 1) result *= base;
        base *= base;
        exponent >>= 1;
    }
    return result;
}

}  // namespace

double Kernel::sum() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
}

Kernel Kernel::radial(double pitch, std::size_t max_half_width, double truncation_radius,
                      const std::function<double(double)>& profile) {
    if (!(pitch > 0.0) || !(truncation_radius >= 0.0)) {
        throw DomainError("Kernel::radial: pitch and truncation radius must be positive");
    }
    Kernel k;
    const double reach = std::floor(truncation_radius / pitch);
    k.half_width = std::min<std::size_t>(max_half_width, static_cast<std::size_t>(reach));
    const auto h = static_cast<long>(k.half_width);
    k.values.assign(k.width() * k.width(), 0.0);
    std::size_t idx = 0;
    for (long dr = -h; dr <= h; ++dr) {
        for (long dc = -h; dc <= h; ++dc, ++idx) {
            const double d = pitch * std::hypot(static_cast<double>(dr), static_cast<double>(dc));
            if (d <= truncation_radius) k.values[idx] = profile(d);
        }
    }
    return k;
}

Kernel Kernel::pow(int exponent) const {
    if (exponent < 1) throw RangeError("Kernel::pow: exponent must be >= 1");
    Kernel out = *this;
    for (double& v : out.values) v = ipow(v, exponent);
    return out;
}

std::size_t fast_fft_size(std::size_t n) {
    if (n <= 1) return 1;
    for (std::size_t m = n;; ++m) {
        std::size_t r = m;
        for (std::size_t f : {2u, 3u, 5u, 7u}) {
            while (r % f == 0) r /= f;
        }
        if (r == 1) return m;
    }
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body) {
    if (count == 0) return;
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        body(0, count);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    pool.reserve(threads);
    const std::size_t chunk = (count + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&body, &errors, t, begin, end] {
            try {
                body(begin, end);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

// ---------------------------------------------------------------------------

struct FftConvolver::Workspace::Buffers {
    std::unique_ptr<double[], FftwDeleter> real;
    std::unique_ptr<fftw_complex[], FftwDeleter> spectrum;
};

FftConvolver::Workspace::Workspace(std::unique_ptr<Buffers> buffers)
    : buffers_(std::move(buffers)) {}
FftConvolver::Workspace::Workspace(Workspace&&) noexcept = default;
FftConvolver::Workspace& FftConvolver::Workspace::operator=(Workspace&&) noexcept = default;
FftConvolver::Workspace::~Workspace() = default;

struct FftConvolver::Impl {
    std::size_t resolution = 0;
    std::size_t padded = 0;
    std::size_t spectrum_size = 0;
    std::unique_ptr<fftw_complex[], FftwDeleter> kernel_spectrum;
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;

    ~Impl() {
        std::lock_guard lock(planner_mutex());
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
    }
};

FftConvolver::FftConvolver(std::size_t resolution, const Kernel& kernel)
    : impl_(std::make_unique<Impl>()) {
    if (resolution == 0) throw DomainError("FftConvolver: empty grid");
    auto& d = *impl_;
    d.resolution = resolution;
    d.padded = fast_fft_size(resolution + kernel.half_width);
    d.spectrum_size = d.padded * (d.padded / 2 + 1);
    const auto p = d.padded;
    const int n = static_cast<int>(p);

    auto real = fftw_array<double>(p * p);
    d.kernel_spectrum = fftw_array<fftw_complex>(d.spectrum_size);
    {
        std::lock_guard lock(planner_mutex());
        d.forward = fftw_plan_dft_r2c_2d(n, n, real.get(), d.kernel_spectrum.get(), FFTW_ESTIMATE);
        d.backward = fftw_plan_dft_c2r_2d(n, n, d.kernel_spectrum.get(), real.get(), FFTW_ESTIMATE);
    }
    if (!d.forward || !d.backward) throw Error("FftConvolver: FFTW planning failed");

    // Kernel placed with wrap-around so that offset 0 sits at index (0, 0).
    std::fill(real.get(), real.get() + p * p, 0.0);
    const auto h = static_cast<long>(kernel.half_width);
    const auto lp = static_cast<long>(p);
    for (long dr = -h; dr <= h; ++dr) {
        for (long dc = -h; dc <= h; ++dc) {
            const auto r = static_cast<std::size_t>((dr + lp) % lp);
            const auto c = static_cast<std::size_t>((dc + lp) % lp);
            real[r * p + c] = kernel.at(dr, dc);
        }
    }
    fftw_execute_dft_r2c(d.forward, real.get(), d.kernel_spectrum.get());
    const double scale = 1.0 / static_cast<double>(p * p);
    for (std::size_t i = 0; i < d.spectrum_size; ++i) {
        d.kernel_spectrum[i][0] *= scale;
        d.kernel_spectrum[i][1] *= scale;
    }
}

FftConvolver::FftConvolver(FftConvolver&&) noexcept = default;
FftConvolver& FftConvolver::operator=(FftConvolver&&) noexcept = default;
FftConvolver::~FftConvolver() = default;

std::size_t FftConvolver::padded_size() const { return impl_->padded; }

FftConvolver::Workspace FftConvolver::make_workspace() const {
    auto buffers = std::make_unique<Workspace::Buffers>();
    buffers->real = fftw_array<double>(impl_->padded * impl_->padded);
    buffers->spectrum = fftw_array<fftw_complex>(impl_->spectrum_size);
    return Workspace(std::move(buffers));
}

void FftConvolver::apply(std::span<const double> input, std::span<double> output,
                         Workspace& ws) const {
    const auto& d = *impl_;
    const std::size_t g = d.resolution;
    const std::size_t p = d.padded;
    if (input.size() != g * g || output.size() != g * g) {
        throw DomainError("FftConvolver::apply: buffer size mismatch");
    }
    double* real = ws.buffers_->real.get();
    fftw_complex* spec = ws.buffers_->spectrum.get();
    std::fill(real, real + p * p, 0.0);
    for (std::size_t r = 0; r < g; ++r) {
        std::copy_n(input.data() + r * g, g, real + r * p);
    }
    fftw_execute_dft_r2c(d.forward, real, spec);
    for (std::size_t i = 0; i < d.spectrum_size; ++i) {
        const double ar = spec[i][0];
        const double ai = spec[i][1];
        const double br = d.kernel_spectrum[i][0];
        const double bi = d.kernel_spectrum[i][1];
        spec[i][0] = ar * br - ai * bi;
        spec[i][1] = ar * bi + ai * br;
    }
    fftw_execute_dft_c2r(d.backward, spec, real);
    for (std::size_t r = 0; r < g; ++r) {
        std::copy_n(real + r * p, g, output.data() + r * g);
    }
}

std::vector<double> convolve_same(std::span<const double> input, std::size_t resolution,
                                  const Kernel& kernel, ConvolutionPath path, unsigned threads) {
    if (input.size() != resolution * resolution) {
        throw DomainError("convolve_same: input size does not match resolution^2");
    }
    std::vector<double> out(input.size(), 0.0);
    if (path == ConvolutionPath::fft) {
        FftConvolver conv(resolution, kernel);
        auto ws = conv.make_workspace();
        conv.apply(input, out, ws);
        return out;
    }
    const auto g = static_cast<long>(resolution);
    const auto h = static_cast<long>(kernel.half_width);
    parallel_for(resolution, threads, [&](std::size_t begin, std::size_t end) {
        for (auto i = static_cast<long>(begin); i < static_cast<long>(end); ++i) {
            for (long j = 0; j < g; ++j) {
                double acc = 0.0;
                for (long dr = std::max(-h, i - g + 1); dr <= std::min(h, i); ++dr) {
                    const double* row = input.data() + (i - dr) * g;
                    for (long dc = std::max(-h, j - g + 1); dc <= std::min(h, j); ++dc) {
                        acc += row[j - dc] * kernel.at(dr, dc);
                    }
                }
                out[static_cast<std::size_t>(i * g + j)] = acc;
            }
        }
    });
    return out;
}

}  // namespace subrayleigh
