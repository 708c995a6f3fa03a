#pragma once
// Brute-force reference implementations used only by the tests. None of these call
// into the library, so agreement is a genuine cross-check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace oracle {

// Tabulated zeros of J1 (Abramowitz & Stegun, Table 9.5).
inline constexpr double kJ1Zeros[] = {3.8317059702075123, 7.0155866698156188,
                                      10.173468135062723, 13.323691936314223,
                                      16.470630050877634, 19.615858510468243,
                                      22.760084380592772, 25.903672087618382};

inline double j1_zero(int n) { return kJ1Zeros[n - 1]; }

/// J_n(x) = (1/2pi) * integral over one period of cos(n t - x sin t). The integrand is
/// smooth and periodic, so the trapezoid rule converges geometrically.
inline double bessel_jn(int n, double x) {
    const int m = 2 * static_cast<int>(std::abs(x) + 64.0);
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
        const double t = 2.0 * std::numbers::pi * i / m;
        acc += std::cos(n * t - x * std::sin(t));
    }
    return acc / m;
}

inline double somb(double x) {
    if (x == 0.0) return 1.0;
    return 2.0 * bessel_jn(1, x) / x;
}

/// Fraction of somb^exponent(r) r dr on [0, cutoff] inside `radius`; composite Simpson
/// with `intervals` panels on each range.
inline double encircled_energy(int exponent, double radius, double cutoff, int intervals) {
    const auto simpson = [&](double b) {
        const double h = b / intervals;
        double acc = 0.0;
        for (int i = 0; i <= intervals; ++i) {
            const double r = i * h;
            const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            acc += w * std::pow(somb(r), exponent) * r;
        }
        return acc * h / 3.0;
    };
    return simpson(radius) / simpson(cutoff);
}

struct Grid {
    std::size_t g = 0;
    double side = 0.0;
    std::vector<double> v;
    double pitch() const { return side / static_cast<double>(g); }
};

/// Radial kernel sampled at integer pixel offsets, keyed by (dr, dc) in [-(g-1), g-1]^2,
/// zero beyond `radius`.
struct OffsetTable {
    long span = 0;
    std::vector<double> v;
    double operator()(long dr, long dc) const {
        if (std::abs(dr) > span || std::abs(dc) > span) return 0.0;
        return v[static_cast<std::size_t>((dr + span) * (2 * span + 1) + dc + span)];
    }
};

template <class F>
OffsetTable offset_table(long span, double pitch, double radius, F profile) {
    OffsetTable t;
    t.span = span;
    const long w = 2 * span + 1;
    t.v.assign(static_cast<std::size_t>(w * w), 0.0);
    for (long dr = -span; dr <= span; ++dr) {
        for (long dc = -span; dc <= span; ++dc) {
            const double d = pitch * std::hypot(static_cast<double>(dr), static_cast<double>(dc));
            if (d <= radius) t.v[static_cast<std::size_t>((dr + span) * w + dc + span)] = profile(d);
        }
    }
    return t;
}

/// Amplitude PSF somb(scale * d); truncated at the 8th zero (and the frame span).
inline OffsetTable psf_table(std::size_t g, double pitch, double scale) {
    return offset_table(static_cast<long>(g) - 1, pitch, j1_zero(8) / scale,
                        [scale](double d) { return somb(scale * d); });
}

/// Focusing kernel somb(dk d / 2) truncated at its 3rd zero, scaled to unit discrete sum.
inline OffsetTable focusing_table(std::size_t g, double pitch, double delta_k_t) {
    const double radius = 2.0 * j1_zero(3) / delta_k_t;
    const long span = std::min(static_cast<long>(g) - 1, static_cast<long>(radius / pitch) + 1);
    OffsetTable t = offset_table(span, pitch, radius,
                                 [delta_k_t](double d) { return somb(delta_k_t * d / 2.0); });
    double sum = 0.0;
    for (double x : t.v) sum += x;
    for (double& x : t.v) x /= sum;
    return t;
}

/// out(u) = sum_r in(r) k(u - r) on the same G x G grid.
inline std::vector<double> convolve(const std::vector<double>& in, std::size_t g,
                                    const OffsetTable& k) {
    const long lg = static_cast<long>(g);
    std::vector<double> out(g * g, 0.0);
    for (long ui = 0; ui < lg; ++ui) {
        for (long uj = 0; uj < lg; ++uj) {
            double acc = 0.0;
            for (long i = std::max(0L, ui - k.span); i <= std::min(lg - 1, ui + k.span); ++i) {
                for (long j = std::max(0L, uj - k.span); j <= std::min(lg - 1, uj + k.span); ++j) {
                    const double a = in[static_cast<std::size_t>(i * lg + j)];
                    if (a != 0.0) acc += a * k(ui - i, uj - j);
                }
            }
            out[static_cast<std::size_t>(ui * lg + uj)] = acc;
        }
    }
    return out;
}

inline OffsetTable power(OffsetTable t, int p) {
    for (double& x : t.v) x = std::pow(x, p);
    return t;
}

inline std::vector<double> power(std::vector<double> v, int p, bool absolute = false) {
    for (double& x : v) x = std::pow(absolute ? std::abs(x) : x, p);
    return v;
}

inline std::vector<double> peak_normalized(std::vector<double> v) {
    for (double& x : v) x = std::max(x, 0.0);
    const double peak = *std::max_element(v.begin(), v.end());
    for (double& x : v) x /= peak;
    return v;
}

/// |sum_{r_o} Q(u, r_o)^N|^2 with Q(u, .) = (A K(. - u)) * F, evaluated term by term
/// by scattering each object pixel through F.
inline std::vector<double> exact_sql(const std::vector<double>& a, std::size_t g,
                                     const OffsetTable& k, const OffsetTable& f, int n) {
    const long lg = static_cast<long>(g);
    std::vector<double> out(g * g, 0.0);
    std::vector<double> q(g * g);
    for (long ui = 0; ui < lg; ++ui) {
        for (long uj = 0; uj < lg; ++uj) {
            std::fill(q.begin(), q.end(), 0.0);
            for (long i = 0; i < lg; ++i) {
                for (long j = 0; j < lg; ++j) {
                    const double field = a[static_cast<std::size_t>(i * lg + j)] * k(i - ui, j - uj);
                    if (field == 0.0) continue;
                    for (long oi = std::max(0L, i - f.span); oi <= std::min(lg - 1, i + f.span); ++oi) {
                        for (long oj = std::max(0L, j - f.span); oj <= std::min(lg - 1, j + f.span); ++oj) {
                            q[static_cast<std::size_t>(oi * lg + oj)] += field * f(oi - i, oj - j);
                        }
                    }
                }
            }
            double amp = 0.0;
            for (double x : q) amp += std::pow(x, n);
            out[static_cast<std::size_t>(ui * lg + uj)] = amp * amp;
        }
    }
    return out;
}

inline double rel_linf(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    return num / den;
}

inline double rel_l2(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num / den);
}

/// Second radial moment of the Airy intensity truncated at t_max (somb argument units),
/// trapezoid on a fine grid; returns the root-mean-square radius in argument units.
inline double truncated_airy_rms(double t_max, int intervals) {
    double m0 = 0.0;
    double m2 = 0.0;
    const double h = t_max / intervals;
    for (int i = 0; i <= intervals; ++i) {
        const double t = i * h;
        const double w = (i == 0 || i == intervals) ? 0.5 : 1.0;
        const double p = std::pow(somb(t), 2) * t;
        m0 += w * p;
        m2 += w * p * t * t;
    }
    return std::sqrt(m2 / m0);
}

}  // namespace oracle
