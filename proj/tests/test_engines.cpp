#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "subrayleigh/engines.hpp"
#include "subrayleigh/error.hpp"
#include "subrayleigh/metrics.hpp"

#include <algorithm>
#include <cmath>

using namespace subrayleigh;

namespace {

const OpticalConfig kOptics;  // D_o/R = 250, m = 1, k = 6000
const double kXr = rayleigh_radius(kOptics);

SourceConfig source(int n, double dk = 600.0) {
    SourceConfig s;
    s.photon_number = n;
    s.delta_k_t = dk;
    return s;
}

EngineOptions direct_path() {
    EngineOptions o;
    o.path = ConvolutionPath::direct;
    return o;
}

/// Small two-bar object on the 64 x 64, side 0.2 grid used for quadrature comparisons.
ApertureGrid small_bars() { return two_bar_target(64, 0.2, 0.6 * kXr / 4, 0.6 * kXr / 4, 0.06); }

std::vector<std::size_t> argmax_set(const std::vector<double>& v) {
    const double peak = *std::max_element(v.begin(), v.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] == peak) out.push_back(i);
    }
    return out;
}

/// Brute-force images on a grid, independent of the library.
struct Reference {
    std::size_t g;
    double pitch;
    std::vector<double> a;

    explicit Reference(const ApertureGrid& grid)
        : g(grid.resolution()), pitch(grid.pitch()), a(grid.values()) {}

    oracle::OffsetTable k(int factor = 1) const {
        return oracle::psf_table(g, pitch, factor * kOptics.psf_scale());
    }
    std::vector<double> smoothed(double dk) const {
        return oracle::convolve(a, g, oracle::focusing_table(g, pitch, dk));
    }
    std::vector<double> coherent() const {
        return oracle::peak_normalized(oracle::power(oracle::convolve(a, g, k()), 2));
    }
    std::vector<double> incoherent() const {
        return oracle::peak_normalized(oracle::convolve(oracle::power(a, 2), g, oracle::power(k(), 2)));
    }
    std::vector<double> sql_coherent(int n, double dk, int factor = 1) const {
        const auto src = oracle::power(smoothed(dk), n);
        return oracle::peak_normalized(
            oracle::power(oracle::convolve(src, g, oracle::power(k(factor), n)), 2));
    }
    std::vector<double> sql_incoherent(int n, double dk, int factor = 1) const {
        const auto src = oracle::power(smoothed(dk), 2 * n, true);
        return oracle::peak_normalized(oracle::convolve(src, g, oracle::power(k(factor), 2 * n)));
    }
    std::vector<double> heisenberg_coherent(int n, double dk) const {
        const auto src = oracle::power(smoothed(dk), n);
        return oracle::peak_normalized(oracle::power(oracle::convolve(src, g, k(n)), 2));
    }
    std::vector<double> heisenberg_incoherent(int n, double dk) const {
        const auto src = oracle::power(smoothed(dk), 2 * n, true);
        return oracle::peak_normalized(oracle::convolve(src, g, oracle::power(k(n), 2)));
    }
    std::vector<double> exact(int n, double dk) const {
        return oracle::peak_normalized(
            oracle::exact_sql(a, g, k(), oracle::focusing_table(g, pitch, dk), n));
    }
};

}  // namespace

TEST_CASE("EngineMode strings") {
    for (const char* s : {"conventional-coherent", "conventional-incoherent", "coincidence:5",
                          "sql-coherent:5", "sql-coherent-exact:3", "sql-incoherent:10",
                          "heisenberg-coherent:5", "heisenberg-incoherent:2"}) {
        CHECK(EngineMode::parse(s).to_string() == s);
    }
    CHECK(EngineMode::parse("conventional").kind == EngineKind::conventional_coherent);
    CHECK(EngineMode::parse("sql:10").kind == EngineKind::sql_coherent);
    CHECK(EngineMode::parse("sql:10").photon_number == 10);
    CHECK(EngineMode::parse("heisenberg:5").kind == EngineKind::heisenberg_coherent);
    for (const char* bad : {"", "sql", "sql:", "sql:0", "sql:-2", "sql:3x", "warp:3", "conventional-coherent:"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(EngineMode::parse(bad), DomainError);
    }
}

TEST_CASE("image normalization and recorded scalars") {
    const ApertureGrid grid = two_bar_target(320, 1.0, 0.1, 0.1, 0.3);
    const ImageGrid img = image_sql_coherent(grid, kOptics, source(5));
    CHECK(*std::max_element(img.values().begin(), img.values().end()) == 1.0);
    CHECK(*std::min_element(img.values().begin(), img.values().end()) >= 0.0);
    CHECK(img.normalization.raw_peak > 0.0);
    CHECK(img.normalization.log_raw_peak == doctest::Approx(std::log(img.normalization.raw_peak)));
    CHECK(img.frame == CoordinateFrame::object_registered);
    CHECK(img.mode.to_string() == "sql-coherent:5");
    CHECK(img.normalization.find("fock_norm").value() == doctest::Approx(std::log(fock_norm(source(5)))));
    CHECK(img.normalization.find("sql_prefactor").has_value());
    CHECK_FALSE(img.normalization.find("gamma").has_value());

    const ImageGrid inc = image_sql_incoherent(grid, kOptics, source(5));
    CHECK(inc.normalization.find("source_efficiency").value() == doctest::Approx(log_source_efficiency(source(5))));
    CHECK(inc.normalization.find("xi_power").value() == doctest::Approx(5 * std::log(efficiency_xi(source(5)))));

    EngineOptions half;
    half.screen_cell_fraction = 0.5;
    const ImageGrid h = image_heisenberg(grid, kOptics, source(3), Coherence::coherent, half);
    CHECK(h.normalization.find("gamma").value() == doctest::Approx(3 * std::log(0.5)));
    half.screen_cell_fraction = 1.5;
    CHECK_THROWS_AS(image_heisenberg(grid, kOptics, source(3), Coherence::coherent, half), RangeError);

    const ImageGrid c = image_coherent(grid, kOptics);
    CHECK(c.normalization.find("psf_prefactor").value() == doctest::Approx(std::log(psf_prefactor(kOptics))));
    CHECK(image_incoherent(grid, kOptics).normalization.find("incoherent_prefactor").has_value());
}

TEST_CASE("empty aperture is a data error") {
    CHECK_THROWS_AS(image_coherent(uniform_target(64, 0.2, 0.0), kOptics), DataError);
}

TEST_CASE("coherent point image is the squared Airy pattern") {
    const ApertureGrid grid = point_target(320, 1.0);
    const ImageGrid img = image_coherent(grid, kOptics);
    for (std::size_t j = 160; j < 320; j += 7) {
        const double d = grid.raster().center(160, j).x - grid.raster().center(160, 160).x;
        CHECK(std::abs(img.raster.at(160, j) - std::pow(oracle::somb(kOptics.psf_scale() * d), 2)) < 1e-12);
    }
    // First dark ring at x_R / m.
    std::size_t ring = 161;
    while (img.raster.at(160, ring + 1) < img.raster.at(160, ring)) ++ring;
    CHECK(std::abs((ring - 160.0) * grid.pitch() - kXr / kOptics.magnification()) <= grid.pitch());
    // The incoherent point image is identical.
    CHECK(oracle::rel_linf(image_incoherent(grid, kOptics).values(), img.values()) < 1e-12);
}

TEST_CASE("a delta-like PSF reproduces the aperture intensity") {
    OpticalConfig wide = kOptics;
    wide.lens_radius *= 1000.0;
    const ApertureGrid grid = two_bar_target(64, 0.2, 0.03, 0.03, 0.1);
    const ImageGrid img = image_coherent(grid, wide);
    CHECK(oracle::rel_l2(img.values(), oracle::power(grid.values(), 2)) <= 0.01);
}

TEST_CASE("sub-Rayleigh pair is unresolved conventionally") {
    const ApertureGrid grid = two_point_target(64, 0.5 * kXr, 16);
    const ImageGrid img = image_coherent(grid, kOptics);
    CHECK(two_point_dip(img, Axis::horizontal, 0.5 * kXr) == 0.0);
    const Reference ref(grid);
    CHECK(oracle::rel_linf(img.values(), ref.coherent()) < 1e-8);
}

TEST_CASE("uniform aperture gives a uniform incoherent image in the interior") {
    OpticalConfig fine = kOptics;
    fine.wavenumber = 60000.0;
    const ApertureGrid grid = uniform_target(320, 1.0);
    const ImageGrid img = image_incoherent(grid, fine);
    const auto margin = static_cast<std::size_t>(oracle::j1_zero(8) / fine.psf_scale() / grid.pitch()) + 1;
    const double centre = img.raster.at(160, 160);
    for (std::size_t i = margin; i < 320 - margin; i += 3) {
        for (std::size_t j = margin; j < 320 - margin; j += 3) {
            CHECK(std::abs(img.raster.at(i, j) / centre - 1.0) < 1e-3);
        }
    }
}

TEST_CASE("a glyph smaller than the Rayleigh radius renders as a blur") {
    const ImageGrid glyph = image_incoherent(glyph_target(320, 1.0, 0.1), kOptics);
    const ImageGrid point = image_incoherent(point_target(320, 1.0), kOptics);
    CHECK(sharpness(glyph) < sharpness(point));
    CHECK(sharpness(glyph) < 0.1 * sharpness(glyph_target(320, 1.0, 0.1).raster()));
}

TEST_CASE("coincidence post-processing") {
    const ApertureGrid grid = two_point_target(256, 0.6 * kXr, 48);
    const ImageGrid conv = image_coherent(grid, kOptics);
    const ImageGrid one = coincidence_postprocess(conv, 1);
    CHECK(one.values() == conv.values());
    CHECK(one.normalization.log_raw_peak == doctest::Approx(conv.normalization.log_raw_peak));
    for (int n : {2, 5, 9}) {
        const ImageGrid c = coincidence_postprocess(conv, n);
        CHECK(argmax_set(c.values()) == argmax_set(conv.values()));
        for (std::size_t i = 0; i < c.values().size(); i += 97) {
            CHECK(c.values()[i] == doctest::Approx(std::pow(conv.values()[i], n)).epsilon(1e-12));
        }
        CHECK(c.normalization.find("coincidence_factorial").value() == doctest::Approx(-std::lgamma(n + 1.0)));
        CHECK(c.normalization.log_raw_peak == doctest::Approx(n * conv.normalization.log_raw_peak));
    }
    // Narrower spot, but the sub-Rayleigh pair stays unresolved.
    const ImageGrid c5 = coincidence_postprocess(conv, 5);
    CHECK(two_point_dip(c5, Axis::horizontal, 0.6 * kXr) <= 0.05);
    const ImageGrid pconv = image_coherent(point_target(320, 1.0), kOptics);
    const ImageGrid p5 = coincidence_postprocess(pconv, 5);
    std::size_t half_conv = 160, half_5 = 160;
    while (pconv.raster.at(160, half_conv) > 0.5) ++half_conv;
    while (p5.raster.at(160, half_5) > 0.5) ++half_5;
    CHECK(half_5 < half_conv);

    CHECK_THROWS_AS(coincidence_postprocess(conv, 0), RangeError);
    CHECK_THROWS_AS(coincidence_postprocess(c5, 2), DomainError);
}

TEST_CASE("N = 1 with a wide focusing bandwidth reduces to the conventional engines") {
    const double dk = 6000.0;
    const double side = 256 * (2.0 * oracle::j1_zero(1) / dk) / 4.0;
    const ApertureGrid grid = two_bar_target(256, side, side / 8, side / 8, side / 3);
    const ImageGrid coh = image_coherent(grid, kOptics);
    const ImageGrid inc = image_incoherent(grid, kOptics);
    CHECK(oracle::rel_l2(image_sql_coherent(grid, kOptics, source(1, dk)).values(), coh.values()) <= 1e-3);
    CHECK(oracle::rel_l2(image_sql_incoherent(grid, kOptics, source(1, dk)).values(), inc.values()) <= 1e-3);
    CHECK(oracle::rel_l2(image_heisenberg(grid, kOptics, source(1, dk), Coherence::coherent).values(), coh.values()) <= 1e-3);
    CHECK(oracle::rel_l2(image_heisenberg(grid, kOptics, source(1, dk), Coherence::incoherent).values(), inc.values()) <= 1e-3);
}

TEST_CASE("Heisenberg at N = 1 equals the SQL engines bitwise") {
    const ApertureGrid grid = two_bar_target(320, 1.0, 0.1, 0.1, 0.3);
    CHECK(image_heisenberg(grid, kOptics, source(1), Coherence::coherent).values() ==
          image_sql_coherent(grid, kOptics, source(1)).values());
    CHECK(image_heisenberg(grid, kOptics, source(1), Coherence::incoherent).values() ==
          image_sql_incoherent(grid, kOptics, source(1)).values());
}

TEST_CASE("SQL point image follows the somb^(2N) profile") {
    const double dk = 6000.0;
    const ApertureGrid grid = point_target(320, 0.1);
    const ImageGrid img = image_sql_coherent(grid, kOptics, source(5, dk));
    std::vector<double> profile, expected;
    for (std::size_t j = 160; j < 320; ++j) {
        const double d = grid.raster().center(160, j).x - grid.raster().center(160, 160).x;
        profile.push_back(img.raster.at(160, j));
        expected.push_back(std::pow(oracle::somb(kOptics.psf_scale() * d), 10));
    }
    CHECK(oracle::rel_l2(profile, expected) < 0.02);
}

TEST_CASE("Heisenberg point image has its first dark ring at x_R / (N m)") {
    const double dk = 6000.0;
    const ApertureGrid grid = point_target(320, 0.1);
    const ImageGrid img = image_heisenberg(grid, kOptics, source(5, dk), Coherence::coherent);
    std::size_t ring = 161;
    while (img.raster.at(160, ring + 1) < img.raster.at(160, ring)) ++ring;
    CHECK(std::abs((ring - 160.0) * grid.pitch() - kXr / 5.0) <= grid.pitch());
}

TEST_CASE("sharpness ordering across the engine suite") {
    const ApertureGrid grid = two_bar_target(320, 1.0, 0.6 * kXr, 0.6 * kXr, 1.8 * kXr);
    const double conv = sharpness(image_coherent(grid, kOptics));
    const double sql5 = sharpness(image_sql_coherent(grid, kOptics, source(5)));
    const double sql10 = sharpness(image_sql_coherent(grid, kOptics, source(10)));
    const double heis5 = sharpness(image_heisenberg(grid, kOptics, source(5), Coherence::coherent));
    CHECK(sql5 > conv);
    CHECK(sql10 > sql5);
    CHECK(heis5 > sql5);
    const double inc = sharpness(image_incoherent(grid, kOptics));
    const double inc5 = sharpness(image_sql_incoherent(grid, kOptics, source(5)));
    const double inc10 = sharpness(image_sql_incoherent(grid, kOptics, source(10)));
    CHECK(inc5 > inc);
    CHECK(inc10 > inc5);
    CHECK(sharpness(image_heisenberg(grid, kOptics, source(5), Coherence::incoherent)) > inc5);
}

TEST_CASE("SQL incoherent image is invariant under loss and source power") {
    const ApertureGrid grid = two_bar_target(320, 1.0, 0.1, 0.1, 0.3);
    const ImageGrid base = image_sql_incoherent(grid, kOptics, source(5));
    for (double mu : {0.5, 0.01}) {
        for (double alpha : {1.0, 7.0}) {
            SourceConfig s = source(5);
            s.mu = mu;
            s.alpha_sq = alpha;
            const ImageGrid img = image_sql_incoherent(grid, kOptics, s);
            CHECK(img.values() == base.values());
            CHECK(img.normalization.find("source_efficiency").value() != base.normalization.find("source_efficiency").value());
        }
    }
}

TEST_CASE("regime and size guards") {
    const OpticalConfig tight = OpticalConfig::from_ratio(6000.0, 5.0, 1.0);
    const ApertureGrid grid = small_bars();
    CHECK_THROWS_AS(image_sql_coherent(grid, tight, source(3)), RegimeError);
    CHECK_THROWS_AS(image_sql_incoherent(grid, tight, source(3)), RegimeError);
    CHECK_THROWS_AS(image_heisenberg(grid, tight, source(3), Coherence::coherent), RegimeError);
    CHECK_THROWS_AS(image_sql_coherent_exact(two_bar_target(256, 0.8, 0.1, 0.1, 0.3), kOptics, source(3)), SizeError);
    CHECK_THROWS_AS(image_sql_coherent(two_bar_target(64, 1.0, 0.1, 0.1, 0.3), kOptics, source(3)), ResolutionError);
    CHECK_THROWS_AS(image_sql_coherent_exact(two_bar_target(64, 1.0, 0.1, 0.1, 0.3), kOptics, source(3)), ResolutionError);
}

TEST_CASE("exact engine at N = 1 is the coherent image of the aperture") {
    const ApertureGrid grid = small_bars();
    const ImageGrid exact = image_sql_coherent_exact(grid, kOptics, source(1));
    CHECK(oracle::rel_linf(exact.values(), image_coherent(grid, kOptics).values()) < 1e-12);
}

TEST_CASE("exact engine agrees with the focused-spot approximation inside its regime") {
    const ApertureGrid grid = small_bars();
    const ImageGrid exact = image_sql_coherent_exact(grid, kOptics, source(5));
    const ImageGrid approx = image_sql_coherent(grid, kOptics, source(5));
    CHECK(normalized_rms(exact, approx) <= 0.1);
}

TEST_CASE("exact engine departs from the approximation outside its regime") {
    const OpticalConfig tight = OpticalConfig::from_ratio(6000.0, 5.0, 1.0);
    const ApertureGrid grid = small_bars();
    const ImageGrid exact = image_sql_coherent_exact(grid, tight, source(5));
    // The library refuses the approximation here; build it by quadrature.
    const Reference ref(grid);
    const auto k = oracle::psf_table(64, grid.pitch(), tight.psf_scale());
    const auto approx = oracle::peak_normalized(oracle::power(
        oracle::convolve(oracle::power(ref.smoothed(600.0), 5), 64, oracle::power(k, 5)), 2));
    CHECK(oracle::rel_l2(exact.values(), approx) > 0.1);
}

TEST_CASE("engines match brute-force quadrature on both paths") {
    const ApertureGrid grid = small_bars();
    const Reference ref(grid);
    const double dk = 600.0;
    struct Case {
        EngineMode mode;
        std::vector<double> expected;
    };
    const std::vector<Case> cases = {
        {{EngineKind::conventional_coherent, 1}, ref.coherent()},
        {{EngineKind::conventional_incoherent, 1}, ref.incoherent()},
        {{EngineKind::coincidence, 5}, oracle::peak_normalized(oracle::power(ref.coherent(), 5))},
        {{EngineKind::sql_coherent, 5}, ref.sql_coherent(5, dk)},
        {{EngineKind::sql_incoherent, 5}, ref.sql_incoherent(5, dk)},
        {{EngineKind::heisenberg_coherent, 5}, ref.heisenberg_coherent(5, dk)},
        {{EngineKind::heisenberg_incoherent, 5}, ref.heisenberg_incoherent(5, dk)},
        {{EngineKind::sql_coherent_exact, 3}, ref.exact(3, dk)},
    };
    for (const auto& c : cases) {
        CAPTURE(c.mode.to_string());
        const ImageGrid fft = render(c.mode, grid, kOptics, source(1, dk));
        const ImageGrid direct = render(c.mode, grid, kOptics, source(1, dk), direct_path());
        CHECK(oracle::rel_linf(fft.values(), c.expected) < 1e-8);
        CHECK(oracle::rel_linf(direct.values(), c.expected) < 1e-8);
    }
}

TEST_CASE("render output is independent of the thread count") {
    const ApertureGrid grid = small_bars();
    EngineOptions many;
    many.threads = 4;
    for (const char* m : {"sql-coherent:5", "heisenberg-incoherent:3", "sql-coherent-exact:2"}) {
        CAPTURE(m);
        const EngineMode mode = EngineMode::parse(m);
        CHECK(render(mode, grid, kOptics, source(1), many).values() ==
              render(mode, grid, kOptics, source(1)).values());
    }
    EngineOptions direct_many = direct_path();
    direct_many.threads = 3;
    CHECK(render(EngineMode::parse("sql-coherent-exact:2"), grid, kOptics, source(1), direct_many).values() ==
          render(EngineMode::parse("sql-coherent-exact:2"), grid, kOptics, source(1), direct_path()).values());
}

TEST_CASE("render uses the mode's photon number") {
    const ApertureGrid grid = small_bars();
    CHECK(render(EngineMode::parse("sql-coherent:4"), grid, kOptics, source(1)).values() ==
          image_sql_coherent(grid, kOptics, source(4)).values());
}

TEST_CASE("normalized_rms") {
    const ApertureGrid grid = small_bars();
    const ImageGrid a = image_coherent(grid, kOptics);
    CHECK(normalized_rms(a, a) == 0.0);
    CHECK_THROWS_AS(normalized_rms(a, image_coherent(two_bar_target(32, 0.2, 0.03, 0.03, 0.1), kOptics)), DomainError);
}
