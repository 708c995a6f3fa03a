#include "commands.hpp"

#include "subrayleigh/engines.hpp"
#include "subrayleigh/error.hpp"
#include "subrayleigh/metrics.hpp"
#include "subrayleigh/optics.hpp"
#include "subrayleigh/scene.hpp"
#include "subrayleigh/specfun.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <locale>
#include <memory>
#include <sstream>

namespace subrayleigh::cli {
namespace {

constexpr const char* kOutputDirEnv = "SUBRAYLEIGH_OUTPUT_DIR";

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <class T>
T parse_value(const std::string& key, const std::string& text) {
    std::istringstream in(text);
    in.imbue(std::locale::classic());
    T value{};
    in >> value;
    if (!in || !(in >> std::ws).eof()) {
        throw UsageError("config key '" + key + "': cannot parse '" + text + "'");
    }
    return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "1" || text == "true" || text == "yes") return true;
    if (text == "0" || text == "false" || text == "no") return false;
    throw UsageError("config key '" + key + "': expected a boolean, got '" + text + "'");
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
    return out;
}

std::string join(const std::vector<int>& items) {
    std::vector<std::string> s;
    for (int v : items) s.push_back(std::to_string(v));
    return join(s);
}

/// CSV stream with dot decimals and round-trip precision.
std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f.imbue(std::locale::classic());
    f << std::setprecision(std::numeric_limits<double>::max_digits10);
    return f;
}

void close_checked(std::ofstream& f, const std::filesystem::path& path) {
    f.close();
    if (!f) throw IoError("write failure on " + path.string());
}

void prepare_out_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw IoError("cannot create output directory " + dir.string());
    }
}

void write_run_config(const RunConfig& config) {
    const auto path = config.out_dir / "run.cfg";
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << config.to_config_text();
    close_checked(f, path);
}

OpticalConfig optics_of(const RunConfig& c) {
    OpticalConfig cfg;
    cfg.wavenumber = c.wavenumber;
    cfg.lens_radius = c.lens_radius;
    cfg.object_distance = c.object_distance;
    cfg.image_distance = c.magnification * c.object_distance;
    cfg.validate();
    return cfg;
}

SourceConfig source_of(const RunConfig& c) {
    SourceConfig src;
    src.photon_number = c.photon_number;
    src.delta_k_t = c.delta_k_t;
    src.alpha_sq = c.alpha_sq;
    src.mu = c.mu;
    src.validate();
    return src;
}

void report_warnings(const OpticalConfig& cfg, const SourceConfig& src, std::ostream& err) {
    for (const auto& w : cfg.warnings()) err << "warning: " << w << '\n';
    for (const auto& w : src.warnings()) err << "warning: " << w << '\n';
}

ApertureGrid make_aperture(RunConfig& c, const OpticalConfig& cfg) {
    if (!c.input.empty()) {
        ApertureGrid grid = load_pgm(c.input, c.side);
        c.grid = grid.resolution();
        return grid;
    }
    const double feature = 0.6 * rayleigh_radius(cfg) / cfg.magnification();
    if (c.target == "two-bar") {
        return two_bar_target(c.grid, c.side, feature, feature, 3.0 * feature);
    }
    if (c.target == "glyph") return glyph_target(c.grid, c.side, 2.0 * rayleigh_radius(cfg));
    if (c.target == "point") return point_target(c.grid, c.side);
    if (c.target == "two-point") {
        // Even pixel count with a pitch no coarser than side / grid.
        const double pitch = c.side / static_cast<double>(c.grid);
        auto pixels = static_cast<std::size_t>(2.0 * std::ceil(feature / (2.0 * pitch)));
        if (pixels < 2) pixels = 2;
        ApertureGrid grid = two_point_target(c.grid, feature, pixels);
        c.side = grid.side();
        return grid;
    }
    throw UsageError("unknown target '" + c.target + "'");
}

std::string panel_file(const EngineMode& mode) {
    std::string name = mode.to_string();
    std::replace(name.begin(), name.end(), ':', '_');
    return name + ".pgm";
}

}  // namespace

// RunConfig ------------------------------------------------------------------

std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError("config line " + std::to_string(number) + ": expected key=value");
        }
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

void RunConfig::apply(const std::map<std::string, std::string>& values) {
    for (const auto& [key, v] : values) {
        if (key == "subcommand") subcommand = v;
        else if (key == "input") input = v;
        else if (key == "target") target = v;
        else if (key == "out") out_dir = v;
        else if (key == "mode") modes = split_list(v);
        else if (key == "n") photon_number = parse_value<int>(key, v);
        else if (key == "n_list") {
            n_list.clear();
            for (const auto& item : split_list(v)) n_list.push_back(parse_value<int>(key, item));
        }
        else if (key == "k") wavenumber = parse_value<double>(key, v);
        else if (key == "lens_radius") lens_radius = parse_value<double>(key, v);
        else if (key == "object_distance") object_distance = parse_value<double>(key, v);
        else if (key == "magnification") magnification = parse_value<double>(key, v);
        else if (key == "delta_k_t") delta_k_t = parse_value<double>(key, v);
        else if (key == "alpha_sq") alpha_sq = parse_value<double>(key, v);
        else if (key == "mu") mu = parse_value<double>(key, v);
        else if (key == "grid") grid = parse_value<std::size_t>(key, v);
        else if (key == "side") side = parse_value<double>(key, v);
        else if (key == "seed") seed = parse_value<unsigned long long>(key, v);
        else if (key == "mc_samples") mc_samples = parse_value<std::size_t>(key, v);
        else if (key == "truncation") truncation = parse_value<double>(key, v);
        else if (key == "exact") exact = parse_bool(key, v);
        else if (key == "gamma") gamma = parse_value<double>(key, v);
        else if (key == "threads") threads = parse_value<unsigned>(key, v);
        else throw UsageError("unknown config key '" + key + "'");
    }
}

std::string RunConfig::to_config_text() const {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << "subcommand=" << subcommand << '\n'
       << "input=" << input << '\n'
       << "target=" << target << '\n'
       << "out=" << out_dir.string() << '\n'
       << "mode=" << join(modes) << '\n'
       << "n=" << photon_number << '\n'
       << "n_list=" << join(n_list) << '\n'
       << "k=" << wavenumber << '\n'
       << "lens_radius=" << lens_radius << '\n'
       << "object_distance=" << object_distance << '\n'
       << "magnification=" << magnification << '\n'
       << "delta_k_t=" << delta_k_t << '\n'
       << "alpha_sq=" << alpha_sq << '\n'
       << "mu=" << mu << '\n'
       << "grid=" << grid << '\n'
       << "side=" << side << '\n'
       << "seed=" << seed << '\n'
       << "mc_samples=" << mc_samples << '\n'
       << "truncation=" << truncation << '\n'
       << "exact=" << (exact ? "true" : "false") << '\n'
       << "gamma=" << gamma << '\n'
       << "threads=" << threads << '\n';
    return os.str();
}

// Commands -------------------------------------------------------------------

int cmd_render(const RunConfig& config, std::ostream& out, std::ostream& err) {
    RunConfig c = config;
    const OpticalConfig cfg = optics_of(c);
    const SourceConfig src = source_of(c);
    report_warnings(cfg, src, err);

    std::vector<EngineMode> modes;
    for (const auto& m : c.modes) {
        try {
            modes.push_back(EngineMode::parse(m));
        } catch (const DomainError& e) {
            throw UsageError(e.what());
        }
    }
    const ApertureGrid aperture = make_aperture(c, cfg);
    prepare_out_dir(c.out_dir);
    save_pgm(aperture, c.out_dir / "object.pgm");

    EngineOptions options;
    options.threads = c.threads;

    const auto manifest_path = c.out_dir / "manifest.csv";
    auto manifest = open_csv(manifest_path);
    manifest << "engine,N,file,log_raw_peak,sharpness,runtime_s,exact_rms_deviation\n";

    const auto emit = [&](const ImageGrid& image, double seconds, const std::string& deviation) {
        const std::string file = panel_file(image.mode);
        save_pgm(image.raster, c.out_dir / file, c.gamma);
        const double s = sharpness(image);
        manifest << image.mode.to_string() << ',' << image.mode.photon_number << ',' << file << ','
                 << image.normalization.log_raw_peak << ',' << s << ',' << seconds << ','
                 << deviation << '\n';
        out << std::left << std::setw(28) << image.mode.to_string() << " sharpness " << s
            << (deviation.empty() ? "" : "  rms vs approximation " + deviation) << '\n';
    };

    for (const auto& mode : modes) {
        const auto t0 = std::chrono::steady_clock::now();
        const ImageGrid image = render(mode, aperture, cfg, src, options);
        const auto t1 = std::chrono::steady_clock::now();
        emit(image, std::chrono::duration<double>(t1 - t0).count(), "");

        if (c.exact && mode.kind == EngineKind::sql_coherent) {
            const EngineMode exact_mode{EngineKind::sql_coherent_exact, mode.photon_number};
            const auto t2 = std::chrono::steady_clock::now();
            const ImageGrid exact = render(exact_mode, aperture, cfg, src, options);
            const auto t3 = std::chrono::steady_clock::now();
            std::ostringstream dev;
            dev.imbue(std::locale::classic());
            dev << std::setprecision(std::numeric_limits<double>::max_digits10)
                << normalized_rms(exact, image);
            emit(exact, std::chrono::duration<double>(t3 - t2).count(), dev.str());
        }
    }
    close_checked(manifest, manifest_path);
    write_run_config(c);
    return kSuccess;
}

int cmd_psf(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const RunConfig& c = config;
    const OpticalConfig cfg = optics_of(c);
    if (c.photon_number < 1) throw DomainError("psf: N must be >= 1");
    for (const auto& w : cfg.warnings()) err << "warning: " << w << '\n';
    prepare_out_dir(c.out_dir);

    const int n = c.photon_number;
    const double x_r = rayleigh_radius(cfg);
    const double x_r_n = generalized_rayleigh_radius(cfg, n);
    const double zero_n = heisenberg_first_zero(cfg, n);
    const double to_arg = cfg.psf_scale() / cfg.magnification();

    const auto profile_path = c.out_dir / "psf_profile.csv";
    auto profile = open_csv(profile_path);
    profile << "r,somb,somb_2N,heisenberg_somb\n";
    constexpr int kSamples = 513;
    for (int i = 0; i < kSamples; ++i) {
        const double r = 3.0 * x_r * i / (kSamples - 1);
        const double t = to_arg * r;
        profile << r << ',' << specfun::somb(t) << ',' << specfun::somb_pow(t, 2 * n) << ','
                << specfun::somb(n * t) << '\n';
    }
    close_checked(profile, profile_path);

    const auto summary_path = c.out_dir / "psf_summary.csv";
    auto summary = open_csv(summary_path);
    summary << "N,x_R,x_R_N,heisenberg_first_zero\n"
            << n << ',' << x_r << ',' << x_r_n << ',' << zero_n << '\n';
    close_checked(summary, summary_path);

    out << std::setprecision(6) << "N=" << n << " x_R=" << x_r << " x_R(N)=" << x_r_n
        << " heisenberg_first_zero=" << zero_n << '\n';
    write_run_config(c);
    return kSuccess;
}

int cmd_scaling(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const RunConfig& c = config;
    const OpticalConfig cfg = optics_of(c);
    for (const auto& w : cfg.warnings()) err << "warning: " << w << '\n';
    if (c.n_list.size() < 3) throw UsageError("scaling: need at least three N values");
    for (int n : c.n_list) {
        if (n < 1) throw UsageError("scaling: N values must be >= 1");
    }
    prepare_out_dir(c.out_dir);

    std::vector<ScalingPoint> sql, heis, mc;
    const auto table_path = c.out_dir / "scaling.csv";
    auto table = open_csv(table_path);
    table << "N,x_R_N,heisenberg_first_zero,mc_spread\n";
    for (int n : c.n_list) {
        McConfig m;
        m.seed = c.seed;
        m.samples = c.mc_samples;
        m.truncation_radius = c.truncation;
        m.batch = n;
        m.threads = c.threads;
        const double x = generalized_rayleigh_radius(cfg, n);
        const double z = heisenberg_first_zero(cfg, n);
        const double s = mc_centroid_spread(cfg, m);
        table << n << ',' << x << ',' << z << ',' << s << '\n';
        sql.push_back({static_cast<double>(n), x});
        heis.push_back({static_cast<double>(n), z});
        mc.push_back({static_cast<double>(n), s});
    }
    close_checked(table, table_path);

    struct Series {
        const char* name;
        const std::vector<ScalingPoint>* points;
        double target;
        double tolerance;
    };
    const Series series[] = {{"sql_rayleigh_radius", &sql, -0.5, 0.05},
                             {"heisenberg_first_zero", &heis, -1.0, 1e-6},
                             {"mc_centroid_spread", &mc, -0.5, 0.05}};
    const auto fit_path = c.out_dir / "scaling_fit.csv";
    auto fits = open_csv(fit_path);
    fits << "series,slope,intercept,r_squared,target,tolerance,within\n";
    bool all_within = true;
    for (const auto& s : series) {
        const ScalingFit fit = fit_scaling(*s.points);
        const bool within = std::abs(fit.slope - s.target) <= s.tolerance;
        all_within = all_within && within;
        fits << s.name << ',' << fit.slope << ',' << fit.intercept << ',' << fit.r_squared << ','
             << s.target << ',' << s.tolerance << ',' << (within ? "true" : "false") << '\n';
        out << std::left << std::setw(24) << s.name << " slope " << std::setprecision(8) << fit.slope
            << " (target " << s.target << " +/- " << s.tolerance << ") "
            << (within ? "ok" : "OUT OF WINDOW") << '\n';
    }
    close_checked(fits, fit_path);
    write_run_config(c);
    return all_within ? kSuccess : kValidation;
}

// Entry point ----------------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sub-Rayleigh imaging simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::function<void(RunConfig&)>> overrides;

    // Binds a flag to a holder; the value lands in RunConfig only if the flag was given.
    const auto bind = [&overrides](CLI::App* sub, const std::string& name, auto member,
                                   const std::string& help) {
        using T = std::remove_reference_t<decltype(std::declval<RunConfig&>().*member)>;
        auto holder = std::make_shared<T>();
        CLI::Option* opt = sub->add_option(name, *holder, help);
        overrides.push_back([opt, holder, member](RunConfig& rc) {
            if (opt->count() > 0) rc.*member = *holder;
        });
    };

    const auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "key=value configuration file");
        bind(sub, "--out", &RunConfig::out_dir, "output directory");
        bind(sub, "--k", &RunConfig::wavenumber, "wavenumber (inverse image widths)");
        bind(sub, "--lens-radius", &RunConfig::lens_radius, "lens radius R");
        bind(sub, "--object-distance", &RunConfig::object_distance, "object distance D_o");
        bind(sub, "--magnification", &RunConfig::magnification, "magnification m = D_i/D_o");
        bind(sub, "--delta-kt", &RunConfig::delta_k_t, "transverse focusing bandwidth");
        bind(sub, "--threads", &RunConfig::threads, "worker threads (0 = all cores)");
    };

    auto* render_cmd = app.add_subcommand("render", "render figure-style panels of an object");
    common(render_cmd);
    bind(render_cmd, "--input", &RunConfig::input, "object PGM (P2/P5, square)");
    bind(render_cmd, "--target", &RunConfig::target, "built-in object: two-bar|two-point|glyph|point");
    bind(render_cmd, "--mode", &RunConfig::modes, "engine mode, repeatable");
    bind(render_cmd, "--grid", &RunConfig::grid, "grid resolution G");
    bind(render_cmd, "--side", &RunConfig::side, "frame width in image widths");
    bind(render_cmd, "--alpha-sq", &RunConfig::alpha_sq, "mean photon number |alpha|^2");
    bind(render_cmd, "--mu", &RunConfig::mu, "loss transmissivity");
    bind(render_cmd, "--gamma", &RunConfig::gamma, "display gamma for PGM output");
    auto* exact_flag = render_cmd->add_flag("--exact", "add exact panels for sql-coherent modes");
    overrides.push_back([exact_flag](RunConfig& rc) {
        if (exact_flag->count() > 0) rc.exact = true;
    });

    auto* psf_cmd = app.add_subcommand("psf", "dump radial PSF profiles and Rayleigh radii");
    common(psf_cmd);
    bind(psf_cmd, "-N,--photons", &RunConfig::photon_number, "photon number N");

    auto* scaling_cmd = app.add_subcommand("scaling", "fit resolution scaling laws over N");
    common(scaling_cmd);
    bind(scaling_cmd, "--n-list", &RunConfig::n_list, "photon numbers");
    bind(scaling_cmd, "--seed", &RunConfig::seed, "Monte Carlo seed");
    bind(scaling_cmd, "--mc-samples", &RunConfig::mc_samples, "centroids per N");
    bind(scaling_cmd, "--truncation", &RunConfig::truncation, "sensor radius in units of x_R");
    scaling_cmd->get_option("--n-list")->delimiter(',');

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    }

    RunConfig rc;
    try {
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw IoError("cannot open config file " + config_path);
            std::stringstream text;
            text << f.rdbuf();
            rc.apply(parse_config_text(text.str()));
        }
        if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') {
            rc.out_dir = env;
        }
        for (const auto& o : overrides) o(rc);

        if (render_cmd->parsed()) {
            rc.subcommand = "render";
            return cmd_render(rc, out, err);
        }
        if (psf_cmd->parsed()) {
            rc.subcommand = "psf";
            return cmd_psf(rc, out, err);
        }
        rc.subcommand = "scaling";
        return cmd_scaling(rc, out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.category() == Error::Category::io ? kIo : kValidation;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternal;
    }
}

}  // namespace subrayleigh::cli
