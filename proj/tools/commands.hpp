#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace subrayleigh::cli {

enum ExitCode : int {
    kSuccess = 0,
    kInternal = 1,
    kUsage = 2,
    kValidation = 3,
    kIo = 4,
};

/// Fully resolved run parameters. Defaults: D_o/R = 250, m = 1, k = 6000, dk_t = 600.
struct RunConfig {
    std::string subcommand;
    std::string input;              // PGM path; empty selects `target`
    std::string target = "two-bar";  // two-bar | two-point | glyph | point
    std::filesystem::path out_dir = ".";
    std::vector<std::string> modes = {"conventional-coherent", "coincidence:5", "sql-coherent:5",
                                      "sql-coherent:10", "heisenberg-coherent:5"};
    int photon_number = 5;
    std::vector<int> n_list = {4, 8, 16, 32, 64};
    double wavenumber = 6000.0;
    double lens_radius = 1.0;
    double object_distance = 250.0;
    double magnification = 1.0;
    double delta_k_t = 600.0;
    double alpha_sq = 1.0;
    double mu = 1.0;
    std::size_t grid = 320;
    double side = 1.0;
    unsigned long long seed = 1;
    std::size_t mc_samples = 100000;
    double truncation = 10.0;
    bool exact = false;
    double gamma = 1.0;
    unsigned threads = 1;

    /// key=value lines, loadable again with --config.
    std::string to_config_text() const;
    /// Applies key=value pairs; unknown keys are a usage error.
    void apply(const std::map<std::string, std::string>& values);
};

std::map<std::string, std::string> parse_config_text(const std::string& text);

/// Entry point shared by the executable and the tests. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cmd_render(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_psf(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_scaling(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace subrayleigh::cli
