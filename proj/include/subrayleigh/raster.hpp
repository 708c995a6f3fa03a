#pragma once

#include "subrayleigh/optics.hpp"

#include <cstddef>
#include <vector>

namespace subrayleigh {

/// Square G x G sampling of [-side/2, side/2]^2 at pixel centers. Row 0 is the
/// top edge (+side/2), column 0 the left edge (-side/2). Row-major.
struct Raster {
    std::size_t resolution = 0;
    double side = 1.0;
    std::vector<double> values;

    Raster() = default;
    Raster(std::size_t resolution, double side, double fill = 0.0);
    Raster(std::size_t resolution, double side, std::vector<double> values);

    double pitch() const { return side / static_cast<double>(resolution); }
    std::size_t size() const { return values.size(); }

    double& at(std::size_t row, std::size_t col) { return values[row * resolution + col]; }
    double at(std::size_t row, std::size_t col) const { return values[row * resolution + col]; }

    /// Physical coordinate of a pixel center.
    Vec2 center(std::size_t row, std::size_t col) const;

    double max_value() const;
};

}  // namespace subrayleigh
