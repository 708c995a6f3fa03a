#include "subrayleigh/raster.hpp"

#include "subrayleigh/error.hpp"

#include <algorithm>

namespace subrayleigh {

Raster::Raster(std::size_t resolution_, double side_, double fill)
    : resolution(resolution_), side(side_), values(resolution_ * resolution_, fill) {}

Raster::Raster(std::size_t resolution_, double side_, std::vector<double> values_)
    : resolution(resolution_), side(side_), values(std::move(values_)) {
    if (values.size() != resolution * resolution) {
        throw DomainError("Raster: value count does not match resolution^2");
    }
}

Vec2 Raster::center(std::size_t row, std::size_t col) const {
    const double p = pitch();
    return {-0.5 * side + (static_cast<double>(col) + 0.5) * p,
            0.5 * side - (static_cast<double>(row) + 0.5) * p};
}

double Raster::max_value() const {
    if (values.empty()) return 0.0;
    return *std::max_element(values.begin(), values.end());
}

}  // namespace subrayleigh
