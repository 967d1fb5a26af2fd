#include "degchemo/mask.hpp"

#include <algorithm>

#include "degchemo/hash.hpp"

namespace degchemo {

std::size_t CellMask::count() const {
    return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

std::uint64_t field_hash(const ScalarField& f) {
    const auto& g = f.grid;
    const int shape[3] = {g.dim(), g.cells(0), g.cells(1)};
    std::uint64_t h = fnv1a(shape, sizeof shape);
    h = fnv1a(g.lengths().data(), 2 * sizeof(double), h);
    h = fnv1a(&f.boundary_value, sizeof(double), h);
    return fnv1a(f.values.data(), f.values.size() * sizeof(double), h);
}

}  // namespace degchemo
