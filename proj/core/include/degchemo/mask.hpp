#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "degchemo/grid.hpp"

namespace degchemo {

/// Boolean selection of cells, tagged with the predicate that produced it.
struct CellMask {
    Grid grid;
    std::vector<std::uint8_t> cells;
    std::string predicate;  // e.g. "M0 > delta"
    double delta = 0.0;
    std::uint64_t field_hash = 0;

    CellMask() = default;
    CellMask(Grid g, bool fill) : grid(g), cells(g.size(), fill ? 1 : 0), predicate(fill ? "all" : "none") {}

    bool operator[](std::size_t i) const { return cells[i] != 0; }
    std::size_t count() const;
    bool empty() const { return count() == 0; }
    double measure() const { return static_cast<double>(count()) * grid.cell_volume(); }
};

/// FNV-1a over the raw bytes of the values and the grid shape.
std::uint64_t field_hash(const ScalarField& f);

}  // namespace degchemo
