#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "degchemo/grid.hpp"

namespace degchemo {

/**
 * .fld format: one line of JSON
 *   {"boundary_value":b,"cells":[..],"dim":d,"dtype":"f64-le","lengths":[..]}
 * terminated by '\n', followed by grid.size() little-endian IEEE-754 doubles
 * in row-major (axis 0 slowest) order.
 */
void write_field(std::ostream& out, const ScalarField& f);
ScalarField read_field(std::istream& in);

void save_field(const std::filesystem::path& path, const ScalarField& f);
ScalarField load_field(const std::filesystem::path& path);

}  // namespace degchemo
