#pragma once

#include <string>

#include "gmfg/fields.hpp"
#include "gmfg/graphon.hpp"
#include "gmfg/time_grid.hpp"
#include "gmfg/torus_grid.hpp"

namespace gmfg {

/// Writes a (t, alpha, x, value) CSV, t-major then alpha then x, with 17
/// significant digits so a reload is exact.
void write_csv_field3(const std::string& path, const Field3& field, const TorusGrid& grid,
                      const AlphaGrid& alpha, const TimeGrid& tgrid);

/// Reads back a CSV written by write_csv_field3; shape must match exactly.
Field3 read_csv_field3(const std::string& path, int n_levels, int M, int n);

/// Reads only the final time block of an emitted CSV as an (alpha, x) field.
AlphaSpaceField read_csv_final_slice(const std::string& path, int M, int n);

} // namespace gmfg
