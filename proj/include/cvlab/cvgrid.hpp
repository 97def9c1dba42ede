#pragma once

#include <filesystem>
#include <iosfwd>

#include "cvlab/field.hpp"

namespace cvlab {

// "CVGRID v1": an ASCII header line
//   CVGRID 1 <rows> <cols> <extent_x> <extent_y> <origin_x> <origin_y> <real|complex>
// followed by little-endian float64 samples, row-major, interleaved (re, im)
// when complex.
void write_cvgrid(std::ostream& out, const SampledField& field);
SampledField read_cvgrid(std::istream& in);

void write_cvgrid(const std::filesystem::path& path, const SampledField& field);
SampledField read_cvgrid(const std::filesystem::path& path);

}  // namespace cvlab
