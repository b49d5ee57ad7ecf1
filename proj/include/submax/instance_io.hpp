#pragma once

#include <iosfwd>
#include <string>

#include "submax/core.hpp"

namespace submax {

// Text instance format, version 1. Floats are printed with shortest
// round-trip representations so save/load is lossless and files produced
// from the same instance are byte-identical.
//
//   submax-instance v1
//   n <count>
//   d <dim>
//   D <norm bound>
//   lambda <penalty>
//   B identity | B dense   (dense: d rows of d floats follow)
//   vectors                 (n rows of d floats follow)

void save_instance(std::ostream& out, const DiversityInstance& inst);
void save_instance(const std::string& path, const DiversityInstance& inst);

DiversityInstance load_instance(std::istream& in);
DiversityInstance load_instance(const std::string& path);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

}  // namespace submax
