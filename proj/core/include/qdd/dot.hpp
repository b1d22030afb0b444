#pragma once

#include <ostream>
#include <string>

#include "qdd/package.hpp"

namespace qdd {

/// Weight rendered as "a+bi" with 6 significant digits.
std::string format_weight(std::complex<double> w);

/// One graph node per DD node labelled q<var>, one terminal "1", edge
/// labels carry weights; zero stubs are omitted.
void export_dot(const MatrixEdge& root, std::ostream& os);
void export_dot(const VectorEdge& root, std::ostream& os);

}  // namespace qdd
