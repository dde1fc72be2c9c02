#pragma once

#include <array>
#include <cmath>

namespace cpband {

// One-dimensional pieces of the tri-cubic interpolation stencil, shared by
// the band builder (which must know which nodes a stencil touches) and the
// operator assembly (which also needs the weights).
//
// For a coordinate u in cell units, the stencil nodes are b-1 .. b+2 with
// b = ceil(u) - 1, so xi = u - b lies in (0, 1] and an exact lattice hit
// (u integer) lands on node b+1 with weight one.

inline int tricubic_base(double u) {
    return static_cast<int>(std::ceil(u)) - 1;
}

// Cubic Lagrange basis on nodes {-1, 0, 1, 2} evaluated at xi.
inline std::array<double, 4> tricubic_weights(double xi) {
    return {
        -xi * (xi - 1.0) * (xi - 2.0) / 6.0,
        (xi + 1.0) * (xi - 1.0) * (xi - 2.0) / 2.0,
        -(xi + 1.0) * xi * (xi - 2.0) / 2.0,
        (xi + 1.0) * xi * (xi - 1.0) / 6.0,
    };
}

} // namespace cpband
