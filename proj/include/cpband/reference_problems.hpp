#pragma once

#include <functional>

#include "cpband/band_grid.hpp"

namespace cpband::problems {

// Manufactured data on the unit upper hemisphere. The solution is the
// restriction of the ambient polynomial
//   u(x, y, z) = (x^2 - y^2) + (3 x^2 y - y^3),
// a sum of degree-2 and degree-3 spherical harmonics, so the surface
// Laplacian acts as -l(l+1) termwise and the conormal derivative vanishes on
// the equator. In angles: u = cos(2 phi) sin^2(theta) + sin(3 phi) sin^3(theta).
double hemisphere_exact(const Vec3& p);

// f = Delta_S u = -6 (x^2 - y^2) - 12 (3 x^2 y - y^3) on the surface.
double hemisphere_rhs(const Vec3& p);

// Robin data g = du/dn + kappa u = kappa u on the equator.
double hemisphere_robin_g(const Vec3& p, double kappa);

// Samples phi(cp(x_i)) over the band: the closest point extension.
Eigen::VectorXd cp_extension(const BandGrid& grid,
                             const std::function<double(const Vec3&)>& phi);

// Band extension carrying the boundary derivative: interior rows take
// phi(cp(x_i)); exterior rows take
//   phi(cpbar(x_i)) + 2 <x_i - cp(x_i), n(cp(x_i))> * dn_phi(cp(x_i))
// with the analytic conormal n. Third-order accurate in the distance to the
// surface for smooth phi.
Eigen::VectorXd jet_extension(const BandGrid& grid,
                              const std::function<double(const Vec3&)>& phi,
                              const std::function<double(const Vec3&)>& dn_phi);

} // namespace cpband::problems
