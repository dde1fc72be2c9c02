#include "cpband/reference_problems.hpp"

namespace cpband::problems {

double hemisphere_exact(const Vec3& p) {
    const double x = p.x();
    const double y = p.y();
    return (x * x - y * y) + (3.0 * x * x * y - y * y * y);
}

double hemisphere_rhs(const Vec3& p) {
    const double x = p.x();
    const double y = p.y();
    return -6.0 * (x * x - y * y) - 12.0 * (3.0 * x * x * y - y * y * y);
}

double hemisphere_robin_g(const Vec3& p, double kappa) {
    return kappa * hemisphere_exact(p);
}

Eigen::VectorXd cp_extension(const BandGrid& grid, const std::function<double(const Vec3&)>& phi) {
    Eigen::VectorXd v(grid.size());
    for (Index i = 0; i < grid.size(); ++i) v[i] = phi(grid.cp(i));
    return v;
}

Eigen::VectorXd jet_extension(const BandGrid& grid, const std::function<double(const Vec3&)>& phi,
                              const std::function<double(const Vec3&)>& dn_phi) {
    Eigen::VectorXd v(grid.size());
    for (Index i = 0; i < grid.size(); ++i) {
        if (!grid.exterior(i)) {
            v[i] = phi(grid.cp(i));
            continue;
        }
        const Vec3& cp = grid.cp(i);
        const Vec3 n = frame_conormal(analytic_frame(grid.surface(), cp));
        v[i] = phi(grid.cpbar(i)) + 2.0 * (grid.position(i) - cp).dot(n) * dn_phi(cp);
    }
    return v;
}

} // namespace cpband::problems
