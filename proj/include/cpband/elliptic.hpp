#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "cpband/operators.hpp"

namespace cpband {

using SurfaceFn = std::function<double(const Vec3&)>;
using BoundaryFn = std::function<double(const Vec3&, double)>;

// Boundary flux law du/dn = j(y, u) on the surface boundary. The affine
// variant encodes j(y, u) = -kappa*u + g(y); the general variant takes an
// arbitrary j and, optionally, its u-derivative (finite-differenced when
// absent).
class BoundaryCondition {
public:
    BoundaryCondition() = default;  // homogeneous Neumann: j(y, u) = 0

    static BoundaryCondition robin(double kappa, SurfaceFn g);
    static BoundaryCondition general(BoundaryFn j, BoundaryFn dj_du = nullptr);

    bool affine() const { return affine_; }
    double kappa() const { return kappa_; }
    double g(const Vec3& y) const;
    double j(const Vec3& y, double u) const;
    double dj_du(const Vec3& y, double u) const;

private:
    bool affine_ = true;
    double kappa_ = 0.0;
    SurfaceFn g_;
    BoundaryFn j_;
    BoundaryFn dj_;
};

// Delta_S u - c u = f on the surface, du/dn = j(y, u) on its boundary.
struct EllipticProblem {
    double c = 0.0;
    SurfaceFn f;
    BoundaryCondition bc;
};

enum class SolveMethod { Auto, Direct, Iterative };

struct SolveReport {
    Eigen::VectorXd solution;
    double residual_norm = 0.0;  // |A u - b|_inf / |b|_inf
    int iterations = 0;
    std::optional<double> error_vs_exact;
    double factor_seconds = 0.0;
    double solve_seconds = 0.0;
    std::vector<double> residual_history;  // nonlinear path only
};

struct EigenReport {
    std::vector<double> eigenvalues;              // ascending
    std::vector<Eigen::VectorXd> eigenvectors;    // unit 2-norm
    std::vector<double> residuals;                // |A phi - sigma B phi|_inf / |phi|_inf
};

// Sparse LU factorization (UMFPACK). Throws SingularSystem when the matrix
// is numerically singular and FactorizationFailure on any other breakdown.
class DirectSolver {
public:
    explicit DirectSolver(const SparseMat& A);
    ~DirectSolver();
    DirectSolver(DirectSolver&&) noexcept;
    DirectSolver& operator=(DirectSolver&&) noexcept;

    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Robin system with the extrapolation rows interpolating at the modified
// closest points on both sides:
//   A = Ebar L - c Ebar - gamma (I - Ebar + kappa D E)
//   b = Ebar f - gamma D g,  f_i = f(cp(x_i)), g_i = g(cp(x_i)) on exterior rows.
std::pair<SparseMat, Eigen::VectorXd> assemble_robin(const TubeOperators& ops,
                                                     const BandGrid& grid,
                                                     const EllipticProblem& problem);

// Linear solve. Auto picks the direct factorization up to kDirectSizeLimit
// rows (the LU factors of a 100k-row band run to roughly 2.5 GB) and the
// Jacobi-preconditioned BiCGSTAB beyond it.
inline constexpr Index kDirectSizeLimit = 100000;
SolveReport solve_linear(const SparseMat& A, const Eigen::VectorXd& b,
                         SolveMethod method = SolveMethod::Auto);

// Steklov eigenpairs: A u = sigma B u with A = Ebar L - gamma (I - Ebar) and
// B = -gamma D E, via shift-invert Arnoldi on (A - shift B)^{-1} B. Returns
// the k eigenvalues nearest the shift, sorted ascending, with explicitly
// computed residuals. The starting vector is drawn from a fixed-seed
// generator and passed once through the shift-inverted operator so it lies
// in its range.
EigenReport solve_steklov(const TubeOperators& ops, int k, double shift = -0.1,
                          unsigned seed = 42);

// Nonlinear boundary flux via damped Newton: each step solves the system
// linearized about the current iterate,
//   [E L - c E - gamma (I - Ebar) + gamma D diag(dj/du) E] delta = -r(u),
//   r(u) = [E L - c E - gamma (I - Ebar)] u + gamma D j(cp, E u) - E f,
// halving the step while the residual grows, until the applied update falls
// below 1e-10 in max norm (at most 100 iterations). When dj/du vanishes at
// the current iterate and the matrix comes out singular, the factorization
// is retried with a stabilizing -gamma rho D E term (rho = 1, then 10); the
// fixed point is unchanged because the right-hand side keeps the true
// residual. An affine j reproduces assemble_robin's matrix and converges in
// one iteration.
SolveReport solve_nonlinear(const TubeOperators& ops, const BandGrid& grid,
                            const EllipticProblem& problem,
                            const Eigen::VectorXd* initial = nullptr,
                            SolveMethod method = SolveMethod::Auto);

// max_i |[E u]_i - exact(cp(x_i))| / max_i |exact(cp(x_i))| over all band
// points; falls back to the absolute error when the denominator vanishes.
double surface_error(const Eigen::VectorXd& u, const SurfaceFn& exact,
                     const TubeOperators& ops, const BandGrid& grid);

} // namespace cpband
