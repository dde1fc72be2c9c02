#include "cpband/elliptic.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#if defined(CPBAND_HAVE_UMFPACK)
#include <umfpack.h>
#else
#include <Eigen/SparseLU>
#endif

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

namespace cpband {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SparseMat sparse_identity(Index m) {
    SparseMat id(m, m);
    id.setIdentity();
    return id;
}

double inf_norm(const VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

} // namespace

// --- BoundaryCondition -----------------------------------------------------

BoundaryCondition BoundaryCondition::robin(double kappa, SurfaceFn g) {
    BoundaryCondition bc;
    bc.affine_ = true;
    bc.kappa_ = kappa;
    bc.g_ = std::move(g);
    return bc;
}

BoundaryCondition BoundaryCondition::general(BoundaryFn j, BoundaryFn dj_du) {
    if (!j) throw std::invalid_argument("boundary flux function required");
    BoundaryCondition bc;
    bc.affine_ = false;
    bc.j_ = std::move(j);
    bc.dj_ = std::move(dj_du);
    return bc;
}

double BoundaryCondition::g(const Vec3& y) const {
    if (!affine_) throw Error("boundary data g is only defined for the affine variant");
    return g_ ? g_(y) : 0.0;
}

double BoundaryCondition::j(const Vec3& y, double u) const {
    if (affine_) return -kappa_ * u + (g_ ? g_(y) : 0.0);
    return j_(y, u);
}

double BoundaryCondition::dj_du(const Vec3& y, double u) const {
    if (affine_) return -kappa_;
    if (dj_) return dj_(y, u);
    const double h = 1e-6 * std::max(1.0, std::fabs(u));
    return (j_(y, u + h) - j_(y, u - h)) / (2.0 * h);
}

// --- DirectSolver ------------------------------------------------------------

#if defined(CPBAND_HAVE_UMFPACK)

struct DirectSolver::Impl {
    SparseColMat matrix;  // umfpack_di_solve re-reads the CSC arrays
    double control[UMFPACK_CONTROL];
    void* numeric = nullptr;
    ~Impl() {
        if (numeric) umfpack_di_free_numeric(&numeric);
    }
};

DirectSolver::DirectSolver(const SparseMat& A) : impl_(std::make_unique<Impl>()) {
    impl_->matrix = A;
    impl_->matrix.makeCompressed();
    const int n = static_cast<int>(impl_->matrix.rows());
    umfpack_di_defaults(impl_->control);
    // Nested dissection; the default minimum-degree orderings drown in fill
    // on these tube graphs (the interpolation stencils couple 4x4x4 blocks)
    // somewhere around 30k rows.
    impl_->control[UMFPACK_ORDERING] = UMFPACK_ORDERING_METIS;

    void* symbolic = nullptr;
    int status = umfpack_di_symbolic(n, n, impl_->matrix.outerIndexPtr(),
                                     impl_->matrix.innerIndexPtr(), impl_->matrix.valuePtr(),
                                     &symbolic, impl_->control, nullptr);
    if (status != UMFPACK_OK) {
        throw FactorizationFailure("sparse LU symbolic analysis failed (status " +
                                   std::to_string(status) + ")");
    }
    double info[UMFPACK_INFO];
    status = umfpack_di_numeric(impl_->matrix.outerIndexPtr(), impl_->matrix.innerIndexPtr(),
                                impl_->matrix.valuePtr(), symbolic, &impl_->numeric,
                                impl_->control, info);
    umfpack_di_free_symbolic(&symbolic);
    if (status == UMFPACK_WARNING_singular_matrix) {
        throw SingularSystem("sparse LU reports a numerically singular matrix");
    }
    if (status != UMFPACK_OK) {
        throw FactorizationFailure("sparse LU factorization failed (status " +
                                   std::to_string(status) + ")");
    }
    // A rank-deficient system can factor without the singular warning when no
    // pivot lands exactly on zero (a pure Neumann matrix comes out with
    // rcond ~ 1e-16 while the worst healthy system stays above 1e-8).
    if (info[UMFPACK_RCOND] < 1e-13) {
        char msg[96];
        std::snprintf(msg, sizeof msg, "sparse LU reports rank deficiency (rcond %.3e)",
                      info[UMFPACK_RCOND]);
        throw SingularSystem(msg);
    }
}

VectorXd DirectSolver::solve(const VectorXd& b) const {
    VectorXd x(impl_->matrix.rows());
    const int status = umfpack_di_solve(
        UMFPACK_A, impl_->matrix.outerIndexPtr(), impl_->matrix.innerIndexPtr(),
        impl_->matrix.valuePtr(), x.data(), b.data(), impl_->numeric, impl_->control, nullptr);
    if (status != UMFPACK_OK) {
        throw SolverFailure("sparse LU back substitution failed (status " +
                            std::to_string(status) + ")");
    }
    return x;
}

#else

struct DirectSolver::Impl {
    SparseColMat matrix;
    Eigen::SparseLU<SparseColMat, Eigen::COLAMDOrdering<int>> lu;
};

DirectSolver::DirectSolver(const SparseMat& A) : impl_(std::make_unique<Impl>()) {
    impl_->matrix = A;  // column-major copy
    impl_->lu.compute(impl_->matrix);
    if (impl_->lu.info() == Eigen::NumericalIssue) {
        throw SingularSystem("sparse LU reports a numerically singular matrix");
    }
    if (impl_->lu.info() != Eigen::Success) {
        throw FactorizationFailure("sparse LU factorization failed");
    }
}

VectorXd DirectSolver::solve(const VectorXd& b) const {
    VectorXd x = impl_->lu.solve(b);
    if (impl_->lu.info() != Eigen::Success) {
        throw SolverFailure("sparse LU back substitution failed");
    }
    return x;
}

#endif

DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver&&) noexcept = default;
DirectSolver& DirectSolver::operator=(DirectSolver&&) noexcept = default;

// --- assembly ---------------------------------------------------------------

std::pair<SparseMat, VectorXd> assemble_robin(const TubeOperators& ops, const BandGrid& grid,
                                              const EllipticProblem& problem) {
    if (!problem.bc.affine()) {
        throw std::invalid_argument("assemble_robin requires the affine boundary variant");
    }
    const Index m = grid.size();
    const double gamma = ops.gamma;
    const double kappa = problem.bc.kappa();

    SparseMat A = ops.Ebar * ops.L.matrix;
    A += (gamma - problem.c) * ops.Ebar;
    A -= gamma * sparse_identity(m);
    if (kappa != 0.0) {
        SparseMat penalty = ops.D.asDiagonal() * ops.E;
        A -= (gamma * kappa) * penalty;
    }
    A.prune(0.0);

    VectorXd f(m);
    for (Index i = 0; i < m; ++i) f[i] = problem.f(grid.cp(i));
    VectorXd b = ops.Ebar * f;
    for (Index i = 0; i < m; ++i) {
        if (ops.D[i] != 0.0) b[i] -= gamma * ops.D[i] * problem.bc.g(grid.cp(i));
    }
    return {std::move(A), std::move(b)};
}

// --- linear solve -------------------------------------------------------------

SolveReport solve_linear(const SparseMat& A, const VectorXd& b, SolveMethod method) {
    const Index m = A.rows();
    if (A.cols() != m || b.size() != m) throw std::invalid_argument("solve_linear shape mismatch");
    const SolveMethod pick =
        method == SolveMethod::Auto
            ? (m <= kDirectSizeLimit ? SolveMethod::Direct : SolveMethod::Iterative)
            : method;

    SolveReport rep;
    const auto t0 = std::chrono::steady_clock::now();
    if (pick == SolveMethod::Direct) {
        DirectSolver lu(A);
        rep.factor_seconds = seconds_since(t0);
        const auto t1 = std::chrono::steady_clock::now();
        rep.solution = lu.solve(b);
        rep.solve_seconds = seconds_since(t1);
        rep.iterations = 0;
    } else {
        // Jacobi-preconditioned BiCGSTAB: the penalty weight puts -gamma plus
        // an O(1) interpolation term on every diagonal, so plain diagonal
        // scaling already normalizes the system; iteration counts grow like
        // 1/dx. The convergence check below is the authority, not info().
        Eigen::BiCGSTAB<SparseMat, Eigen::DiagonalPreconditioner<double>> solver;
        solver.setMaxIterations(static_cast<int>(20.0 * std::sqrt(static_cast<double>(m))) + 1000);
        solver.setTolerance(1e-13);
        solver.compute(A);
        if (solver.info() != Eigen::Success) {
            throw FactorizationFailure("iterative solver setup failed");
        }
        rep.factor_seconds = seconds_since(t0);
        const auto t1 = std::chrono::steady_clock::now();
        rep.solution = solver.solve(b);
        rep.solve_seconds = seconds_since(t1);
        rep.iterations = static_cast<int>(solver.iterations());
    }

    const double bnorm = std::max(inf_norm(b), 1e-300);
    rep.residual_norm = inf_norm(A * rep.solution - b) / bnorm;
    const double tol = pick == SolveMethod::Direct ? 1e-10 : 1e-9;
    if (!std::isfinite(rep.residual_norm) || rep.residual_norm > tol) {
        if (pick == SolveMethod::Iterative) {
            throw NoConvergence("iterative solver stalled at relative residual " +
                                std::to_string(rep.residual_norm));
        }
        throw SolverFailure("direct solve exceeded the residual tolerance");
    }
    return rep;
}

// --- Steklov eigenpairs ---------------------------------------------------------

namespace {

struct SmallPair {
    double sigma;
    VectorXd phi;
    double residual;
};

// Projects the pencil onto the orthonormal basis Z through the shift-inverted
// operator, refines Z by one more operator application per round, and returns
// the k candidates nearest the shift with explicit residuals.
template <typename OpFn>
std::vector<SmallPair> extract_pairs(const SparseMat& A, const SparseMat& B, OpFn&& op,
                                     MatrixXd Z, int k, double shift, int polish_rounds) {
    const Index m = Z.rows();
    MatrixXd W(m, Z.cols());
    for (int round = 0; round <= polish_rounds; ++round) {
        for (Index c = 0; c < Z.cols(); ++c) W.col(c) = op(Z.col(c));
        if (round < polish_rounds) {
            Eigen::HouseholderQR<MatrixXd> qr(W);
            Z = qr.householderQ() * MatrixXd::Identity(m, W.cols());
        }
    }
    // Z orthonormal, W = op(Z): the projected operator is Z^T W.
    const MatrixXd T = Z.transpose() * W;
    Eigen::EigenSolver<MatrixXd> es(T);
    if (es.info() != Eigen::Success) return {};

    std::vector<SmallPair> out;
    for (int i = 0; i < T.rows(); ++i) {
        const std::complex<double> theta = es.eigenvalues()[i];
        if (std::abs(theta) < 1e-10) continue;  // infinite eigenvalue of the pencil
        const std::complex<double> sigma_c = shift + 1.0 / theta;
        if (std::abs(sigma_c.imag()) > 1e-6 * std::max(1.0, std::abs(sigma_c.real()))) continue;
        VectorXd phi = (Z * es.eigenvectors().col(i)).real();
        const double norm2 = phi.norm();
        if (norm2 < 1e-12) continue;
        phi /= norm2;
        SmallPair p;
        p.sigma = sigma_c.real();
        p.residual = inf_norm(A * phi - p.sigma * (B * phi)) / inf_norm(phi);
        p.phi = std::move(phi);
        out.push_back(std::move(p));
    }
    std::sort(out.begin(), out.end(), [&](const SmallPair& a, const SmallPair& b2) {
        return std::fabs(a.sigma - shift) < std::fabs(b2.sigma - shift);
    });
    if (static_cast<int>(out.size()) > k) out.resize(k);
    std::sort(out.begin(), out.end(),
              [](const SmallPair& a, const SmallPair& b2) { return a.sigma < b2.sigma; });
    return out;
}

} // namespace

EigenReport solve_steklov(const TubeOperators& ops, int k, double shift, unsigned seed) {
    const Index m = ops.E.rows();
    if (k < 1) throw std::invalid_argument("at least one eigenpair must be requested");
    if (ops.D.size() == 0 || ops.D.cwiseAbs().maxCoeff() == 0.0) {
        throw NoBoundary("Steklov problem requires a surface with boundary");
    }

    SparseMat A = ops.Ebar * ops.L.matrix;
    A += ops.gamma * ops.Ebar;
    A -= ops.gamma * sparse_identity(m);
    SparseMat B = ops.D.asDiagonal() * ops.E;
    B *= -ops.gamma;
    SparseMat K = A - shift * B;
    const DirectSolver klu(K);
    const auto op = [&](const VectorXd& v) { return klu.solve(B * v); };

    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const auto random_vector = [&] {
        VectorXd v(m);
        for (Index i = 0; i < m; ++i) v[i] = dist(gen);
        return v;
    };

    // Block Arnoldi, width 2: a single-vector Krylov space carries one copy
    // of each eigenvalue, so once the mesh stops splitting the spectrum's
    // double eigenvalues a block is needed to resolve both copies.
    constexpr int kBlock = 2;
    const int kmax = static_cast<int>(std::min<Index>(240, ((m - kBlock) / kBlock) * kBlock));
    if (kmax < kBlock) throw std::invalid_argument("band too small for the eigensolver");
    MatrixXd V(m, kmax + kBlock);
    MatrixXd H = MatrixXd::Zero(kmax + kBlock, kmax);

    // Orthonormalizes W's columns against prev basis columns and each other
    // (classical Gram-Schmidt twice, then modified per column), recording the
    // projection coefficients. A direction that cancels to nothing marks an
    // invariant subspace; it is refilled with random material and its
    // coefficients stop being recorded, truncating a residual that was below
    // the deflation threshold anyway.
    const auto orthonormalize_block = [&](Eigen::Ref<MatrixXd> W, int prev,
                                          MatrixXd* coeffs) -> void {
        for (int pass = 0; pass < 2 && prev > 0; ++pass) {
            const MatrixXd h = V.leftCols(prev).transpose() * W;
            W.noalias() -= V.leftCols(prev) * h;
            if (coeffs) coeffs->topRows(prev) += h;
        }
        for (int c = 0; c < W.cols(); ++c) {
            bool record = coeffs != nullptr;
            bool done = false;
            for (int repeat = 0; repeat < 4 && !done; ++repeat) {
                for (int pass = 0; pass < 2; ++pass) {
                    for (int d = 0; d < c; ++d) {
                        const double proj = W.col(d).dot(W.col(c));
                        W.col(c) -= proj * W.col(d);
                        if (record) (*coeffs)(prev + d, c) += proj;
                    }
                }
                const double nrm = W.col(c).norm();
                if (nrm > 1e-10) {
                    W.col(c) /= nrm;
                    if (record) (*coeffs)(prev + c, c) = nrm;
                    done = true;
                } else {
                    record = false;
                    VectorXd r = random_vector();
                    if (prev > 0) r -= V.leftCols(prev) * (V.leftCols(prev).transpose() * r);
                    W.col(c) = r / r.norm();
                }
            }
            if (!done) throw SolverFailure("eigensolver basis expansion collapsed");
        }
    };

    {
        MatrixXd W(m, kBlock);
        for (int c = 0; c < kBlock; ++c) W.col(c) = op(random_vector());  // range start
        orthonormalize_block(W, 0, nullptr);
        V.leftCols(kBlock) = W;
    }

    int built = 0;
    double best_residual = std::numeric_limits<double>::infinity();
    constexpr double kResidualTol = 1e-6;

    for (int stage : {40, 80, 160, 240}) {
        const int target = std::min(stage, kmax);
        while (built < target) {
            MatrixXd W(m, kBlock);
            for (int c = 0; c < kBlock; ++c) W.col(c) = op(V.col(built + c));
            const int prev = built + kBlock;
            MatrixXd coeffs = MatrixXd::Zero(prev + kBlock, kBlock);
            orthonormalize_block(W, prev, &coeffs);
            H.block(0, built, prev + kBlock, kBlock) = coeffs;
            V.middleCols(prev, kBlock) = W;
            built += kBlock;
        }

        // Ritz pairs of the projected band Hessenberg matrix; the eigenvalues
        // of largest magnitude correspond to the pencil eigenvalues nearest
        // the shift. Their real spans seed the refinement basis.
        const MatrixXd Hk = H.topLeftCorner(built, built);
        Eigen::EigenSolver<MatrixXd> es(Hk);
        if (es.info() != Eigen::Success) throw SolverFailure("Hessenberg eigendecomposition failed");
        std::vector<int> order(built);
        for (int i = 0; i < built; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return std::abs(es.eigenvalues()[a]) > std::abs(es.eigenvalues()[b]);
        });
        const int p = std::min(built, k + 5);
        MatrixXd Y(built, p);
        std::vector<char> used(built, 0);
        int col = 0;
        for (int oi = 0; oi < built && col < p; ++oi) {
            const int idx = order[oi];
            if (used[idx]) continue;
            used[idx] = 1;
            const auto theta = es.eigenvalues()[idx];
            if (std::fabs(theta.imag()) <= 1e-14 * std::abs(theta)) {
                Y.col(col++) = es.eigenvectors().col(idx).real();
            } else {
                Y.col(col++) = es.eigenvectors().col(idx).real();
                if (col < p) Y.col(col++) = es.eigenvectors().col(idx).imag();
                for (int oj = oi + 1; oj < built; ++oj) {
                    const int jdx = order[oj];
                    if (!used[jdx] &&
                        std::abs(es.eigenvalues()[jdx] - std::conj(theta)) <=
                            1e-12 * std::abs(theta)) {
                        used[jdx] = 1;
                        break;
                    }
                }
            }
        }
        MatrixXd Wb = V.leftCols(built) * Y.leftCols(col);
        Eigen::HouseholderQR<MatrixXd> qr(Wb);
        MatrixXd Z = qr.householderQ() * MatrixXd::Identity(m, col);

        const std::vector<SmallPair> pairs = extract_pairs(A, B, op, std::move(Z), k, shift, 2);
        if (static_cast<int>(pairs.size()) == k) {
            double worst = 0.0;
            for (const auto& p2 : pairs) worst = std::max(worst, p2.residual);
            best_residual = std::min(best_residual, worst);
            if (worst <= kResidualTol) {
                EigenReport rep;
                for (const auto& p2 : pairs) {
                    rep.eigenvalues.push_back(p2.sigma);
                    rep.eigenvectors.push_back(p2.phi);
                    rep.residuals.push_back(p2.residual);
                }
                return rep;
            }
        }
        if (target == kmax) break;
    }
    throw NoConvergence("Steklov eigensolver residual stalled at " +
                        std::to_string(best_residual));
}

// --- nonlinear boundary flux -----------------------------------------------------

namespace {

// Newton correction solve: same dispatch as solve_linear but without the
// residual gate. The outer loop re-evaluates the true nonlinear residual, so
// a correction a few digits short of the linear tolerance (routine once the
// right-hand side has shrunk to roundoff) only costs an extra iteration.
VectorXd correction_solve(const SparseMat& A, const VectorXd& b, SolveMethod method) {
    const Index m = A.rows();
    const SolveMethod pick =
        method == SolveMethod::Auto
            ? (m <= kDirectSizeLimit ? SolveMethod::Direct : SolveMethod::Iterative)
            : method;
    if (pick == SolveMethod::Direct) return DirectSolver(A).solve(b);
    Eigen::BiCGSTAB<SparseMat, Eigen::DiagonalPreconditioner<double>> solver;
    solver.setMaxIterations(static_cast<int>(20.0 * std::sqrt(static_cast<double>(m))) + 1000);
    solver.setTolerance(1e-13);
    solver.compute(A);
    if (solver.info() != Eigen::Success) {
        throw FactorizationFailure("iterative solver setup failed");
    }
    return solver.solve(b);
}

} // namespace

SolveReport solve_nonlinear(const TubeOperators& ops, const BandGrid& grid,
                            const EllipticProblem& problem, const VectorXd* initial,
                            SolveMethod method) {
    if (problem.bc.affine()) {
        // An affine flux freezes to itself: one pass of the fixed-point loop
        // is exactly the Robin assembly, so solve that system directly.
        auto [A, b] = assemble_robin(ops, grid, problem);
        SolveReport rep = solve_linear(A, b, method);
        rep.iterations = 1;
        rep.residual_history = {rep.residual_norm};
        return rep;
    }

    const Index m = grid.size();
    const double gamma = ops.gamma;

    SparseMat P = ops.E * ops.L.matrix;
    if (problem.c != 0.0) P -= problem.c * ops.E;
    P += gamma * ops.Ebar;
    P -= gamma * sparse_identity(m);

    VectorXd f(m);
    for (Index i = 0; i < m; ++i) f[i] = problem.f(grid.cp(i));
    const VectorXd Ef = ops.E * f;
    const double scale = std::max(inf_norm(Ef), 1e-300);

    std::vector<Index> active;
    for (Index i = 0; i < m; ++i) {
        if (ops.D[i] != 0.0) active.push_back(i);
    }

    const auto residual = [&](const VectorXd& u) {
        VectorXd Eu = ops.E * u;
        VectorXd r = P * u - Ef;
        for (Index i : active) {
            r[i] += gamma * ops.D[i] * problem.bc.j(grid.cp(i), Eu[i]);
        }
        return r;
    };

    VectorXd u = initial ? *initial : VectorXd::Zero(m);
    if (initial && initial->size() != m) {
        throw std::invalid_argument("initial guess has the wrong length");
    }

    SolveReport rep;
    bool converged = false;
    VectorXd r = residual(u);
    rep.residual_history.push_back(inf_norm(r) / scale);

    constexpr int kMaxIter = 100;
    constexpr double kStepTol = 1e-10;
    for (int it = 1; it <= kMaxIter; ++it) {
        const VectorXd Eu = ops.E * u;
        VectorXd jd = VectorXd::Zero(m);
        for (Index i : active) jd[i] = problem.bc.dj_du(grid.cp(i), Eu[i]);

        VectorXd delta;
        bool solved = false;
        for (double rho : {0.0, 1.0, 10.0}) {
            VectorXd dscale = ops.D.cwiseProduct(jd);
            if (rho != 0.0) dscale -= rho * ops.D;
            SparseMat Ak = P + gamma * SparseMat(dscale.asDiagonal() * ops.E);
            try {
                delta = correction_solve(Ak, (-r).eval(), method);
                solved = true;
                break;
            } catch (const SingularSystem&) {
            }
        }
        if (!solved) throw SingularSystem("nonlinear step matrix is singular for all stabilizations");

        // Halve the step while it worsens the residual.
        double step = 1.0;
        VectorXd u_try;
        VectorXd r_try;
        const double rn = inf_norm(r);
        for (int t = 0; t < 4; ++t) {
            u_try = u + step * delta;
            r_try = residual(u_try);
            if (inf_norm(r_try) <= rn || t == 3) break;
            step *= 0.5;
        }

        const double applied = step * inf_norm(delta);
        u = std::move(u_try);
        r = std::move(r_try);
        rep.residual_history.push_back(inf_norm(r) / scale);
        rep.iterations = it;
        if (applied <= kStepTol) {
            converged = true;
            break;
        }
    }

    if (!converged) {
        throw NoConvergence("nonlinear boundary iteration did not settle; last residual " +
                            std::to_string(rep.residual_history.back()));
    }
    rep.solution = std::move(u);
    rep.residual_norm = rep.residual_history.back();
    return rep;
}

// --- error metric -------------------------------------------------------------------

double surface_error(const VectorXd& u, const SurfaceFn& exact, const TubeOperators& ops,
                     const BandGrid& grid) {
    const Index m = grid.size();
    if (u.size() != m) throw std::invalid_argument("solution length does not match the band");
    const VectorXd Eu = ops.E * u;
    double num = 0.0;
    double den = 0.0;
    for (Index i = 0; i < m; ++i) {
        const double ex = exact(grid.cp(i));
        num = std::max(num, std::fabs(Eu[i] - ex));
        den = std::max(den, std::fabs(ex));
    }
    return den > 1e-300 ? num / den : num;
}

} // namespace cpband
