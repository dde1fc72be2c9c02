#pragma once

#include <Eigen/Sparse>

#include <cstdint>
#include <vector>

#include "cpband/band_grid.hpp"

namespace cpband {

// Compressed-row sparse matrix. Rows never carry duplicate columns; explicit
// zeros are pruned everywhere except the boundary diagonal (kept as a dense
// diagonal vector instead).
using SparseMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using SparseColMat = Eigen::SparseMatrix<double>;

// 7-point Laplacian with per-row completeness flags. A row is complete when
// all six face neighbors are band points; incomplete rows (fringe points that
// no interpolation stencil references) are left empty so an accidental use
// shows up as a hard zero rather than a plausible value.
struct LaplacianMatrix {
    SparseMat matrix;
    std::vector<std::uint8_t> row_complete;
};

// Approximate outward co-normals at exterior points, following
// n_i ~ (cp(x_i) - cpbar(x_i)) / |cp(x_i) - cpbar(x_i)|. When the
// unnormalized difference is shorter than kConormalDegenerateTol the entry is
// flagged degenerate (direction zeroed) and the boundary diagonal gets a zero
// there. Interior entries are zero and never flagged.
struct ConormalField {
    std::vector<Vec3> direction;
    std::vector<std::uint8_t> degenerate;
};

inline constexpr double kConormalDegenerateTol = 1e-4;

// Penalty weight gamma = 2*d/dx^2 with d = 3.
inline double penalty_gamma(double dx) { return 6.0 / (dx * dx); }

// All sparse operators of the embedded formulation on one band.
//   E    row i interpolates at cp(x_i)
//   Ebar row i interpolates at cpbar(x_i); equals E on interior rows
//   L    7-point Laplacian, scale 1/dx^2
//   D    diagonal entries D_ii = 2 chi_E <x_i - cp(x_i), n_i>
struct TubeOperators {
    SparseMat E;
    SparseMat Ebar;
    LaplacianMatrix L;
    Eigen::VectorXd D;
    ConormalField conormal;
    double gamma = 0.0;
};

// Tri-cubic interpolation matrix: row i holds the 64 Lagrange weights of the
// 4x4x4 node block around targets[i]. Throws StencilEscape if a required
// node is not in the band (band closure violation).
SparseMat build_interpolation(const BandGrid& grid, const std::vector<Vec3>& targets,
                              Exec mode = Exec::Serial);

LaplacianMatrix build_laplacian(const BandGrid& grid, Exec mode = Exec::Serial);

ConormalField approximate_conormal(const BandGrid& grid, Exec mode = Exec::Serial);

Eigen::VectorXd build_boundary_diagonal(const BandGrid& grid, const ConormalField& conormal);

TubeOperators build_tube_operators(const BandGrid& grid, Exec mode = Exec::Serial);

} // namespace cpband
