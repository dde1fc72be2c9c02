#include "cpband/operators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "cpband/stencil.hpp"

namespace cpband {

namespace {

// Two-pass CSR assembly. row_fn(r, cols, vals) writes up to max_row_nnz
// entries with strictly increasing column indices and returns the count; it
// runs once to size the matrix and once to fill it, in parallel over rows
// with disjoint output slots, so both execution modes produce identical
// matrices.
template <typename RowFn>
SparseMat assemble_csr(Index m, int max_row_nnz, Exec mode, RowFn&& row_fn) {
    SparseMat out(m, m);
    out.makeCompressed();
    if (m == 0) return out;

    std::vector<int> counts(m);
    std::atomic<bool> escaped{false};
    par::for_each_index(m, mode, [&](Index r) {
        std::vector<int> cols(max_row_nnz);
        std::vector<double> vals(max_row_nnz);
        const int n = row_fn(r, cols.data(), vals.data());
        if (n < 0) {
            escaped.store(true, std::memory_order_relaxed);
            counts[r] = 0;
        } else {
            counts[r] = n;
        }
    });
    if (escaped.load()) {
        throw StencilEscape("stencil reaches a lattice point outside the band");
    }

    int* outer = out.outerIndexPtr();
    outer[0] = 0;
    for (Index r = 0; r < m; ++r) outer[r + 1] = outer[r] + counts[r];
    const int nnz = outer[m];
    out.resizeNonZeros(nnz);

    int* inner = out.innerIndexPtr();
    double* value = out.valuePtr();
    par::for_each_index(m, mode, [&](Index r) {
        row_fn(r, inner + outer[r], value + outer[r]);
    });
    return out;
}

struct RowEntry {
    int col;
    double val;
};

} // namespace

SparseMat build_interpolation(const BandGrid& grid, const std::vector<Vec3>& targets, Exec mode) {
    if (static_cast<Index>(targets.size()) != grid.size()) {
        throw std::invalid_argument("one interpolation target per band point required");
    }
    const double dx = grid.dx();
    return assemble_csr(grid.size(), 64, mode, [&](Index r, int* cols, double* vals) -> int {
        const Vec3& t = targets[r];
        int base[3];
        std::array<double, 4> w[3];
        for (int a = 0; a < 3; ++a) {
            const double u = t[a] / dx;
            base[a] = tricubic_base(u);
            w[a] = tricubic_weights(u - base[a]);
        }
        RowEntry entries[64];
        int n = 0;
        for (int di = 0; di < 4; ++di) {
            for (int dj = 0; dj < 4; ++dj) {
                const double wij = w[0][di] * w[1][dj];
                for (int dk = 0; dk < 4; ++dk) {
                    const double weight = wij * w[2][dk];
                    if (weight == 0.0) continue;
                    const auto idx = grid.find(base[0] + di - 1, base[1] + dj - 1, base[2] + dk - 1);
                    if (!idx) return -1;
                    entries[n++] = {static_cast<int>(*idx), weight};
                }
            }
        }
        std::sort(entries, entries + n, [](const RowEntry& a, const RowEntry& b) {
            return a.col < b.col;
        });
        for (int i = 0; i < n; ++i) {
            cols[i] = entries[i].col;
            vals[i] = entries[i].val;
        }
        return n;
    });
}

LaplacianMatrix build_laplacian(const BandGrid& grid, Exec mode) {
    const Index m = grid.size();
    const double inv_dx2 = 1.0 / (grid.dx() * grid.dx());

    LaplacianMatrix result;
    result.row_complete.assign(m, 0);
    std::vector<std::uint8_t>& complete = result.row_complete;

    result.matrix = assemble_csr(m, 7, mode, [&](Index r, int* cols, double* vals) -> int {
        const BandGrid::Lattice c = grid.lattice(r);
        RowEntry entries[7];
        entries[0] = {static_cast<int>(r), -6.0 * inv_dx2};
        int n = 1;
        constexpr int off[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0},
                                   {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
        for (const auto& o : off) {
            const auto idx = grid.find(c.i + o[0], c.j + o[1], c.k + o[2]);
            if (!idx) return 0;  // incomplete row stays empty
            entries[n++] = {static_cast<int>(*idx), inv_dx2};
        }
        complete[r] = 1;
        std::sort(entries, entries + 7, [](const RowEntry& a, const RowEntry& b) {
            return a.col < b.col;
        });
        for (int i = 0; i < 7; ++i) {
            cols[i] = entries[i].col;
            vals[i] = entries[i].val;
        }
        return 7;
    });
    return result;
}

ConormalField approximate_conormal(const BandGrid& grid, Exec mode) {
    const Index m = grid.size();
    ConormalField field;
    field.direction.assign(m, Vec3::Zero());
    field.degenerate.assign(m, 0);
    par::for_each_index(m, mode, [&](Index r) {
        if (!grid.exterior(r)) return;
        const Vec3 diff = grid.cp(r) - grid.cpbar(r);
        const double len = diff.norm();
        if (len < kConormalDegenerateTol) {
            field.degenerate[r] = 1;
        } else {
            field.direction[r] = diff / len;
        }
    });
    return field;
}

Eigen::VectorXd build_boundary_diagonal(const BandGrid& grid, const ConormalField& conormal) {
    const Index m = grid.size();
    Eigen::VectorXd d = Eigen::VectorXd::Zero(m);
    for (Index r = 0; r < m; ++r) {
        if (!grid.exterior(r) || conormal.degenerate[r]) continue;
        d[r] = 2.0 * (grid.position(r) - grid.cp(r)).dot(conormal.direction[r]);
    }
    return d;
}

TubeOperators build_tube_operators(const BandGrid& grid, Exec mode) {
    const Index m = grid.size();
    TubeOperators ops;

    std::vector<Vec3> targets(m);
    par::for_each_index(m, mode, [&](Index r) { targets[r] = grid.cp(r); });
    ops.E = build_interpolation(grid, targets, mode);
    par::for_each_index(m, mode, [&](Index r) { targets[r] = grid.cpbar(r); });
    ops.Ebar = build_interpolation(grid, targets, mode);

    ops.L = build_laplacian(grid, mode);
    ops.conormal = approximate_conormal(grid, mode);
    ops.D = build_boundary_diagonal(grid, ops.conormal);
    ops.gamma = penalty_gamma(grid.dx());
    return ops;
}

} // namespace cpband
