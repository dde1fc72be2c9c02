#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "cpband/geometry.hpp"
#include "cpband/parallel.hpp"

namespace cpband {

using Index = std::int64_t;

// Uniform Cartesian narrow band around a surface. Lattice points live at
// integer multiples of dx (origin pinned to the coordinate origin so point
// counts reproduce across runs). Each band point caches its closest-point
// data; a point is Exterior when its closest point lies on the surface
// boundary, Interior otherwise.
//
// Construction enumerates {x : |x - cp(x)| <= bandwidth} by face-connected
// flood fill from surface seeds, then takes a closure: every node referenced
// by the tri-cubic stencil of any band point's cp or modified cp is added,
// as are the face neighbors of every such node (so the difference stencil is
// complete wherever an interpolation row can reach). Closure points may sit
// slightly beyond the nominal bandwidth; they are classified normally.
//
// Immutable after construction; concurrent reads are safe.
class BandGrid {
public:
    struct Lattice {
        std::int32_t i, j, k;
    };

    double dx() const { return dx_; }
    Vec3 origin() const { return Vec3::Zero(); }
    double bandwidth() const { return bandwidth_; }
    Index size() const { return static_cast<Index>(lattice_.size()); }

    Lattice lattice(Index r) const { return lattice_[r]; }
    Vec3 position(Index r) const {
        const Lattice& c = lattice_[r];
        return {dx_ * c.i, dx_ * c.j, dx_ * c.k};
    }

    // Row index of a lattice triple, if it is in the band.
    std::optional<Index> find(int i, int j, int k) const {
        auto it = index_.find(pack(i, j, k));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    bool exterior(Index r) const { return exterior_[r] != 0; }
    const Vec3& cp(Index r) const { return cp_[r]; }
    const Vec3& cpbar(Index r) const { return cpbar_[r]; }
    double distance(Index r) const { return dist_[r]; }

    Index exterior_count() const { return exterior_count_; }
    const Surface& surface() const { return surface_; }

    // Queries rejected during flood fill because the closest point was not
    // unique. Nonzero values flag a surface/bandwidth combination that needs
    // a finer look; the shipped shapes never produce one.
    Index degenerate_rejections() const { return degenerate_rejections_; }

    static std::int64_t pack(int i, int j, int k) {
        constexpr std::int64_t bias = 1 << 20;
        return (((std::int64_t)i + bias) << 42) | (((std::int64_t)j + bias) << 21) |
               ((std::int64_t)k + bias);
    }

    friend BandGrid build_band(const Surface& surface, double dx, int interp_degree,
                               int stencil_order, Exec mode);

private:
    explicit BandGrid(Surface s) : surface_(std::move(s)) {}

    Surface surface_;
    double dx_ = 0.0;
    double bandwidth_ = 0.0;
    std::vector<Lattice> lattice_;
    std::vector<Vec3> cp_;
    std::vector<Vec3> cpbar_;
    std::vector<double> dist_;
    std::vector<std::uint8_t> exterior_;
    std::unordered_map<std::int64_t, Index> index_;
    Index exterior_count_ = 0;
    Index degenerate_rejections_ = 0;
};

// Bandwidth multiple for interpolation degree p and difference stencil
// order 2 in dimension d: sqrt((d-1)((p+1)/2)^2 + (1+(p+1)/2)^2).
double band_lambda(int dim, int interp_degree);

// Builds the band with bandwidth band_lambda(3, interp_degree) * dx.
// Only tri-cubic interpolation (degree 3) and the 7-point Laplacian
// (order 2) are supported. The Parallel mode batches the closest-point
// queries of each flood-fill frontier; enumeration order, and therefore the
// row numbering, is identical in both modes.
BandGrid build_band(const Surface& surface, double dx, int interp_degree = 3,
                    int stencil_order = 2, Exec mode = Exec::Serial);

} // namespace cpband
