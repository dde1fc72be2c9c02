#include "cpband/band_grid.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>
#include <utility>

#include "cpband/stencil.hpp"

namespace cpband {

double band_lambda(int dim, int interp_degree) {
    const double half = (interp_degree + 1) / 2.0;
    return std::sqrt((dim - 1) * half * half + (1.0 + half) * (1.0 + half));
}

namespace {

struct Classify {
    Vec3 cp = Vec3::Zero();
    Vec3 cpbar = Vec3::Zero();
    double dist = 0.0;
    bool on_boundary = false;
    bool degenerate = false;
    bool accepted = false;
};

// Classifies one lattice candidate. cpbar is resolved only for accepted
// boundary-projecting points; interior points have cpbar = cp identically
// (the reflection through an off-boundary closest point projects back to it).
Classify classify_candidate(const Surface& s, const Vec3& x, double bw) {
    Classify c;
    try {
        const ClosestPointResult r = closest_point(s, x);
        c.cp = r.cp;
        c.dist = r.distance;
        c.on_boundary = r.on_boundary;
        c.accepted = r.distance <= bw;
        if (c.accepted && r.on_boundary) {
            c.cpbar = closest_point(s, 2.0 * r.cp - x).cp;
        } else {
            c.cpbar = r.cp;
        }
    } catch (const DegenerateQuery&) {
        c.degenerate = true;
    }
    return c;
}

void add_point(BandGrid::Lattice l, const Classify& c, std::vector<BandGrid::Lattice>& lattice,
               std::vector<Vec3>& cp, std::vector<Vec3>& cpbar, std::vector<double>& dist,
               std::vector<std::uint8_t>& exterior, std::unordered_map<std::int64_t, Index>& index,
               Index& exterior_count) {
    const Index row = static_cast<Index>(lattice.size());
    lattice.push_back(l);
    cp.push_back(c.cp);
    cpbar.push_back(c.cpbar);
    dist.push_back(c.dist);
    exterior.push_back(c.on_boundary ? 1 : 0);
    index.emplace(BandGrid::pack(l.i, l.j, l.k), row);
    if (c.on_boundary) ++exterior_count;
}

constexpr std::array<std::array<int, 3>, 6> kFaceOffsets = {{
    {{1, 0, 0}}, {{-1, 0, 0}}, {{0, 1, 0}}, {{0, -1, 0}}, {{0, 0, 1}}, {{0, 0, -1}},
}};

} // namespace

BandGrid build_band(const Surface& surface, double dx, int interp_degree, int stencil_order,
                    Exec mode) {
    if (!(dx > 0.0)) throw std::invalid_argument("dx must be positive");
    if (interp_degree != 3) throw std::invalid_argument("only tri-cubic interpolation is supported");
    if (stencil_order != 2) throw std::invalid_argument("only the 7-point Laplacian is supported");

    BandGrid band(surface);
    band.dx_ = dx;
    band.bandwidth_ = band_lambda(3, interp_degree) * dx;

    std::unordered_set<std::int64_t> visited;
    std::vector<BandGrid::Lattice> frontier;

    const auto enqueue = [&](int i, int j, int k) {
        if (visited.insert(BandGrid::pack(i, j, k)).second) {
            frontier.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(j),
                                static_cast<std::int32_t>(k)});
        }
    };

    // Seed from a coarse parameter grid; the band is face-connected at this
    // bandwidth, so coverage only needs one seed per connected component.
    Vec2 lo, hi;
    surface.param_domain(lo, hi);
    constexpr int kSeedA = 48;
    constexpr int kSeedB = 16;
    for (int a = 0; a < kSeedA; ++a) {
        for (int b = 0; b < kSeedB; ++b) {
            const Vec2 p{lo.x() + (hi.x() - lo.x()) * (a + 0.5) / kSeedA,
                         lo.y() + (hi.y() - lo.y()) * (b + 0.5) / kSeedB};
            const Vec3 x = surface.embed(p);
            enqueue(static_cast<int>(std::lround(x.x() / dx)),
                    static_cast<int>(std::lround(x.y() / dx)),
                    static_cast<int>(std::lround(x.z() / dx)));
        }
    }

    // Flood fill. Each frontier generation is classified as one batch (the
    // only concurrent part); acceptance and neighbor pushes stay serial so
    // the row numbering is the same for every execution mode.
    std::vector<Classify> results;
    std::vector<BandGrid::Lattice> next;
    while (!frontier.empty()) {
        results.assign(frontier.size(), Classify{});
        par::for_each_index_dynamic(static_cast<Index>(frontier.size()), mode, [&](Index t) {
            const BandGrid::Lattice& l = frontier[t];
            results[t] = classify_candidate(surface, Vec3{dx * l.i, dx * l.j, dx * l.k},
                                            band.bandwidth_);
        });
        next.clear();
        for (std::size_t t = 0; t < frontier.size(); ++t) {
            const Classify& c = results[t];
            if (c.degenerate) {
                ++band.degenerate_rejections_;
                continue;
            }
            if (!c.accepted) continue;
            add_point(frontier[t], c, band.lattice_, band.cp_, band.cpbar_, band.dist_,
                      band.exterior_, band.index_, band.exterior_count_);
            for (const auto& f : kFaceOffsets) {
                const int ni = frontier[t].i + f[0];
                const int nj = frontier[t].j + f[1];
                const int nk = frontier[t].k + f[2];
                if (visited.insert(BandGrid::pack(ni, nj, nk)).second) {
                    next.push_back({static_cast<std::int32_t>(ni), static_cast<std::int32_t>(nj),
                                    static_cast<std::int32_t>(nk)});
                }
            }
        }
        frontier.swap(next);
    }

    // Closure: every tri-cubic node referenced through cp or cpbar of any
    // band point (including ones added here) joins the band, along with the
    // face neighbors of each such node. Added points may exceed the nominal
    // bandwidth slightly; they carry normal classifications.
    const double inf = std::numeric_limits<double>::infinity();
    const auto ensure_point = [&](int i, int j, int k) {
        if (band.index_.count(BandGrid::pack(i, j, k))) return;
        const Classify c = classify_candidate(surface, Vec3{dx * i, dx * j, dx * k}, inf);
        if (c.degenerate) {
            throw Error("band closure reached a point with no unique closest point");
        }
        add_point({static_cast<std::int32_t>(i), static_cast<std::int32_t>(j),
                   static_cast<std::int32_t>(k)},
                  c, band.lattice_, band.cp_, band.cpbar_, band.dist_, band.exterior_,
                  band.index_, band.exterior_count_);
    };

    std::unordered_set<std::int64_t> expanded;
    for (Index r = 0; r < band.size(); ++r) {
        const Vec3 targets[2] = {band.cp_[r], band.cpbar_[r]};
        const int ntargets = band.exterior_[r] ? 2 : 1;
        for (int q = 0; q < ntargets; ++q) {
            const int bi = tricubic_base(targets[q].x() / dx);
            const int bj = tricubic_base(targets[q].y() / dx);
            const int bk = tricubic_base(targets[q].z() / dx);
            for (int di = -1; di <= 2; ++di) {
                for (int dj = -1; dj <= 2; ++dj) {
                    for (int dk = -1; dk <= 2; ++dk) {
                        const int ni = bi + di;
                        const int nj = bj + dj;
                        const int nk = bk + dk;
                        ensure_point(ni, nj, nk);
                        if (expanded.insert(BandGrid::pack(ni, nj, nk)).second) {
                            for (const auto& f : kFaceOffsets) {
                                ensure_point(ni + f[0], nj + f[1], nk + f[2]);
                            }
                        }
                    }
                }
            }
        }
    }

    return band;
}

} // namespace cpband
