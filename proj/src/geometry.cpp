#include "cpband/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace cpband {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kHalfPi = 0.5 * std::numbers::pi;

double wrap_angle(double a) {
    double w = std::fmod(a, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    return w;
}

// --- Mobius strip parameterization -------------------------------------

Vec3 mobius_embed(double R, double s, double t) {
    const double c = std::cos(0.5 * s);
    const double g = R + t * c;
    return {g * std::cos(s), g * std::sin(s), t * std::sin(0.5 * s)};
}

void mobius_jacobian(double R, double s, double t, Vec3& ds, Vec3& dt) {
    const double c = std::cos(0.5 * s);
    const double h = std::sin(0.5 * s);
    const double g = R + t * c;
    const double cs = std::cos(s);
    const double sn = std::sin(s);
    ds = {-g * sn - 0.5 * t * h * cs, g * cs - 0.5 * t * h * sn, 0.5 * t * c};
    dt = {c * cs, c * sn, h};
}

// Identification x(s + 2pi, t) = x(s, -t): reduce s into [0, 2pi) and flip t
// for every full turn.
Vec2 mobius_canonical_param(double s, double t) {
    const double k = std::floor(s / kTwoPi);
    double sc = s - k * kTwoPi;
    if (sc >= kTwoPi) sc -= kTwoPi;  // guard fmod-style edge
    const bool odd = std::fmod(std::fabs(k), 2.0) >= 0.5;
    return {sc, odd ? -t : t};
}

struct MobiusCandidate {
    Vec3 point;
    Vec2 param;
    double dist2;
};

// Gauss-Newton refinement of the squared distance from q to the strip,
// starting at (s, t). t is clamped to [-w, w]; if the unconstrained minimum
// leaves the strip the search finishes along the boundary curve with t fixed.
MobiusCandidate mobius_refine(double R, double w, const Vec3& q, double s, double t) {
    constexpr double kStepTol = 1e-12;
    constexpr int kMaxIter = 80;

    bool at_bound = false;
    for (int it = 0; it < kMaxIter; ++it) {
        Vec3 ds, dt;
        mobius_jacobian(R, s, t, ds, dt);
        const Vec3 r = mobius_embed(R, s, t) - q;
        // Normal equations; this parameterization has <ds,dt> = 0, so the
        // 2x2 system is essentially diagonal, but solve it generally.
        const double a = ds.squaredNorm();
        const double b = ds.dot(dt);
        const double c = dt.squaredNorm();
        const double g1 = ds.dot(r);
        const double g2 = dt.dot(r);
        const double det = a * c - b * b;
        if (det <= 0.0) break;
        double step_s = -(c * g1 - b * g2) / det;
        double step_t = -(a * g2 - b * g1) / det;

        double t_new = t + step_t;
        at_bound = false;
        if (t_new > w) {
            t_new = w;
            at_bound = true;
        } else if (t_new < -w) {
            t_new = -w;
            at_bound = true;
        }
        const double applied_t = t_new - t;
        s += step_s;
        t = t_new;
        if (std::sqrt(step_s * step_s + applied_t * applied_t) <= kStepTol) break;
    }

    if (at_bound) {
        // 1D polish along the edge curve.
        for (int it = 0; it < 40; ++it) {
            Vec3 ds, dt;
            mobius_jacobian(R, s, t, ds, dt);
            const Vec3 r = mobius_embed(R, s, t) - q;
            const double a = ds.squaredNorm();
            if (a <= 0.0) break;
            const double step_s = -ds.dot(r) / a;
            s += step_s;
            if (std::fabs(step_s) <= kStepTol) break;
        }
    }

    MobiusCandidate cand;
    cand.param = mobius_canonical_param(s, t);
    cand.point = mobius_embed(R, cand.param.x(), cand.param.y());
    cand.dist2 = (cand.point - q).squaredNorm();
    return cand;
}

constexpr int kSeedS = 32;
constexpr int kSeedT = 8;
constexpr int kRefineSeeds = 12;

ClosestPointResult mobius_closest_point(double R, double w, const Vec3& q) {
    struct Seed {
        double s, t, dist2;
    };
    std::vector<Seed> seeds;
    seeds.reserve(kSeedS * kSeedT);
    for (int i = 0; i < kSeedS; ++i) {
        const double s = kTwoPi * (i + 0.5) / kSeedS;
        for (int j = 0; j < kSeedT; ++j) {
            const double t = -w + 2.0 * w * (j + 0.5) / kSeedT;
            seeds.push_back({s, t, (mobius_embed(R, s, t) - q).squaredNorm()});
        }
    }
    std::partial_sort(seeds.begin(), seeds.begin() + kRefineSeeds, seeds.end(),
                      [](const Seed& a, const Seed& b) { return a.dist2 < b.dist2; });

    std::vector<MobiusCandidate> cands;
    cands.reserve(kRefineSeeds);
    for (int i = 0; i < kRefineSeeds; ++i) {
        cands.push_back(mobius_refine(R, w, q, seeds[i].s, seeds[i].t));
    }
    const auto best = std::min_element(cands.begin(), cands.end(),
                                       [](const MobiusCandidate& a, const MobiusCandidate& b) {
                                           return a.dist2 < b.dist2;
                                       });

    const double best_dist = std::sqrt(best->dist2);
    // Non-unique minimizer: another local minimum at essentially the same
    // distance but a different surface location.
    const double dist_tol = 1e-9 * std::max(1.0, best_dist);
    for (const auto& c : cands) {
        if (std::sqrt(c.dist2) <= best_dist + dist_tol &&
            (c.point - best->point).norm() > 1e-6 * std::max(1.0, R + w)) {
            throw DegenerateQuery("mobius closest point is not unique near query");
        }
    }

    ClosestPointResult res;
    res.cp = best->point;
    res.distance = best_dist;
    res.param = best->param;
    res.on_boundary = std::fabs(w - std::fabs(best->param.y())) <= kBoundaryParamTol;
    return res;
}

// --- hemisphere / sphere closed forms -----------------------------------

ClosestPointResult sphere_closest_point(double R, const Vec3& q, bool upper_only) {
    const double r3 = q.norm();
    if (r3 <= 1e-9 * R) {
        throw DegenerateQuery("closest point undefined at sphere center");
    }
    ClosestPointResult res;
    const double rho = std::hypot(q.x(), q.y());
    if (!upper_only || q.z() >= 0.0) {
        res.cp = (R / r3) * q;
        res.distance = std::fabs(r3 - R);
        const double theta = std::atan2(rho, q.z());
        const double phi = rho > 0.0 ? wrap_angle(std::atan2(q.y(), q.x())) : 0.0;
        res.param = Vec2{phi, theta};
        res.on_boundary = upper_only && std::fabs(theta - kHalfPi) <= kBoundaryParamTol;
    } else {
        // Below the equatorial plane the minimizer is the nearest equator
        // point.
        if (rho <= 1e-9 * R) {
            throw DegenerateQuery("closest point undefined on the hemisphere axis below the equator");
        }
        res.cp = Vec3{R * q.x() / rho, R * q.y() / rho, 0.0};
        res.distance = (q - res.cp).norm();
        res.param = Vec2{wrap_angle(std::atan2(q.y(), q.x())), kHalfPi};
        res.on_boundary = true;
    }
    return res;
}

} // namespace

// --- Surface -------------------------------------------------------------

Surface Surface::upper_hemisphere(double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("hemisphere radius must be positive");
    Surface s;
    s.kind_ = Kind::UpperHemisphere;
    s.radius_ = radius;
    return s;
}

Surface Surface::sphere(double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("sphere radius must be positive");
    Surface s;
    s.kind_ = Kind::Sphere;
    s.radius_ = radius;
    return s;
}

Surface Surface::mobius_strip(double center_radius, double half_width) {
    if (!(center_radius > 0.0) || !(half_width > 0.0)) {
        throw std::invalid_argument("mobius parameters must be positive");
    }
    if (!(center_radius > 2.0 * half_width)) {
        throw std::invalid_argument("mobius strip requires center_radius > 2*half_width");
    }
    Surface s;
    s.kind_ = Kind::MobiusStrip;
    s.center_radius_ = center_radius;
    s.half_width_ = half_width;
    return s;
}

Vec3 Surface::embed(const Vec2& p) const {
    switch (kind_) {
    case Kind::UpperHemisphere:
    case Kind::Sphere: {
        const double phi = p.x();
        const double theta = p.y();
        const double st = std::sin(theta);
        return radius_ * Vec3{std::cos(phi) * st, std::sin(phi) * st, std::cos(theta)};
    }
    case Kind::MobiusStrip:
        return mobius_embed(center_radius_, p.x(), p.y());
    }
    return Vec3::Zero();
}

void Surface::param_domain(Vec2& lo, Vec2& hi) const {
    switch (kind_) {
    case Kind::UpperHemisphere:
        lo = {0.0, 0.0};
        hi = {kTwoPi, kHalfPi};
        break;
    case Kind::Sphere:
        lo = {0.0, 0.0};
        hi = {kTwoPi, std::numbers::pi};
        break;
    case Kind::MobiusStrip:
        lo = {0.0, -half_width_};
        hi = {kTwoPi, half_width_};
        break;
    }
}

Vec2 Surface::sample_param(std::mt19937& rng) const {
    Vec2 lo, hi;
    param_domain(lo, hi);
    std::uniform_real_distribution<double> du(lo.x(), hi.x());
    std::uniform_real_distribution<double> dv(lo.y(), hi.y());
    const double a = du(rng);
    const double b = dv(rng);
    return {a, b};
}

double Surface::extent() const {
    switch (kind_) {
    case Kind::UpperHemisphere:
    case Kind::Sphere:
        return radius_;
    case Kind::MobiusStrip:
        return center_radius_ + half_width_;
    }
    return 1.0;
}

// --- queries ---------------------------------------------------------------

ClosestPointResult closest_point(const Surface& s, const Vec3& x) {
    switch (s.kind_) {
    case Surface::Kind::UpperHemisphere:
        return sphere_closest_point(s.radius_, x, /*upper_only=*/true);
    case Surface::Kind::Sphere:
        return sphere_closest_point(s.radius_, x, /*upper_only=*/false);
    case Surface::Kind::MobiusStrip:
        return mobius_closest_point(s.center_radius_, s.half_width_, x);
    }
    throw Error("unreachable surface kind");
}

Vec3 modified_closest_point(const Surface& s, const Vec3& x) {
    const ClosestPointResult first = closest_point(s, x);
    const Vec3 reflected = 2.0 * first.cp - x;
    return closest_point(s, reflected).cp;
}

SurfaceFrame analytic_frame(const Surface& s, const Vec3& y) {
    SurfaceFrame f;
    switch (s.kind_) {
    case Surface::Kind::UpperHemisphere:
    case Surface::Kind::Sphere: {
        const double r3 = y.norm();
        if (r3 <= 0.0) throw DegenerateQuery("frame undefined at sphere center");
        const Vec3 ys = (s.radius_ / r3) * y;
        f.normal = ys / s.radius_;
        if (s.kind_ == Surface::Kind::UpperHemisphere) {
            const double rho = std::hypot(ys.x(), ys.y());
            const double theta = std::atan2(rho, ys.z());
            if (std::fabs(theta - kHalfPi) <= kBoundaryParamTol && rho > 0.0) {
                f.boundary_tangent = Vec3{-ys.y() / rho, ys.x() / rho, 0.0};
                f.conormal = Vec3{0.0, 0.0, -1.0};
            }
        }
        return f;
    }
    case Surface::Kind::MobiusStrip: {
        const ClosestPointResult cpres = closest_point(s, y);
        const double sp = cpres.param->x();
        const double tp = cpres.param->y();
        Vec3 ds, dt;
        mobius_jacobian(s.center_radius_, sp, tp, ds, dt);
        f.normal = ds.cross(dt).normalized();
        if (std::fabs(s.half_width_ - std::fabs(tp)) <= kBoundaryParamTol) {
            f.boundary_tangent = ds.normalized();
            // <ds,dt> = 0 for this parameterization, so the outward in-plane
            // direction is just dt oriented toward increasing |t|.
            f.conormal = (tp >= 0.0 ? 1.0 : -1.0) * dt.normalized();
        }
        return f;
    }
    }
    throw Error("unreachable surface kind");
}

Vec3 frame_boundary_tangent(const SurfaceFrame& f) {
    if (!f.boundary_tangent) throw NotOnBoundary("boundary tangent requested away from the boundary");
    return *f.boundary_tangent;
}

Vec3 frame_conormal(const SurfaceFrame& f) {
    if (!f.conormal) throw NotOnBoundary("co-normal requested away from the boundary");
    return *f.conormal;
}

Vec3 parametric_sample(const Surface& s, const Vec2& params) {
    Vec2 lo = Vec2::Zero();
    Vec2 hi = Vec2::Zero();
    s.param_domain(lo, hi);
    constexpr double kSlack = 1e-12;
    if (params.x() < lo.x() - kSlack || params.x() > hi.x() + kSlack ||
        params.y() < lo.y() - kSlack || params.y() > hi.y() + kSlack) {
        throw OutOfDomain("parameters outside the surface domain");
    }
    return s.embed(params);
}

} // namespace cpband
