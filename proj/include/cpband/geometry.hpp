#pragma once

#include <Eigen/Dense>

#include <optional>
#include <random>

#include "cpband/errors.hpp"

namespace cpband {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

// Result of projecting an ambient point onto the (closed) surface.
struct ClosestPointResult {
    Vec3 cp = Vec3::Zero();             // closest surface point
    double distance = 0.0;              // |query - cp|
    bool on_boundary = false;           // cp lies on the surface boundary
    std::optional<Vec2> param;          // surface parameters at cp
};

// Orthonormal frame at a surface point. The boundary tangent and the outward
// co-normal exist only at boundary points.
struct SurfaceFrame {
    Vec3 normal = Vec3::Zero();
    std::optional<Vec3> boundary_tangent;
    std::optional<Vec3> conormal;
};

// A shape with closest-point queries and boundary detection. Three variants:
//   UpperHemisphere(radius)            boundary = equator circle
//   Sphere(radius)                     closed, empty boundary
//   MobiusStrip(center_radius, half_width)
//                                      boundary = the single edge curve
//
// The Mobius strip uses the standard ruled parameterization
//   x(s,t) = ((R + t cos(s/2)) cos s, (R + t cos(s/2)) sin s, t sin(s/2)),
// s in [0,2pi), t in [-w,w]; note x(s + 2pi, t) = x(s, -t).
//
// All queries are pure functions of the immutable shape parameters and are
// safe to call concurrently.
class Surface {
public:
    enum class Kind { UpperHemisphere, Sphere, MobiusStrip };

    static Surface upper_hemisphere(double radius);
    static Surface sphere(double radius);
    static Surface mobius_strip(double center_radius, double half_width);

    Kind kind() const { return kind_; }
    double radius() const { return radius_; }
    double center_radius() const { return center_radius_; }
    double half_width() const { return half_width_; }

    bool has_boundary() const { return kind_ != Kind::Sphere; }

    // Embeds a parameter pair. Hemisphere/sphere use (phi, theta) with theta
    // the polar angle from the +z pole; the strip uses (s, t).
    Vec3 embed(const Vec2& param) const;

    // Parameter-space rectangle [lo, hi] per coordinate.
    void param_domain(Vec2& lo, Vec2& hi) const;

    // Uniform sample of the parameter rectangle (by parameter, not by area).
    Vec2 sample_param(std::mt19937& rng) const;

    // Rough length scale of the shape, used to size seed grids.
    double extent() const;

    friend ClosestPointResult closest_point(const Surface& s, const Vec3& x);
    friend Vec3 modified_closest_point(const Surface& s, const Vec3& x);
    friend SurfaceFrame analytic_frame(const Surface& s, const Vec3& y);

private:
    Surface() = default;

    Kind kind_ = Kind::Sphere;
    double radius_ = 1.0;         // hemisphere / sphere
    double center_radius_ = 1.0;  // Mobius R
    double half_width_ = 0.35;    // Mobius w
};

// Global minimizer of |x - y| over the closed surface, boundary included.
// Throws DegenerateQuery when the minimizer is not unique within tolerance
// (such points must never enter a band).
ClosestPointResult closest_point(const Surface& s, const Vec3& x);

// cp applied to the reflection r(x) = 2 cp(x) - x. Equals cp(x) for points
// whose closest point is away from the boundary.
Vec3 modified_closest_point(const Surface& s, const Vec3& x);

// Frame at a surface point y (projected internally if within 1e-10 of the
// surface). The normal is always available; the tangent/co-normal are set
// only at boundary points.
SurfaceFrame analytic_frame(const Surface& s, const Vec3& y);

// Convenience accessors that enforce the boundary precondition.
Vec3 frame_boundary_tangent(const SurfaceFrame& f);
Vec3 frame_conormal(const SurfaceFrame& f);

// Embeds params, throwing OutOfDomain outside the parameter rectangle.
Vec3 parametric_sample(const Surface& s, const Vec2& params);

// Parameter tolerance deciding boundary membership of a closest point.
inline constexpr double kBoundaryParamTol = 1e-10;

} // namespace cpband
