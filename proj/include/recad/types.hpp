#ifndef RECAD_TYPES_HPP
#define RECAD_TYPES_HPP

#include <Eigen/Core>
#include <array>
#include <cassert>

namespace recad {

using Vec3 = Eigen::Vector3d;

/// A point in the parameter space of a spline: one coordinate per
/// parametric direction (1 for curves, 2 for surfaces, 3 for trivariates).
struct ParametricPoint {
    std::array<double, 3> coords{0.0, 0.0, 0.0};
    int dim = 0;

    ParametricPoint() = default;
    explicit ParametricPoint(double u) : coords{u, 0.0, 0.0}, dim(1) {}
    ParametricPoint(double u, double v) : coords{u, v, 0.0}, dim(2) {}
    ParametricPoint(double u, double v, double w) : coords{u, v, w}, dim(3) {}

    double operator[](int i) const {
        assert(i >= 0 && i < dim);
        return coords[static_cast<size_t>(i)];
    }
    double& operator[](int i) {
        assert(i >= 0 && i < dim);
        return coords[static_cast<size_t>(i)];
    }
};

/// Library-wide numeric settings. Operations read the active record via
/// settings(); tests may tighten or relax tolerances through it.
struct Settings {
    /// Absolute tolerance (model units) within which knot insertion and
    /// degree elevation must leave the geometry unchanged.
    double geometric_identity_tol = 1e-12;
    /// Points closer than this are treated as one sample during fitting.
    double merge_tolerance = 1e-7;
    /// Relative slack when checking parameters against the knot span.
    double domain_slack = 1e-10;
};

Settings& settings();

} // namespace recad

#endif
