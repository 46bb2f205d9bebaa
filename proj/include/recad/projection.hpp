#ifndef RECAD_PROJECTION_HPP
#define RECAD_PROJECTION_HPP

#include <optional>
#include <vector>

#include "recad/errors.hpp"
#include "recad/spline.hpp"

namespace recad {

/// Foot point of a query on a spline.
struct ProjectionResult {
    ParametricPoint parametric;
    double distance = 0.0;
    int iterations = 0;
};

/// Thrown when the iteration does not converge; carries the best iterate.
class ProjectionError : public Error {
public:
    ProjectionError(const std::string& msg, ProjectionResult best)
        : Error(msg), best(std::move(best)) {}
    ProjectionResult best;
};

struct ProjectionOptions {
    int max_iterations = 50;
    /// Convergence thresholds: parameter update and distance improvement.
    double param_tol = 1e-12;
    double distance_tol = 1e-14;
    /// Seed grid density: samples per knot span per direction.
    int min_samples_per_span = 8;
};

/// Precomputed seed grid for repeated projections onto one spline.
class SeedGrid {
public:
    explicit SeedGrid(const Spline& s, int min_samples_per_span = 8);
    ParametricPoint nearest(const Vec3& query) const;

private:
    std::vector<ParametricPoint> params_;
    std::vector<Vec3> points_;
};

/// Locally closest point on the spline (damped Gauss-Newton on the squared
/// distance, first derivatives only). Parameters are clamped to the domain.
ProjectionResult project_point(const Spline& s, const Vec3& query,
                               std::optional<ParametricPoint> seed = {},
                               const ProjectionOptions& opts = {});

/// Batch projection; per-point failures are downgraded to their best
/// iterate instead of aborting the batch (count reported via `failures`).
std::vector<ProjectionResult> project_points(
    const Spline& s, const std::vector<Vec3>& queries,
    const ProjectionOptions& opts = {}, int* failures = nullptr);

} // namespace recad

#endif
