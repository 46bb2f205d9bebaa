#include "recad/projection.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace recad {

SeedGrid::SeedGrid(const Spline& s, int min_samples_per_span) {
    std::array<std::vector<double>, 3> axes;
    for (int d = 0; d < s.dim_param(); ++d) {
        const auto breaks = s.kv(d).breakpoints();
        const int per_span = std::max(s.degree(d) + 1, min_samples_per_span);
        auto& ax = axes[static_cast<size_t>(d)];
        for (size_t b = 0; b + 1 < breaks.size(); ++b) {
            for (int i = 0; i < per_span; ++i)
                ax.push_back(breaks[b] +
                             (breaks[b + 1] - breaks[b]) * i / per_span);
        }
        ax.push_back(breaks.back());
    }
    const size_t nu = axes[0].size();
    const size_t nv = s.dim_param() > 1 ? axes[1].size() : 1;
    const size_t nw = s.dim_param() > 2 ? axes[2].size() : 1;
    params_.reserve(nu * nv * nw);
    points_.reserve(nu * nv * nw);
    for (size_t k = 0; k < nw; ++k)
        for (size_t j = 0; j < nv; ++j)
            for (size_t i = 0; i < nu; ++i) {
                ParametricPoint at;
                if (s.dim_param() == 1)
                    at = ParametricPoint(axes[0][i]);
                else if (s.dim_param() == 2)
                    at = ParametricPoint(axes[0][i], axes[1][j]);
                else
                    at = ParametricPoint(axes[0][i], axes[1][j], axes[2][k]);
                params_.push_back(at);
                points_.push_back(evaluate(s, at));
            }
}

ParametricPoint SeedGrid::nearest(const Vec3& query) const {
    size_t best = 0;
    double best_d2 = (points_[0] - query).squaredNorm();
    for (size_t i = 1; i < points_.size(); ++i) {
        const double d2 = (points_[i] - query).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = i;
        }
    }
    return params_[best];
}

namespace {

ParametricPoint clamp_params(const Spline& s, ParametricPoint at) {
    for (int d = 0; d < s.dim_param(); ++d)
        at[d] = std::clamp(at[d], s.kv(d).min(), s.kv(d).max());
    return at;
}

bool first_order_optimal(const Spline& s, const ParametricPoint& at,
                         const Vec3& residual) {
    for (int d = 0; d < s.dim_param(); ++d) {
        const Vec3 tangent = derivative(s, at, d, 1);
        const double g = tangent.dot(residual);
        const double scale = tangent.norm() * residual.norm();
        const bool at_lo = at[d] <= s.kv(d).min();
        const bool at_hi = at[d] >= s.kv(d).max();
        if (std::abs(g) <= 1e-8 * scale + 1e-300) continue;
        // at a bound the gradient may push outward
        if (at_lo && g > 0.0) continue;
        if (at_hi && g < 0.0) continue;
        return false;
    }
    return true;
}

} // namespace

ProjectionResult project_point(const Spline& s, const Vec3& query,
                               std::optional<ParametricPoint> seed,
                               const ProjectionOptions& opts) {
    if (!query.allFinite())
        throw ValidationError("project_point: non-finite query");

    ParametricPoint u = seed ? clamp_params(s, *seed)
                             : SeedGrid(s, opts.min_samples_per_span)
                                   .nearest(query);
    const int dp = s.dim_param();
    double param_scale = 0.0;
    for (int d = 0; d < dp; ++d)
        param_scale = std::max(param_scale, s.kv(d).max() - s.kv(d).min());

    Vec3 r = evaluate(s, u) - query;
    double dist = r.norm();
    double damping = 1.0;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        Eigen::Matrix<double, 3, Eigen::Dynamic> J(3, dp);
        for (int d = 0; d < dp; ++d) J.col(d) = derivative(s, u, d, 1);
        const Eigen::MatrixXd H =
            J.transpose() * J +
            1e-14 * J.squaredNorm() * Eigen::MatrixXd::Identity(dp, dp);
        const Eigen::VectorXd g = J.transpose() * r;
        Eigen::VectorXd step = H.ldlt().solve(-g);
        if (!step.allFinite()) step = -g;

        // damped update, halving on distance increase
        ParametricPoint u_new = u;
        double dist_new = dist;
        double lambda = damping;
        bool improved = false;
        for (int halvings = 0; halvings < 30; ++halvings) {
            ParametricPoint cand = u;
            for (int d = 0; d < dp; ++d) cand[d] = u[d] + lambda * step(d);
            cand = clamp_params(s, cand);
            const double d_cand = (evaluate(s, cand) - query).norm();
            if (d_cand <= dist) {
                u_new = cand;
                dist_new = d_cand;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!improved) break;

        double du = 0.0;
        for (int d = 0; d < dp; ++d) du = std::max(du, std::abs(u_new[d] - u[d]));
        const double ddist = dist - dist_new;
        u = u_new;
        r = evaluate(s, u) - query;
        dist = dist_new;
        damping = std::min(1.0, lambda * 2.0);
        if (du < opts.param_tol * std::max(param_scale, 1.0) ||
            ddist < opts.distance_tol)
            break;
    }

    ProjectionResult result{u, dist, it};
    bool clamped = false;
    for (int d = 0; d < dp; ++d)
        clamped |= (u[d] <= s.kv(d).min() || u[d] >= s.kv(d).max());
    if (!first_order_optimal(s, u, r) && it >= opts.max_iterations && !clamped)
        throw ProjectionError("projection did not converge", result);
    return result;
}

std::vector<ProjectionResult> project_points(const Spline& s,
                                             const std::vector<Vec3>& queries,
                                             const ProjectionOptions& opts,
                                             int* failures) {
    std::vector<ProjectionResult> out;
    out.reserve(queries.size());
    if (failures) *failures = 0;
    if (queries.empty()) return out;
    const SeedGrid grid(s, opts.min_samples_per_span);
    for (const auto& q : queries) {
        try {
            out.push_back(project_point(s, q, grid.nearest(q), opts));
        } catch (const ProjectionError& e) {
            if (failures) ++(*failures);
            out.push_back(e.best);
        }
    }
    return out;
}

} // namespace recad
