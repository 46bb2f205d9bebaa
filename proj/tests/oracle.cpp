#include "oracle.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

using recad::KnotVector;
using recad::ParametricPoint;
using recad::Spline;
using recad::Vec3;

double basis(int i, int p, double u, const std::vector<double>& U) {
    if (p == 0) {
        const size_t si = static_cast<size_t>(i);
        if (U[si] <= u && u < U[si + 1]) return 1.0;
        // close the final span so the domain endpoint belongs to the last box
        if (u == U.back() && U[si + 1] == U.back() && U[si] < U[si + 1])
            return 1.0;
        return 0.0;
    }
    const size_t si = static_cast<size_t>(i);
    double a = 0.0, b = 0.0;
    if (U[si + static_cast<size_t>(p)] > U[si])
        a = (u - U[si]) / (U[si + static_cast<size_t>(p)] - U[si]) *
            basis(i, p - 1, u, U);
    if (U[si + static_cast<size_t>(p) + 1] > U[si + 1])
        b = (U[si + static_cast<size_t>(p) + 1] - u) /
            (U[si + static_cast<size_t>(p) + 1] - U[si + 1]) *
            basis(i + 1, p - 1, u, U);
    return a + b;
}

Vec3 evaluate(const Spline& s, const ParametricPoint& at) {
    const int dp = s.dim_param();
    std::array<std::vector<double>, 3> N;
    for (int d = 0; d < dp; ++d) {
        const auto& U = s.kv(d).knots();
        const int p = s.degree(d);
        N[static_cast<size_t>(d)].resize(static_cast<size_t>(s.extent(d)));
        for (int i = 0; i < s.extent(d); ++i)
            N[static_cast<size_t>(d)][static_cast<size_t>(i)] =
                basis(i, p, at[d], U);
    }
    const auto ctrl = s.control_points();
    const auto w = s.weights();
    Vec3 num = Vec3::Zero();
    double den = 0.0;
    const int n0 = s.extent(0);
    const int n1 = dp > 1 ? s.extent(1) : 1;
    const int n2 = dp > 2 ? s.extent(2) : 1;
    for (int k = 0; k < n2; ++k)
        for (int j = 0; j < n1; ++j)
            for (int i = 0; i < n0; ++i) {
                double b = N[0][static_cast<size_t>(i)];
                if (dp > 1) b *= N[1][static_cast<size_t>(j)];
                if (dp > 2) b *= N[2][static_cast<size_t>(k)];
                const size_t flat =
                    static_cast<size_t>(i + n0 * (j + n1 * k));
                const double wi = w.empty() ? 1.0 : w[flat];
                num += b * wi * ctrl[flat];
                den += b * wi;
            }
    return num / den;
}

Vec3 fd_derivative(const Spline& s, const ParametricPoint& at, int direction,
                   double h) {
    const auto& kv = s.kv(direction);
    const double u = at[direction];
    auto shifted = [&](double du) {
        ParametricPoint p = at;
        p[direction] = u + du;
        return recad::evaluate(s, p);
    };
    if (u - h < kv.min()) // second-order forward stencil at the left end
        return (-3.0 * shifted(0) + 4.0 * shifted(h) - shifted(2 * h)) /
               (2.0 * h);
    if (u + h > kv.max()) // and backward at the right end
        return (3.0 * shifted(0) - 4.0 * shifted(-h) + shifted(-2 * h)) /
               (2.0 * h);
    return (shifted(h) - shifted(-h)) / (2.0 * h);
}

KnotVector random_knot_vector(Rng& rng, int degree, int max_extra_knots,
                              double lo, double hi) {
    std::uniform_int_distribution<int> extra_dist(0, max_extra_knots);
    std::uniform_real_distribution<double> udist(0.15, 0.85);
    const int extra = extra_dist(rng);
    std::vector<double> interior;
    for (int i = 0; i < extra; ++i)
        interior.push_back(lo + (hi - lo) * udist(rng));
    std::sort(interior.begin(), interior.end());
    std::vector<double> knots;
    for (int i = 0; i <= degree; ++i) knots.push_back(lo);
    for (double v : interior) knots.push_back(v);
    for (int i = 0; i <= degree; ++i) knots.push_back(hi);
    return KnotVector(degree, std::move(knots));
}

namespace {

std::vector<Vec3> random_points(Rng& rng, int n, double scale = 2.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    std::vector<Vec3> pts(static_cast<size_t>(n));
    for (auto& p : pts) p = Vec3(dist(rng), dist(rng), dist(rng));
    return pts;
}

std::vector<double> random_weights(Rng& rng, int n) {
    std::uniform_real_distribution<double> dist(0.5, 2.0);
    std::vector<double> w(static_cast<size_t>(n));
    for (auto& x : w) x = dist(rng);
    return w;
}

} // namespace

Spline random_curve(Rng& rng, int max_degree, int max_extra_knots,
                    bool rational) {
    std::uniform_int_distribution<int> pdist(1, max_degree);
    auto kv = random_knot_vector(rng, pdist(rng), max_extra_knots);
    const int n = kv.num_control();
    return Spline::curve(std::move(kv), random_points(rng, n),
                         rational ? random_weights(rng, n)
                                  : std::vector<double>{});
}

Spline random_surface(Rng& rng, int max_degree, int max_extra_knots,
                      bool rational) {
    std::uniform_int_distribution<int> pdist(1, max_degree);
    auto ku = random_knot_vector(rng, pdist(rng), max_extra_knots);
    auto kv = random_knot_vector(rng, pdist(rng), max_extra_knots);
    const int n = ku.num_control() * kv.num_control();
    return Spline::surface(std::move(ku), std::move(kv), random_points(rng, n),
                           rational ? random_weights(rng, n)
                                    : std::vector<double>{});
}

Spline random_trivariate(Rng& rng, int max_degree, int max_extra_knots,
                         bool rational) {
    std::uniform_int_distribution<int> pdist(1, max_degree);
    auto ku = random_knot_vector(rng, pdist(rng), max_extra_knots);
    auto kv = random_knot_vector(rng, pdist(rng), max_extra_knots);
    auto kw = random_knot_vector(rng, pdist(rng), max_extra_knots);
    const int n = ku.num_control() * kv.num_control() * kw.num_control();
    return Spline::trivariate(std::move(ku), std::move(kv), std::move(kw),
                              random_points(rng, n),
                              rational ? random_weights(rng, n)
                                       : std::vector<double>{});
}

std::vector<ParametricPoint> sample_grid(const Spline& s, int per_direction) {
    std::array<std::vector<double>, 3> params;
    for (int d = 0; d < s.dim_param(); ++d) {
        const double lo = s.kv(d).min(), hi = s.kv(d).max();
        for (int i = 0; i < per_direction; ++i)
            params[static_cast<size_t>(d)].push_back(
                lo + (hi - lo) * i / (per_direction - 1));
    }
    std::vector<ParametricPoint> out;
    const size_t nu = params[0].size();
    const size_t nv = s.dim_param() > 1 ? params[1].size() : 1;
    const size_t nw = s.dim_param() > 2 ? params[2].size() : 1;
    for (size_t k = 0; k < nw; ++k)
        for (size_t j = 0; j < nv; ++j)
            for (size_t i = 0; i < nu; ++i) {
                if (s.dim_param() == 1)
                    out.emplace_back(params[0][i]);
                else if (s.dim_param() == 2)
                    out.emplace_back(params[0][i], params[1][j]);
                else
                    out.emplace_back(params[0][i], params[1][j], params[2][k]);
            }
    return out;
}

double max_grid_deviation(const Spline& a, const Spline& b,
                          int per_direction) {
    double worst = 0.0;
    for (const auto& at : sample_grid(a, per_direction))
        worst = std::max(worst,
                         (recad::evaluate(a, at) - recad::evaluate(b, at)).norm());
    return worst;
}

} // namespace oracle
