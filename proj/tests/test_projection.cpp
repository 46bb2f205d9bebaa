#include <doctest.h>

#include <random>

#include "oracle.hpp"
#include "recad/projection.hpp"

using namespace recad;

namespace {

Spline planar_patch() {
    // bilinear patch spanning [0,2]x[0,1] in the xy-plane
    return Spline::surface(KnotVector(1, {0, 0, 1, 1}),
                           KnotVector(1, {0, 0, 1, 1}),
                           {Vec3(0, 0, 0), Vec3(2, 0, 0), Vec3(0, 1, 0),
                            Vec3(2, 1, 0)});
}

} // namespace

TEST_CASE("project_point: on-surface point is recovered") {
    oracle::Rng rng(17);
    for (int t = 0; t < 8; ++t) {
        const Spline s = t % 2 == 0 ? oracle::random_surface(rng, 3, 2, false)
                                    : oracle::random_curve(rng, 3, 3, t % 4 == 1);
        std::uniform_real_distribution<double> udist(0.05, 0.95);
        ParametricPoint at;
        if (s.dim_param() == 1)
            at = ParametricPoint(udist(rng));
        else
            at = ParametricPoint(udist(rng), udist(rng));
        const Vec3 q = evaluate(s, at);
        const auto res = project_point(s, q);
        CHECK(res.distance < 1e-9);
        CHECK((evaluate(s, res.parametric) - q).norm() < 1e-9);
    }
}

TEST_CASE("project_point: orthogonal projection onto a planar patch") {
    const auto res = project_point(planar_patch(), Vec3(0.5, 0.25, 1.0));
    CHECK(res.parametric[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(res.parametric[1] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(res.distance == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("project_point: foot point reconstructed from a normal offset") {
    oracle::Rng rng(29);
    for (int t = 0; t < 6; ++t) {
        const Spline c = oracle::random_curve(rng, 3, 2, false);
        const ParametricPoint at(0.37);
        const Vec3 p = evaluate(c, at);
        const Vec3 tangent = derivative(c, at, 0, 1).normalized();
        // any vector orthogonal to the tangent
        Vec3 n = tangent.cross(Vec3(0.12, 0.87, -0.41));
        if (n.norm() < 1e-8) n = tangent.cross(Vec3(1, 0, 0));
        n.normalize();
        const Vec3 q = p + 0.05 * n;
        const auto res = project_point(c, q);
        // a closer branch of the curve may win; accept only improvements
        if (std::abs(res.parametric[0] - 0.37) > 1e-6)
            CHECK(res.distance < 0.05 - 1e-12);
        else
            CHECK(res.parametric[0] == doctest::Approx(0.37).epsilon(1e-6));
    }
}

TEST_CASE("project_points: batch on-surface grid") {
    oracle::Rng rng(31);
    const Spline s = oracle::random_surface(rng, 3, 2, false);
    std::vector<Vec3> queries;
    for (const auto& at : oracle::sample_grid(s, 20))
        queries.push_back(evaluate(s, at));
    int failures = 0;
    const auto results = project_points(s, queries, {}, &failures);
    CHECK(failures == 0);
    REQUIRE(results.size() == queries.size());
    for (const auto& r : results) CHECK(r.distance < 1e-9);
}

TEST_CASE("project_points: empty input") {
    oracle::Rng rng(37);
    const Spline s = oracle::random_curve(rng, 2, 1, false);
    CHECK(project_points(s, {}).empty());
}

TEST_CASE("project_points: perturbed points stay within the perturbation") {
    oracle::Rng rng(41);
    const Spline s = oracle::random_surface(rng, 3, 1, false);
    std::uniform_real_distribution<double> dir(-1.0, 1.0);
    std::vector<Vec3> queries;
    for (const auto& at : oracle::sample_grid(s, 32)) {
        Vec3 d(dir(rng), dir(rng), dir(rng));
        queries.push_back(evaluate(s, at) + 1e-3 * d.normalized());
    }
    const auto results = project_points(s, queries);
    double worst = 0.0;
    for (const auto& r : results) worst = std::max(worst, r.distance);
    CHECK(worst <= 1e-3 + 1e-9);
}

TEST_CASE("projection idempotence and clamping") {
    oracle::Rng rng(43);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    for (int t = 0; t < 6; ++t) {
        const Spline s = oracle::random_surface(rng, 2, 1, false);
        const Vec3 q(dist(rng), dist(rng), dist(rng));
        const auto r1 = project_point(s, q);
        for (int d = 0; d < s.dim_param(); ++d) {
            CHECK(r1.parametric[d] >= s.kv(d).min());
            CHECK(r1.parametric[d] <= s.kv(d).max());
        }
        const Vec3 foot = evaluate(s, r1.parametric);
        const auto r2 = project_point(s, foot, r1.parametric);
        for (int d = 0; d < s.dim_param(); ++d)
            CHECK(std::abs(r2.parametric[d] - r1.parametric[d]) < 1e-9);
    }
}
