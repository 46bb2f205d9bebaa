#ifndef RECAD_SPLINE_HPP
#define RECAD_SPLINE_HPP

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "recad/knot_vector.hpp"
#include "recad/types.hpp"

namespace recad {

/// Tensor-product B-spline / NURBS mapping with 1..3 parametric directions
/// embedded in 3-space. Immutable after construction; all operations below
/// return new values.
///
/// Control points are stored in a flat net with direction 0 varying
/// fastest: flat = i + n0*(j + n1*k). Rational splines keep homogeneous
/// coordinates (w*x, w*y, w*z, w) internally so refinement operators act
/// on weights consistently.
class Spline {
public:
    Spline() = default;

    static Spline curve(KnotVector kv, std::vector<Vec3> control,
                        std::vector<double> weights = {});
    static Spline surface(KnotVector kv_u, KnotVector kv_v,
                          std::vector<Vec3> control,
                          std::vector<double> weights = {});
    static Spline trivariate(KnotVector kv_u, KnotVector kv_v, KnotVector kv_w,
                             std::vector<Vec3> control,
                             std::vector<double> weights = {});
    static Spline make(std::vector<KnotVector> kvs, std::vector<Vec3> control,
                       std::vector<double> weights = {});

    /// Construct directly from a homogeneous (n x 4) or polynomial (n x 3)
    /// coefficient matrix in net order.
    static Spline from_coefficients(std::vector<KnotVector> kvs,
                                    Eigen::MatrixXd coeffs);

    int dim_param() const { return dim_param_; }
    bool rational() const { return coeffs_.cols() == 4; }
    bool valid() const { return dim_param_ > 0; }

    int degree(int direction) const { return kv(direction).degree(); }
    const KnotVector& kv(int direction) const;
    int extent(int direction) const;
    int num_control() const { return static_cast<int>(coeffs_.rows()); }
    int flat_index(int i, int j = 0, int k = 0) const;

    Vec3 control_point(int flat) const;
    Vec3 control_point3(int i, int j, int k = 0) const;
    double weight(int flat) const;
    std::vector<Vec3> control_points() const;
    std::vector<double> weights() const; // empty when polynomial

    /// Homogeneous coefficient matrix (n x 4) or polynomial (n x 3).
    const Eigen::MatrixXd& coefficients() const { return coeffs_; }

    /// Axis-aligned bounding box of the control net (contains the image).
    Eigen::AlignedBox3d control_bbox() const;

    bool is_bezier() const;

    /// True when every direction's degree is <= the given cap.
    bool degrees_at_most(int cap) const;

    /// Total length of the control polygon: sum of control-net edge
    /// lengths along every parametric direction.
    double control_polygon_length() const;

private:
    int dim_param_ = 0;
    std::vector<KnotVector> kvs_;
    std::array<int, 3> extents_{1, 1, 1};
    Eigen::MatrixXd coeffs_; // n x 3 (polynomial) or n x 4 (homogeneous)

    void validate() const;
    friend Spline apply_direction_operator(const Spline&, int,
                                           const KnotVector&,
                                           const Eigen::MatrixXd&);
};

/// Map the point through the spline (rational basis when weighted).
Vec3 evaluate(const Spline& s, const ParametricPoint& at);

/// Partial derivative of the mapping of the given order along one
/// parametric direction. Orders above the degree give the zero vector.
Vec3 derivative(const Spline& s, const ParametricPoint& at, int direction,
                int order);

/// Insert `value` into the knot vector of `direction` `times` times.
/// Geometry is unchanged. Throws RefinementError when the resulting
/// multiplicity would exceed the degree.
Spline insert_knot(const Spline& s, int direction, double value,
                   int times = 1);

/// Raise the degree in one direction, keeping geometry identical.
Spline elevate_degree(const Spline& s, int direction, int times = 1);

/// Lower the degree in one direction by one. Returns the reduced spline
/// together with the measured maximum geometric deviation. Exact (error
/// ~ 0) whenever the input was produced by degree elevation.
std::pair<Spline, double> reduce_degree(const Spline& s, int direction);

/// Row of blending-function values (rational basis R_j for weighted
/// splines) over all control points at the parametric point.
void blending_row(const Spline& s, const ParametricPoint& at,
                  Eigen::Ref<Eigen::RowVectorXd> row);

/// Replace the control net along `direction` by `op * fibers`, adopting
/// the new knot vector. Used by refinement/reduction/composition.
Spline apply_direction_operator(const Spline& s, int direction,
                                const KnotVector& new_kv,
                                const Eigen::MatrixXd& op);

namespace detail {

/// 1D knot-insertion kernel on a coefficient matrix (n x C).
std::pair<KnotVector, Eigen::MatrixXd> insert_knot_fiber(
    const KnotVector& kv, const Eigen::MatrixXd& coeffs, double value,
    int times);

/// 1D degree-elevation kernel on a coefficient matrix (n x C).
std::pair<KnotVector, Eigen::MatrixXd> elevate_fiber(
    const KnotVector& kv, const Eigen::MatrixXd& coeffs, int times);

/// Exact operator matrices (n_new x n_old) for the maps above.
std::pair<KnotVector, Eigen::MatrixXd> insertion_operator(const KnotVector& kv,
                                                          double value,
                                                          int times);
std::pair<KnotVector, Eigen::MatrixXd> elevation_operator(const KnotVector& kv,
                                                          int times);

/// Knot vector obtained by lowering the degree by one while preserving
/// the continuity class of every interior breakpoint.
KnotVector reduced_knot_vector(const KnotVector& kv);

/// Dense per-direction sample parameters: `per_span` Chebyshev-distributed
/// points inside every non-degenerate span (strictly interior).
std::vector<double> chebyshev_span_samples(const KnotVector& kv,
                                           int per_span);

/// Check the parameter against the knot span of one direction, clamping
/// within the configured slack; throws DomainError otherwise.
double clamp_to_domain(const KnotVector& kv, double u, int direction);

} // namespace detail

} // namespace recad

#endif
