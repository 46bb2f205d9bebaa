#ifndef RECAD_KNOT_VECTOR_HPP
#define RECAD_KNOT_VECTOR_HPP

#include <span>
#include <vector>

#include <Eigen/Core>

namespace recad {

/// Clamped (open) knot vector of a fixed degree.
///
/// Invariants, checked on construction:
///  - knots are non-decreasing,
///  - no knot value has multiplicity above degree+1,
///  - the first and last values have multiplicity exactly degree+1,
///  - at least one non-degenerate span exists.
class KnotVector {
public:
    KnotVector() = default;
    KnotVector(int degree, std::vector<double> knots);

    /// Uniform clamped knot vector on [lo, hi] with the given control count.
    static KnotVector uniform(int degree, int num_control, double lo = 0.0,
                              double hi = 1.0);
    /// Single-span (Bezier) knot vector on [lo, hi].
    static KnotVector bezier(int degree, double lo = 0.0, double hi = 1.0);

    int degree() const { return degree_; }
    int num_control() const { return static_cast<int>(knots_.size()) - degree_ - 1; }
    int size() const { return static_cast<int>(knots_.size()); }
    double operator[](int i) const { return knots_[static_cast<size_t>(i)]; }
    const std::vector<double>& knots() const { return knots_; }

    double min() const { return knots_.front(); }
    double max() const { return knots_.back(); }

    bool is_bezier() const { return num_control() == degree_ + 1; }

    /// Index of the knot span containing u (clamped convention: the last
    /// span is closed on the right). u must already lie in [min, max].
    int find_span(double u) const;

    /// Multiplicity of the value u among the knots (exact comparison).
    int multiplicity(double u) const;

    /// Distinct knot values in increasing order.
    std::vector<double> breakpoints() const;

    /// Non-degenerate spans as index pairs (i, i+1) into the knot array.
    std::vector<int> span_starts() const;

    /// The degree+1 basis functions that are non-zero on the span.
    /// N must have room for degree+1 values.
    void basis_funs(int span, double u, std::span<double> N) const;

    /// Basis derivatives up to `order`; row k of `ders` holds the k-th
    /// derivatives of the degree+1 active functions.
    void ders_basis_funs(int span, double u, int order,
                         Eigen::MatrixXd& ders) const;

    /// Greville abscissae, one per control point (Eq.-style knot means).
    /// Throws for degree 0.
    std::vector<double> greville() const;

    /// Dense collocation row: values of all num_control() basis functions
    /// at u (zeros outside the active span).
    void collocation_row(double u, Eigen::Ref<Eigen::RowVectorXd> row) const;

    bool operator==(const KnotVector& other) const = default;

private:
    int degree_ = 0;
    std::vector<double> knots_;
};

/// Greville abscissae of a knot vector (free-function spelling).
std::vector<double> greville_abscissae(const KnotVector& kv);

} // namespace recad

#endif
