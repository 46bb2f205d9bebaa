#include "recad/spline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "recad/errors.hpp"

namespace recad {

namespace {

std::string dir_name(int d) {
    static const char* names[3] = {"u", "v", "w"};
    return (d >= 0 && d < 3) ? names[d] : "?";
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

} // namespace

// ---------------------------------------------------------------------------
// Construction

Spline Spline::make(std::vector<KnotVector> kvs, std::vector<Vec3> control,
                    std::vector<double> weights) {
    Spline s;
    s.dim_param_ = static_cast<int>(kvs.size());
    if (s.dim_param_ < 1 || s.dim_param_ > 3)
        throw ValidationError("spline: 1 to 3 parametric directions required");
    s.kvs_ = std::move(kvs);
    for (int d = 0; d < s.dim_param_; ++d)
        s.extents_[static_cast<size_t>(d)] = s.kvs_[static_cast<size_t>(d)].num_control();

    const auto n = static_cast<Eigen::Index>(control.size());
    const bool rational = !weights.empty();
    s.coeffs_.resize(n, rational ? 4 : 3);
    if (rational && weights.size() != control.size())
        throw ValidationError("spline: weight count must match control count");
    for (Eigen::Index i = 0; i < n; ++i) {
        const size_t si = static_cast<size_t>(i);
        if (rational) {
            if (!(weights[si] > 0.0))
                throw ValidationError("spline: weights must be strictly positive");
            s.coeffs_.row(i) << control[si].x() * weights[si],
                control[si].y() * weights[si], control[si].z() * weights[si],
                weights[si];
        } else {
            s.coeffs_.row(i) = control[si].transpose();
        }
    }
    s.validate();
    return s;
}

Spline Spline::curve(KnotVector kv, std::vector<Vec3> control,
                     std::vector<double> weights) {
    return make({std::move(kv)}, std::move(control), std::move(weights));
}

Spline Spline::surface(KnotVector kv_u, KnotVector kv_v,
                       std::vector<Vec3> control,
                       std::vector<double> weights) {
    return make({std::move(kv_u), std::move(kv_v)}, std::move(control),
                std::move(weights));
}

Spline Spline::trivariate(KnotVector kv_u, KnotVector kv_v, KnotVector kv_w,
                          std::vector<Vec3> control,
                          std::vector<double> weights) {
    return make({std::move(kv_u), std::move(kv_v), std::move(kv_w)},
                std::move(control), std::move(weights));
}

Spline Spline::from_coefficients(std::vector<KnotVector> kvs,
                                 Eigen::MatrixXd coeffs) {
    Spline s;
    s.dim_param_ = static_cast<int>(kvs.size());
    if (s.dim_param_ < 1 || s.dim_param_ > 3)
        throw ValidationError("spline: 1 to 3 parametric directions required");
    s.kvs_ = std::move(kvs);
    for (int d = 0; d < s.dim_param_; ++d)
        s.extents_[static_cast<size_t>(d)] = s.kvs_[static_cast<size_t>(d)].num_control();
    if (coeffs.cols() != 3 && coeffs.cols() != 4)
        throw ValidationError("spline: coefficient matrix must have 3 or 4 columns");
    if (coeffs.cols() == 4 && (coeffs.col(3).array() <= 0.0).any())
        throw ValidationError("spline: weights must be strictly positive");
    s.coeffs_ = std::move(coeffs);
    s.validate();
    return s;
}

void Spline::validate() const {
    Eigen::Index expected = 1;
    for (int d = 0; d < dim_param_; ++d)
        expected *= extents_[static_cast<size_t>(d)];
    if (coeffs_.rows() != expected) {
        std::ostringstream msg;
        msg << "spline: control net size " << coeffs_.rows()
            << " does not match knot-vector arithmetic (" << expected << ")";
        throw ValidationError(msg.str());
    }
    if (!coeffs_.allFinite())
        throw ValidationError("spline: non-finite control data");
}

const KnotVector& Spline::kv(int direction) const {
    if (direction < 0 || direction >= dim_param_)
        throw ValidationError("spline: direction out of range");
    return kvs_[static_cast<size_t>(direction)];
}

int Spline::extent(int direction) const {
    if (direction < 0 || direction >= dim_param_)
        throw ValidationError("spline: direction out of range");
    return extents_[static_cast<size_t>(direction)];
}

int Spline::flat_index(int i, int j, int k) const {
    return i + extents_[0] * (j + extents_[1] * k);
}

Vec3 Spline::control_point(int flat) const {
    if (rational()) {
        const double w = coeffs_(flat, 3);
        return coeffs_.row(flat).head<3>().transpose() / w;
    }
    return coeffs_.row(flat).transpose();
}

Vec3 Spline::control_point3(int i, int j, int k) const {
    return control_point(flat_index(i, j, k));
}

double Spline::weight(int flat) const {
    return rational() ? coeffs_(flat, 3) : 1.0;
}

std::vector<Vec3> Spline::control_points() const {
    std::vector<Vec3> out(static_cast<size_t>(num_control()));
    for (int i = 0; i < num_control(); ++i) out[static_cast<size_t>(i)] = control_point(i);
    return out;
}

std::vector<double> Spline::weights() const {
    if (!rational()) return {};
    std::vector<double> out(static_cast<size_t>(num_control()));
    for (int i = 0; i < num_control(); ++i) out[static_cast<size_t>(i)] = coeffs_(i, 3);
    return out;
}

Eigen::AlignedBox3d Spline::control_bbox() const {
    Eigen::AlignedBox3d box;
    for (int i = 0; i < num_control(); ++i) box.extend(control_point(i));
    return box;
}

bool Spline::is_bezier() const {
    for (int d = 0; d < dim_param_; ++d)
        if (!kvs_[static_cast<size_t>(d)].is_bezier()) return false;
    return true;
}

bool Spline::degrees_at_most(int cap) const {
    for (int d = 0; d < dim_param_; ++d)
        if (degree(d) > cap) return false;
    return true;
}

double Spline::control_polygon_length() const {
    double total = 0.0;
    const int n0 = extents_[0], n1 = extents_[1], n2 = extents_[2];
    for (int k = 0; k < n2; ++k)
        for (int j = 0; j < n1; ++j)
            for (int i = 0; i < n0; ++i) {
                const Vec3 p = control_point(flat_index(i, j, k));
                if (i + 1 < n0)
                    total += (control_point(flat_index(i + 1, j, k)) - p).norm();
                if (dim_param_ > 1 && j + 1 < n1)
                    total += (control_point(flat_index(i, j + 1, k)) - p).norm();
                if (dim_param_ > 2 && k + 1 < n2)
                    total += (control_point(flat_index(i, j, k + 1)) - p).norm();
            }
    return total;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

double clamp_to_domain(const KnotVector& kv, double u, int direction) {
    const double lo = kv.min(), hi = kv.max();
    const double slack = settings().domain_slack * (hi - lo);
    if (u < lo - slack || u > hi + slack) {
        std::ostringstream msg;
        msg << "parameter " << u << " outside knot span [" << lo << ", " << hi
            << "] in direction " << dir_name(direction);
        throw DomainError(msg.str(), direction);
    }
    return std::clamp(u, lo, hi);
}

std::vector<double> chebyshev_span_samples(const KnotVector& kv, int per_span) {
    std::vector<double> out;
    const auto breaks = kv.breakpoints();
    out.push_back(breaks.front());
    for (size_t s = 0; s + 1 < breaks.size(); ++s) {
        const double a = breaks[s], b = breaks[s + 1];
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (int k = per_span - 1; k >= 0; --k)
            out.push_back(mid + half * std::cos(M_PI * (2.0 * k + 1.0) /
                                                (2.0 * per_span)));
        out.push_back(b);
    }
    return out;
}

} // namespace detail

namespace {

struct EvalContext {
    int spans[3];
    std::array<std::vector<double>, 3> basis;
};

EvalContext prepare_eval(const Spline& s, const ParametricPoint& at) {
    if (at.dim != s.dim_param())
        throw ValidationError("parametric point dimension does not match spline");
    EvalContext ctx;
    for (int d = 0; d < s.dim_param(); ++d) {
        const KnotVector& kv = s.kv(d);
        const double u = detail::clamp_to_domain(kv, at[d], d);
        ctx.spans[d] = kv.find_span(u);
        ctx.basis[static_cast<size_t>(d)].resize(static_cast<size_t>(kv.degree()) + 1);
        kv.basis_funs(ctx.spans[d], u, ctx.basis[static_cast<size_t>(d)]);
    }
    return ctx;
}

Eigen::Vector4d evaluate_homogeneous(const Spline& s, const EvalContext& ctx) {
    Eigen::Vector4d acc = Eigen::Vector4d::Zero();
    const int dp = s.dim_param();
    const int p0 = s.degree(0);
    const int p1 = dp > 1 ? s.degree(1) : 0;
    const int p2 = dp > 2 ? s.degree(2) : 0;
    const int base0 = ctx.spans[0] - p0;
    const int base1 = dp > 1 ? ctx.spans[1] - p1 : 0;
    const int base2 = dp > 2 ? ctx.spans[2] - p2 : 0;
    const bool rat = s.rational();
    for (int k = 0; k <= p2; ++k)
        for (int j = 0; j <= p1; ++j) {
            double wjk = 1.0;
            if (dp > 1) wjk *= ctx.basis[1][static_cast<size_t>(j)];
            if (dp > 2) wjk *= ctx.basis[2][static_cast<size_t>(k)];
            for (int i = 0; i <= p0; ++i) {
                const double w = wjk * ctx.basis[0][static_cast<size_t>(i)];
                const int flat = s.flat_index(base0 + i, base1 + j, base2 + k);
                acc.head<3>() += w * s.coefficients().row(flat).head<3>().transpose();
                acc(3) += rat ? w * s.coefficients()(flat, 3) : w;
            }
        }
    return acc;
}

} // namespace

Vec3 evaluate(const Spline& s, const ParametricPoint& at) {
    const EvalContext ctx = prepare_eval(s, at);
    const Eigen::Vector4d h = evaluate_homogeneous(s, ctx);
    if (s.rational()) return h.head<3>() / h(3);
    return h.head<3>();
}

Vec3 derivative(const Spline& s, const ParametricPoint& at, int direction,
                int order) {
    if (direction < 0 || direction >= s.dim_param())
        throw ValidationError("derivative: direction out of range");
    if (order < 0) throw ValidationError("derivative: negative order");
    if (order == 0) return evaluate(s, at);
    if (order > s.degree(direction)) return Vec3::Zero();

    if (at.dim != s.dim_param())
        throw ValidationError("parametric point dimension does not match spline");

    // Homogeneous derivatives A^(j), j = 0..order, along one direction.
    const int dp = s.dim_param();
    int spans[3] = {0, 0, 0};
    std::array<std::vector<double>, 3> basis;
    Eigen::MatrixXd ders;
    for (int d = 0; d < dp; ++d) {
        const KnotVector& kv = s.kv(d);
        const double u = detail::clamp_to_domain(kv, at[d], d);
        spans[d] = kv.find_span(u);
        if (d == direction) {
            kv.ders_basis_funs(spans[d], u, order, ders);
        } else {
            basis[static_cast<size_t>(d)].resize(static_cast<size_t>(kv.degree()) + 1);
            kv.basis_funs(spans[d], u, basis[static_cast<size_t>(d)]);
        }
    }

    std::vector<Eigen::Vector4d> A(static_cast<size_t>(order) + 1,
                                   Eigen::Vector4d::Zero());
    const int p0 = s.degree(0);
    const int p1 = dp > 1 ? s.degree(1) : 0;
    const int p2 = dp > 2 ? s.degree(2) : 0;
    const int base0 = spans[0] - p0;
    const int base1 = dp > 1 ? spans[1] - p1 : 0;
    const int base2 = dp > 2 ? spans[2] - p2 : 0;
    const bool rat = s.rational();
    for (int k = 0; k <= p2; ++k)
        for (int j = 0; j <= p1; ++j)
            for (int i = 0; i <= p0; ++i) {
                double fixed = 1.0;
                int local = 0;
                if (direction == 0) local = i; else fixed *= basis[0][static_cast<size_t>(i)];
                if (dp > 1) {
                    if (direction == 1) local = j; else fixed *= basis[1][static_cast<size_t>(j)];
                }
                if (dp > 2) {
                    if (direction == 2) local = k; else fixed *= basis[2][static_cast<size_t>(k)];
                }
                const int flat = s.flat_index(base0 + i, base1 + j, base2 + k);
                Eigen::Vector4d c;
                c.head<3>() = s.coefficients().row(flat).head<3>().transpose();
                c(3) = rat ? s.coefficients()(flat, 3) : 1.0;
                for (int o = 0; o <= order; ++o)
                    A[static_cast<size_t>(o)] += fixed * ders(o, local) * c;
            }

    if (!rat) return A[static_cast<size_t>(order)].head<3>();

    // Rational correction: S^(k) = (A^(k) - sum_i C(k,i) w^(i) S^(k-i)) / w.
    std::vector<Vec3> S(static_cast<size_t>(order) + 1);
    const double w0 = A[0](3);
    S[0] = A[0].head<3>() / w0;
    for (int k = 1; k <= order; ++k) {
        Vec3 v = A[static_cast<size_t>(k)].head<3>();
        for (int i = 1; i <= k; ++i)
            v -= binomial(k, i) * A[static_cast<size_t>(i)](3) *
                 S[static_cast<size_t>(k - i)];
        S[static_cast<size_t>(k)] = v / w0;
    }
    return S[static_cast<size_t>(order)];
}

void blending_row(const Spline& s, const ParametricPoint& at,
                  Eigen::Ref<Eigen::RowVectorXd> row) {
    row.setZero();
    const EvalContext ctx = prepare_eval(s, at);
    const int dp = s.dim_param();
    const int p0 = s.degree(0);
    const int p1 = dp > 1 ? s.degree(1) : 0;
    const int p2 = dp > 2 ? s.degree(2) : 0;
    const int base0 = ctx.spans[0] - p0;
    const int base1 = dp > 1 ? ctx.spans[1] - p1 : 0;
    const int base2 = dp > 2 ? ctx.spans[2] - p2 : 0;
    const bool rat = s.rational();
    double wsum = 0.0;
    for (int k = 0; k <= p2; ++k)
        for (int j = 0; j <= p1; ++j)
            for (int i = 0; i <= p0; ++i) {
                double b = ctx.basis[0][static_cast<size_t>(i)];
                if (dp > 1) b *= ctx.basis[1][static_cast<size_t>(j)];
                if (dp > 2) b *= ctx.basis[2][static_cast<size_t>(k)];
                const int flat = s.flat_index(base0 + i, base1 + j, base2 + k);
                if (rat) {
                    b *= s.coefficients()(flat, 3);
                    wsum += b;
                }
                row(flat) = b;
            }
    if (rat) row /= wsum;
}

// ---------------------------------------------------------------------------
// Refinement kernels (act on stacked coefficient columns)

namespace detail {

std::pair<KnotVector, Eigen::MatrixXd> insert_knot_fiber(
    const KnotVector& kv, const Eigen::MatrixXd& coeffs, double value,
    int times) {
    if (times < 1) throw RefinementError("knot insertion: times must be >= 1");
    if (!(value > kv.min() && value < kv.max()))
        throw RefinementError("knot insertion: value must lie strictly inside the span");
    const int p = kv.degree();
    const int mult = kv.multiplicity(value);
    if (mult + times > p) {
        std::ostringstream msg;
        msg << "knot insertion: multiplicity " << mult << "+" << times
            << " would exceed degree " << p;
        throw RefinementError(msg.str());
    }

    // A5.5-style refinement with `times` copies of one value.
    const std::vector<double>& U = kv.knots();
    const int n = kv.num_control() - 1;
    const int m = n + p + 1;
    const int r = times - 1;
    std::vector<double> X(static_cast<size_t>(times), value);

    const int a = kv.find_span(X.front());
    int b = kv.find_span(X.back());
    b = b + 1;

    const auto cols = coeffs.cols();
    Eigen::MatrixXd Q(n + 1 + times, cols);
    std::vector<double> Ubar(static_cast<size_t>(m + times + 1));

    for (int j = 0; j <= a - p; ++j) Q.row(j) = coeffs.row(j);
    for (int j = b - 1; j <= n; ++j) Q.row(j + r + 1) = coeffs.row(j);
    for (int j = 0; j <= a; ++j) Ubar[static_cast<size_t>(j)] = U[static_cast<size_t>(j)];
    for (int j = b + p; j <= m; ++j) Ubar[static_cast<size_t>(j + r + 1)] = U[static_cast<size_t>(j)];

    int i = b + p - 1;
    int k = b + p + r;
    for (int j = r; j >= 0; --j) {
        while (X[static_cast<size_t>(j)] <= U[static_cast<size_t>(i)] && i > a) {
            Q.row(k - p - 1) = coeffs.row(i - p - 1);
            Ubar[static_cast<size_t>(k)] = U[static_cast<size_t>(i)];
            --k;
            --i;
        }
        Q.row(k - p - 1) = Q.row(k - p);
        for (int l = 1; l <= p; ++l) {
            const int ind = k - p + l;
            double alfa = Ubar[static_cast<size_t>(k + l)] - X[static_cast<size_t>(j)];
            if (std::abs(alfa) == 0.0) {
                Q.row(ind - 1) = Q.row(ind);
            } else {
                alfa /= (Ubar[static_cast<size_t>(k + l)] - U[static_cast<size_t>(i - p + l)]);
                Q.row(ind - 1) = alfa * Q.row(ind - 1) + (1.0 - alfa) * Q.row(ind);
            }
        }
        Ubar[static_cast<size_t>(k)] = X[static_cast<size_t>(j)];
        --k;
    }

    return {KnotVector(p, std::move(Ubar)), std::move(Q)};
}

std::pair<KnotVector, Eigen::MatrixXd> elevate_fiber(const KnotVector& kv,
                                                     const Eigen::MatrixXd& coeffs,
                                                     int t) {
    if (t < 1) throw RefinementError("degree elevation: times must be >= 1");
    const int p = kv.degree();
    const std::vector<double>& U = kv.knots();
    const int n = kv.num_control() - 1;
    const int m = n + p + 1;
    const int ph = p + t;
    const int ph2 = ph / 2;
    const int num_spans = static_cast<int>(kv.span_starts().size());
    const auto cols = coeffs.cols();

    Eigen::MatrixXd bezalfs = Eigen::MatrixXd::Zero(ph + 1, p + 1);
    bezalfs(0, 0) = 1.0;
    bezalfs(ph, p) = 1.0;
    for (int i = 1; i <= ph2; ++i) {
        const double inv = 1.0 / binomial(ph, i);
        const int mpi = std::min(p, i);
        for (int j = std::max(0, i - t); j <= mpi; ++j)
            bezalfs(i, j) = inv * binomial(p, j) * binomial(t, i - j);
    }
    for (int i = ph2 + 1; i < ph; ++i) {
        const int mpi = std::min(p, i);
        for (int j = std::max(0, i - t); j <= mpi; ++j)
            bezalfs(i, j) = bezalfs(ph - i, p - j);
    }

    const int n_new = n + 1 + num_spans * t;
    Eigen::MatrixXd Q(n_new, cols);
    std::vector<double> Uh(static_cast<size_t>(n_new + ph + 1));
    Eigen::MatrixXd bpts(p + 1, cols), ebpts(ph + 1, cols),
        nextbpts(std::max(p - 1, 1), cols);
    std::vector<double> alphas(static_cast<size_t>(std::max(p - 1, 1)));

    int mh = ph;
    int kind = ph + 1;
    int r = -1;
    int a = p;
    int b = p + 1;
    int cind = 1;
    double ua = U[0];
    Q.row(0) = coeffs.row(0);
    for (int i = 0; i <= ph; ++i) Uh[static_cast<size_t>(i)] = ua;
    for (int i = 0; i <= p; ++i) bpts.row(i) = coeffs.row(i);

    while (b < m) {
        const int i0 = b;
        while (b < m && U[static_cast<size_t>(b)] == U[static_cast<size_t>(b + 1)]) ++b;
        const int mul = b - i0 + 1;
        mh += mul + t;
        const double ub = U[static_cast<size_t>(b)];
        const int oldr = r;
        r = p - mul;
        const int lbz = (oldr > 0) ? (oldr + 2) / 2 : 1;
        const int rbz = (r > 0) ? ph - (r + 1) / 2 : ph;

        if (r > 0) {
            const double numer = ub - ua;
            for (int k = p; k > mul; --k)
                alphas[static_cast<size_t>(k - mul - 1)] =
                    numer / (U[static_cast<size_t>(a + k)] - ua);
            for (int j = 1; j <= r; ++j) {
                const int save = r - j;
                const int sidx = mul + j;
                for (int k = p; k >= sidx; --k)
                    bpts.row(k) = alphas[static_cast<size_t>(k - sidx)] * bpts.row(k) +
                                  (1.0 - alphas[static_cast<size_t>(k - sidx)]) *
                                      bpts.row(k - 1);
                nextbpts.row(save) = bpts.row(p);
            }
        }

        for (int i = lbz; i <= ph; ++i) {
            ebpts.row(i).setZero();
            const int mpi = std::min(p, i);
            for (int j = std::max(0, i - t); j <= mpi; ++j)
                ebpts.row(i) += bezalfs(i, j) * bpts.row(j);
        }

        if (oldr > 1) {
            int first = kind - 2;
            int last = kind;
            const double den = ub - ua;
            const double bet = (ub - Uh[static_cast<size_t>(kind - 1)]) / den;
            for (int tr = 1; tr < oldr; ++tr) {
                int i = first;
                int j = last;
                int kj = j - kind + 1;
                while (j - i > tr) {
                    if (i < cind) {
                        const double alf = (ub - Uh[static_cast<size_t>(i)]) /
                                           (ua - Uh[static_cast<size_t>(i)]);
                        Q.row(i) = alf * Q.row(i) + (1.0 - alf) * Q.row(i - 1);
                    }
                    if (j >= lbz) {
                        if (j - tr <= kind - ph + oldr) {
                            const double gam =
                                (ub - Uh[static_cast<size_t>(j - tr)]) / den;
                            ebpts.row(kj) =
                                gam * ebpts.row(kj) + (1.0 - gam) * ebpts.row(kj + 1);
                        } else {
                            ebpts.row(kj) =
                                bet * ebpts.row(kj) + (1.0 - bet) * ebpts.row(kj + 1);
                        }
                    }
                    ++i;
                    --j;
                    --kj;
                }
                --first;
                ++last;
            }
        }

        if (a != p) {
            for (int i = 0; i < ph - oldr; ++i) {
                Uh[static_cast<size_t>(kind)] = ua;
                ++kind;
            }
        }
        for (int j = lbz; j <= rbz; ++j) {
            Q.row(cind) = ebpts.row(j);
            ++cind;
        }

        if (b < m) {
            for (int j = 0; j < r; ++j) bpts.row(j) = nextbpts.row(j);
            for (int j = r; j <= p; ++j) bpts.row(j) = coeffs.row(b - p + j);
            a = b;
            ++b;
            ua = ub;
        } else {
            for (int i = 0; i <= ph; ++i) Uh[static_cast<size_t>(kind + i)] = ub;
        }
    }

    return {KnotVector(ph, std::move(Uh)), std::move(Q)};
}

std::pair<KnotVector, Eigen::MatrixXd> insertion_operator(const KnotVector& kv,
                                                          double value,
                                                          int times) {
    const int n = kv.num_control();
    return insert_knot_fiber(kv, Eigen::MatrixXd::Identity(n, n), value, times);
}

std::pair<KnotVector, Eigen::MatrixXd> elevation_operator(const KnotVector& kv,
                                                          int times) {
    const int n = kv.num_control();
    return elevate_fiber(kv, Eigen::MatrixXd::Identity(n, n), times);
}

KnotVector reduced_knot_vector(const KnotVector& kv) {
    const int p = kv.degree();
    if (p < 2)
        throw RefinementError("degree reduction: cannot reduce below linear");
    std::vector<double> knots;
    const auto breaks = kv.breakpoints();
    for (size_t bi = 0; bi < breaks.size(); ++bi) {
        const double b = breaks[bi];
        int mult = kv.multiplicity(b);
        if (bi == 0 || bi + 1 == breaks.size())
            mult = p; // ends: (p-1)+1
        else
            mult = mult - 1; // keep the continuity class
        for (int i = 0; i < mult; ++i) knots.push_back(b);
    }
    return KnotVector(p - 1, std::move(knots));
}

} // namespace detail

// ---------------------------------------------------------------------------
// Net-level operations

Spline apply_direction_operator(const Spline& s, int direction,
                                const KnotVector& new_kv,
                                const Eigen::MatrixXd& op) {
    const int nd = s.extent(direction);
    if (op.cols() != nd)
        throw ValidationError("direction operator: size mismatch");
    const int n_new = static_cast<int>(op.rows());

    Spline out;
    out.dim_param_ = s.dim_param_;
    out.kvs_ = s.kvs_;
    out.kvs_[static_cast<size_t>(direction)] = new_kv;
    out.extents_ = s.extents_;
    out.extents_[static_cast<size_t>(direction)] = n_new;

    // stride-based gather/scatter of fibers along `direction`
    const int n0 = s.extents_[0], n1 = s.extents_[1], n2 = s.extents_[2];
    int stride = 1, outer0 = 1, outer1 = 1;
    if (direction == 0) {
        stride = 1;
        outer0 = n1;
        outer1 = n2;
    } else if (direction == 1) {
        stride = n0;
        outer0 = n0;
        outer1 = n2;
    } else {
        stride = n0 * n1;
        outer0 = n0;
        outer1 = n1;
    }

    const auto cols = s.coeffs_.cols();
    out.coeffs_.resize(static_cast<Eigen::Index>(n_new) * outer0 * outer1, cols);

    Eigen::MatrixXd fiber(nd, cols);
    for (int b1 = 0; b1 < outer1; ++b1)
        for (int b0 = 0; b0 < outer0; ++b0) {
            int base_in = 0, base_out = 0;
            if (direction == 0) {
                base_in = n0 * (b0 + n1 * b1);
                base_out = n_new * (b0 + n1 * b1);
            } else if (direction == 1) {
                base_in = b0 + n0 * n1 * b1;
                base_out = b0 + n0 * n_new * b1;
            } else {
                base_in = b0 + n0 * b1;
                base_out = base_in;
            }
            const int out_stride = (direction == 0) ? 1 : (direction == 1 ? n0 : n0 * n1);
            for (int i = 0; i < nd; ++i) fiber.row(i) = s.coeffs_.row(base_in + i * stride);
            Eigen::MatrixXd result = op * fiber;
            for (int i = 0; i < n_new; ++i)
                out.coeffs_.row(base_out + i * out_stride) = result.row(i);
        }

    out.validate();
    return out;
}

Spline insert_knot(const Spline& s, int direction, double value, int times) {
    auto [kv_op, op] = detail::insertion_operator(s.kv(direction), value, times);
    return apply_direction_operator(s, direction, kv_op, op);
}

Spline elevate_degree(const Spline& s, int direction, int times) {
    auto [kv_op, op] = detail::elevation_operator(s.kv(direction), times);
    return apply_direction_operator(s, direction, kv_op, op);
}

namespace {

// Max |a - b| over a dense tensor sample grid; `dense_dir` gets extra points.
double max_deviation(const Spline& a, const Spline& b, int dense_dir) {
    std::array<std::vector<double>, 3> params;
    for (int d = 0; d < a.dim_param(); ++d) {
        const int per_span = (d == dense_dir) ? a.kv(d).degree() + 3
                                              : std::max(a.kv(d).degree() + 2, 4);
        params[static_cast<size_t>(d)] =
            detail::chebyshev_span_samples(a.kv(d), per_span);
    }
    double worst = 0.0;
    const auto& pu = params[0];
    const auto& pv = params[1];
    const auto& pw = params[2];
    const size_t nu = pu.size();
    const size_t nv = a.dim_param() > 1 ? pv.size() : 1;
    const size_t nw = a.dim_param() > 2 ? pw.size() : 1;
    for (size_t k = 0; k < nw; ++k)
        for (size_t j = 0; j < nv; ++j)
            for (size_t i = 0; i < nu; ++i) {
                ParametricPoint at;
                if (a.dim_param() == 1)
                    at = ParametricPoint(pu[i]);
                else if (a.dim_param() == 2)
                    at = ParametricPoint(pu[i], pv[j]);
                else
                    at = ParametricPoint(pu[i], pv[j], pw[k]);
                worst = std::max(worst, (evaluate(a, at) - evaluate(b, at)).norm());
            }
    return worst;
}

} // namespace

std::pair<Spline, double> reduce_degree(const Spline& s, int direction) {
    const KnotVector& kv = s.kv(direction);
    const KnotVector kv_red = detail::reduced_knot_vector(kv);
    auto [kv_check, E] = detail::elevation_operator(kv_red, 1);
    if (kv_check.knots() != kv.knots())
        throw RefinementError("degree reduction: knot vector mismatch after elevation");

    // Least squares against the exact elevation operator, with both end
    // control points pinned so clamped endpoints stay interpolated.
    const int n_old = static_cast<int>(E.rows());
    const int n_red = static_cast<int>(E.cols());
    Eigen::MatrixXd op;
    if (n_red <= 2) {
        op = Eigen::MatrixXd::Zero(n_red, n_old);
        op(0, 0) = 1.0;
        op(n_red - 1, n_old - 1) = 1.0;
    } else {
        const Eigen::MatrixXd E_int = E.middleCols(1, n_red - 2);
        // rhs = I - E_bnd * [e_first; e_last]
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Identity(n_old, n_old);
        rhs.col(0) -= E.col(0);
        rhs.col(n_old - 1) -= E.col(n_red - 1);
        Eigen::MatrixXd interior =
            E_int.colPivHouseholderQr().solve(rhs); // (n_red-2) x n_old
        op = Eigen::MatrixXd::Zero(n_red, n_old);
        op(0, 0) = 1.0;
        op(n_red - 1, n_old - 1) = 1.0;
        op.middleRows(1, n_red - 2) = interior;
    }

    Spline reduced = apply_direction_operator(s, direction, kv_red, op);

    if (s.rational()) {
        const auto& w = reduced.coefficients().col(3);
        const double wmax = w.maxCoeff();
        if (!(w.minCoeff() > 1e-12 * wmax)) {
            // Reduction destroyed weight positivity; report failure via an
            // infinite error so callers refine and retry.
            return {s, std::numeric_limits<double>::infinity()};
        }
    }

    const double err = max_deviation(s, reduced, direction);
    return {std::move(reduced), err};
}

} // namespace recad
