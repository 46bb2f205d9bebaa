#include "recad/knot_vector.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "recad/errors.hpp"
#include "recad/types.hpp"

namespace recad {

Settings& settings() {
    static Settings s;
    return s;
}

KnotVector::KnotVector(int degree, std::vector<double> knots)
    : degree_(degree), knots_(std::move(knots)) {
    if (degree_ < 0) throw ValidationError("knot vector: negative degree");
    if (static_cast<int>(knots_.size()) < 2 * (degree_ + 1))
        throw ValidationError("knot vector: too few knots for degree");
    for (size_t i = 1; i < knots_.size(); ++i) {
        if (knots_[i] < knots_[i - 1])
            throw ValidationError("knot vector: knots must be non-decreasing");
    }
    if (!(knots_.back() > knots_.front()))
        throw ValidationError("knot vector: degenerate span");
    // clamped convention: end multiplicities exactly degree+1
    const double lo = knots_.front(), hi = knots_.back();
    if (multiplicity(lo) != degree_ + 1 || multiplicity(hi) != degree_ + 1)
        throw ValidationError(
            "knot vector: not clamped (end multiplicity must equal degree+1)");
    for (double b : breakpoints()) {
        if (multiplicity(b) > degree_ + 1)
            throw ValidationError("knot vector: multiplicity exceeds degree+1");
    }
}

KnotVector KnotVector::uniform(int degree, int num_control, double lo,
                               double hi) {
    if (num_control < degree + 1)
        throw ValidationError("knot vector: need at least degree+1 control points");
    std::vector<double> knots;
    knots.reserve(static_cast<size_t>(num_control + degree + 1));
    for (int i = 0; i <= degree; ++i) knots.push_back(lo);
    const int interior = num_control - degree - 1;
    for (int i = 1; i <= interior; ++i)
        knots.push_back(lo + (hi - lo) * i / (interior + 1));
    for (int i = 0; i <= degree; ++i) knots.push_back(hi);
    return KnotVector(degree, std::move(knots));
}

KnotVector KnotVector::bezier(int degree, double lo, double hi) {
    return uniform(degree, degree + 1, lo, hi);
}

int KnotVector::find_span(double u) const {
    const int n = num_control() - 1;
    if (u >= knots_[static_cast<size_t>(n + 1)]) return n;
    if (u <= knots_[static_cast<size_t>(degree_)]) return degree_;
    int low = degree_, high = n + 1;
    int mid = (low + high) / 2;
    while (u < knots_[static_cast<size_t>(mid)] ||
           u >= knots_[static_cast<size_t>(mid + 1)]) {
        if (u < knots_[static_cast<size_t>(mid)])
            high = mid;
        else
            low = mid;
        mid = (low + high) / 2;
    }
    return mid;
}

int KnotVector::multiplicity(double u) const {
    return static_cast<int>(std::count(knots_.begin(), knots_.end(), u));
}

std::vector<double> KnotVector::breakpoints() const {
    std::vector<double> out;
    for (double k : knots_)
        if (out.empty() || k > out.back()) out.push_back(k);
    return out;
}

std::vector<int> KnotVector::span_starts() const {
    std::vector<int> out;
    for (int i = degree_; i < num_control(); ++i)
        if (knots_[static_cast<size_t>(i + 1)] > knots_[static_cast<size_t>(i)])
            out.push_back(i);
    return out;
}

void KnotVector::basis_funs(int span, double u, std::span<double> N) const {
    const int p = degree_;
    N[0] = 1.0;
    std::vector<double> left(static_cast<size_t>(p) + 1),
        right(static_cast<size_t>(p) + 1);
    for (int j = 1; j <= p; ++j) {
        left[static_cast<size_t>(j)] = u - knots_[static_cast<size_t>(span + 1 - j)];
        right[static_cast<size_t>(j)] = knots_[static_cast<size_t>(span + j)] - u;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double temp =
                N[static_cast<size_t>(r)] /
                (right[static_cast<size_t>(r) + 1] + left[static_cast<size_t>(j - r)]);
            N[static_cast<size_t>(r)] =
                saved + right[static_cast<size_t>(r) + 1] * temp;
            saved = left[static_cast<size_t>(j - r)] * temp;
        }
        N[static_cast<size_t>(j)] = saved;
    }
}

void KnotVector::ders_basis_funs(int span, double u, int order,
                                 Eigen::MatrixXd& ders) const {
    const int p = degree_;
    const int n = std::min(order, p);
    ders.setZero(order + 1, p + 1);

    Eigen::MatrixXd ndu(p + 1, p + 1);
    std::vector<double> left(static_cast<size_t>(p) + 1),
        right(static_cast<size_t>(p) + 1);
    ndu(0, 0) = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[static_cast<size_t>(j)] = u - knots_[static_cast<size_t>(span + 1 - j)];
        right[static_cast<size_t>(j)] = knots_[static_cast<size_t>(span + j)] - u;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu(j, r) = right[static_cast<size_t>(r) + 1] +
                        left[static_cast<size_t>(j - r)];
            const double temp = ndu(r, j - 1) / ndu(j, r);
            ndu(r, j) = saved + right[static_cast<size_t>(r) + 1] * temp;
            saved = left[static_cast<size_t>(j - r)] * temp;
        }
        ndu(j, j) = saved;
    }
    for (int j = 0; j <= p; ++j) ders(0, j) = ndu(j, p);

    Eigen::MatrixXd a(2, p + 1);
    for (int r = 0; r <= p; ++r) {
        int s1 = 0, s2 = 1;
        a(0, 0) = 1.0;
        for (int k = 1; k <= n; ++k) {
            double d = 0.0;
            const int rk = r - k, pk = p - k;
            if (r >= k) {
                a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
                d = a(s2, 0) * ndu(rk, pk);
            }
            const int j1 = (rk >= -1) ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
                d += a(s2, j) * ndu(rk + j, pk);
            }
            if (r <= pk) {
                a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
                d += a(s2, k) * ndu(r, pk);
            }
            ders(k, r) = d;
            std::swap(s1, s2);
        }
    }
    int r = p;
    for (int k = 1; k <= n; ++k) {
        for (int j = 0; j <= p; ++j) ders(k, j) *= r;
        r *= (p - k);
    }
}

std::vector<double> KnotVector::greville() const {
    if (degree_ == 0)
        throw ValidationError("greville abscissae undefined for degree 0");
    std::vector<double> out(static_cast<size_t>(num_control()));
    for (int a = 0; a < num_control(); ++a) {
        double sum = 0.0;
        for (int i = 1; i <= degree_; ++i)
            sum += knots_[static_cast<size_t>(a + i)];
        out[static_cast<size_t>(a)] = sum / degree_;
    }
    return out;
}

void KnotVector::collocation_row(double u,
                                 Eigen::Ref<Eigen::RowVectorXd> row) const {
    row.setZero();
    const int span = find_span(u);
    std::vector<double> N(static_cast<size_t>(degree_) + 1);
    basis_funs(span, u, N);
    for (int j = 0; j <= degree_; ++j) row(span - degree_ + j) = N[static_cast<size_t>(j)];
}

std::vector<double> greville_abscissae(const KnotVector& kv) {
    return kv.greville();
}

} // namespace recad
