#include "ftsvd/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ftsvd/error.hpp"

namespace ftsvd {

namespace {

void require_length(const Vector& x, std::size_t expected, const char* name) {
    if (std::size_t(x.size()) != expected) {
        throw ArgumentError(std::string(name) + ": expected length " + std::to_string(expected) + ", got " +
                            std::to_string(x.size()));
    }
}

}  // namespace

TimeGrid::TimeGrid(std::vector<double> points) {
    for (double s : points) {
        if (!(s >= 0.0 && s <= 1.0)) throw ArgumentError("time point outside [0, 1]: " + std::to_string(s));
    }
    perm_.resize(points.size());
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    std::stable_sort(perm_.begin(), perm_.end(), [&](std::size_t l, std::size_t r) { return points[l] < points[r]; });
    points_.reserve(points.size());
    for (std::size_t k : perm_) points_.push_back(points[k]);
}

bool TimeGrid::was_sorted() const noexcept {
    for (std::size_t k = 0; k < perm_.size(); ++k) {
        if (perm_[k] != k) return false;
    }
    return true;
}

Tensor3::Tensor3(std::size_t p1, std::size_t p2, std::size_t n) : Tensor3(p1, p2, n, std::vector<double>(p1 * p2 * n)) {}

Tensor3::Tensor3(std::size_t p1, std::size_t p2, std::size_t n, std::vector<double> data)
    : p1_(p1), p2_(p2), n_(n), data_(std::move(data)) {
    if (p1 == 0 || p2 == 0 || n == 0) throw ArgumentError("tensor dimensions must be >= 1");
    if (data_.size() != p1 * p2 * n) throw ArgumentError("tensor data length does not match p1*p2*n");
}

void Tensor3::check_finite() const {
    for (std::size_t idx = 0; idx < data_.size(); ++idx) {
        if (!std::isfinite(data_[idx])) throw ArgumentError("tensor contains a non-finite value at offset " + std::to_string(idx));
    }
}

Tensor3 Tensor3::permute_time(const std::vector<std::size_t>& perm) const {
    if (perm.size() != n_) throw ArgumentError("permutation length does not match n");
    Tensor3 out(p1_, p2_, n_);
    const std::size_t slab = p1_ * p2_;
    for (std::size_t k = 0; k < n_; ++k) {
        if (perm[k] >= n_) throw ArgumentError("permutation index out of range");
        std::copy_n(data_.begin() + std::ptrdiff_t(perm[k] * slab), slab, out.data_.begin() + std::ptrdiff_t(k * slab));
    }
    return out;
}

Tensor3& Tensor3::operator*=(double c) {
    for (double& x : data_) x *= c;
    return *this;
}

Tensor3& Tensor3::operator+=(const Tensor3& other) {
    if (p1_ != other.p1_ || p2_ != other.p2_ || n_ != other.n_) throw ArgumentError("tensor dimension mismatch");
    for (std::size_t idx = 0; idx < data_.size(); ++idx) data_[idx] += other.data_[idx];
    return *this;
}

Tensor3& Tensor3::operator-=(const Tensor3& other) {
    if (p1_ != other.p1_ || p2_ != other.p2_ || n_ != other.n_) throw ArgumentError("tensor dimension mismatch");
    for (std::size_t idx = 0; idx < data_.size(); ++idx) data_[idx] -= other.data_[idx];
    return *this;
}

Matrix matricize(const Tensor3& t, int mode) {
    const std::size_t p1 = t.p1(), p2 = t.p2(), n = t.n();
    switch (mode) {
        case 1: {
            Matrix m(p1, p2 * n);
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t i = 0; i < p1; ++i)
                    for (std::size_t j = 0; j < p2; ++j) m(Eigen::Index(i), Eigen::Index(j + p2 * k)) = t(i, j, k);
            return m;
        }
        case 2: {
            Matrix m(p2, p1 * n);
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t i = 0; i < p1; ++i)
                    for (std::size_t j = 0; j < p2; ++j) m(Eigen::Index(j), Eigen::Index(i + p1 * k)) = t(i, j, k);
            return m;
        }
        case 3: {
            // Each time slab is already row k in (i major, j minor) order.
            Matrix m(n, p1 * p2);
            for (std::size_t k = 0; k < n; ++k)
                m.row(Eigen::Index(k)) = Eigen::Map<const Eigen::RowVectorXd>(t.data().data() + k * p1 * p2, Eigen::Index(p1 * p2));
            return m;
        }
        default:
            throw ArgumentError("matricize: mode must be 1, 2 or 3");
    }
}

Tensor3 dematricize(const Matrix& m, int mode, std::size_t p1, std::size_t p2, std::size_t n) {
    Tensor3 t(p1, p2, n);
    auto check = [&](std::size_t rows, std::size_t cols) {
        if (std::size_t(m.rows()) != rows || std::size_t(m.cols()) != cols) throw ArgumentError("dematricize: shape mismatch");
    };
    switch (mode) {
        case 1:
            check(p1, p2 * n);
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t i = 0; i < p1; ++i)
                    for (std::size_t j = 0; j < p2; ++j) t(i, j, k) = m(Eigen::Index(i), Eigen::Index(j + p2 * k));
            return t;
        case 2:
            check(p2, p1 * n);
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t i = 0; i < p1; ++i)
                    for (std::size_t j = 0; j < p2; ++j) t(i, j, k) = m(Eigen::Index(j), Eigen::Index(i + p1 * k));
            return t;
        case 3:
            check(n, p1 * p2);
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t i = 0; i < p1; ++i)
                    for (std::size_t j = 0; j < p2; ++j) t(i, j, k) = m(Eigen::Index(k), Eigen::Index(j + p2 * i));
            return t;
        default:
            throw ArgumentError("dematricize: mode must be 1, 2 or 3");
    }
}

Vector contract_ab(const Tensor3& t, const Vector& a, const Vector& b) {
    require_length(a, t.p1(), "contract a");
    require_length(b, t.p2(), "contract b");
    Vector out(Eigen::Index(t.n()));
    for (std::size_t k = 0; k < t.n(); ++k) out(Eigen::Index(k)) = a.dot(t.slice(k) * b);
    return out;
}

Vector contract_av(const Tensor3& t, const Vector& a, const Vector& v) {
    require_length(a, t.p1(), "contract a");
    require_length(v, t.n(), "contract v");
    Vector out = Vector::Zero(Eigen::Index(t.p2()));
    for (std::size_t k = 0; k < t.n(); ++k) out.noalias() += v(Eigen::Index(k)) * (t.slice(k).transpose() * a);
    return out;
}

Vector contract_bv(const Tensor3& t, const Vector& b, const Vector& v) {
    require_length(b, t.p2(), "contract b");
    require_length(v, t.n(), "contract v");
    Vector out = Vector::Zero(Eigen::Index(t.p1()));
    for (std::size_t k = 0; k < t.n(); ++k) out.noalias() += v(Eigen::Index(k)) * (t.slice(k) * b);
    return out;
}

double contract_abv(const Tensor3& t, const Vector& a, const Vector& b, const Vector& v) {
    require_length(v, t.n(), "contract v");
    return contract_ab(t, a, b).dot(v);
}

Contraction contract(const Tensor3& t, const std::optional<Vector>& a, const std::optional<Vector>& b,
                     const std::optional<Vector>& v) {
    if (a) require_length(*a, t.p1(), "contract a");
    if (b) require_length(*b, t.p2(), "contract b");
    if (v) require_length(*v, t.n(), "contract v");

    if (a && b && v) return contract_abv(t, *a, *b, *v);
    if (a && b) return contract_ab(t, *a, *b);
    if (a && v) return contract_av(t, *a, *v);
    if (b && v) return contract_bv(t, *b, *v);

    if (a) {
        Matrix m(Eigen::Index(t.p2()), Eigen::Index(t.n()));
        for (std::size_t k = 0; k < t.n(); ++k) m.col(Eigen::Index(k)) = t.slice(k).transpose() * *a;
        return m;
    }
    if (b) {
        Matrix m(Eigen::Index(t.p1()), Eigen::Index(t.n()));
        for (std::size_t k = 0; k < t.n(); ++k) m.col(Eigen::Index(k)) = t.slice(k) * *b;
        return m;
    }
    if (v) {
        Matrix m = Matrix::Zero(Eigen::Index(t.p1()), Eigen::Index(t.p2()));
        for (std::size_t k = 0; k < t.n(); ++k) m += (*v)(Eigen::Index(k)) * t.slice(k);
        return m;
    }
    throw ArgumentError("contract: at least one mode vector is required");
}

Tensor3 rank1(double lambda, const Vector& a, const Vector& b, const Vector& v) {
    if (a.size() == 0 || b.size() == 0 || v.size() == 0) throw ArgumentError("rank1: empty factor");
    Tensor3 t(std::size_t(a.size()), std::size_t(b.size()), std::size_t(v.size()));
    const RowMatrix ab = lambda * a * b.transpose();
    for (std::size_t k = 0; k < t.n(); ++k) t.slice(k) = v(Eigen::Index(k)) * ab;
    return t;
}

void subtract_rank1_inplace(Tensor3& t, double lambda, const Vector& a, const Vector& b, const Vector& v) {
    require_length(a, t.p1(), "subtract_rank1 a");
    require_length(b, t.p2(), "subtract_rank1 b");
    require_length(v, t.n(), "subtract_rank1 v");
    const RowMatrix ab = lambda * a * b.transpose();
    for (std::size_t k = 0; k < t.n(); ++k) t.slice(k) -= v(Eigen::Index(k)) * ab;
}

Tensor3 subtract_rank1(const Tensor3& t, double lambda, const Vector& a, const Vector& b, const Vector& v) {
    Tensor3 out = t;
    subtract_rank1_inplace(out, lambda, a, b, v);
    return out;
}

double projection_coefficient(const Tensor3& t, const Vector& a, const Vector& b, const Vector& v) {
    const double denom = a.squaredNorm() * b.squaredNorm() * v.squaredNorm();
    if (denom == 0.0) throw DegenerateError("projection onto a zero rank-1 direction");
    return contract_abv(t, a, b, v) / denom;
}

double frob_norm(const Tensor3& t) {
    double acc = 0.0;
    for (double x : t.data()) acc += x * x;
    return std::sqrt(acc);
}

double rss(const Tensor3& t, std::span<const Rank1Term> terms) {
    Tensor3 residual = t;
    for (const auto& term : terms) {
        if (std::size_t(term.v.size()) != t.n()) throw ArgumentError("rss: component grid length does not match tensor");
        subtract_rank1_inplace(residual, term.lambda, term.a, term.b, term.v);
    }
    const double norm = frob_norm(residual);
    return norm * norm;
}

}  // namespace ftsvd
