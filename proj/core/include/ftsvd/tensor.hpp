#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace ftsvd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Sorted measurement times in [0, 1].
///
/// Construction sorts the points (stable) and keeps the permutation, so
/// `permutation()[k]` is the original position of the k-th sorted point.
/// Use `Tensor3::permute_time` with the same permutation to keep tensor
/// slices aligned with the sorted grid.
class TimeGrid {
public:
    TimeGrid() = default;
    explicit TimeGrid(std::vector<double> points);

    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }
    double operator[](std::size_t k) const { return points_[k]; }
    std::span<const double> points() const noexcept { return points_; }
    const std::vector<std::size_t>& permutation() const noexcept { return perm_; }
    bool was_sorted() const noexcept;

    Vector as_vector() const { return Eigen::Map<const Vector>(points_.data(), Eigen::Index(points_.size())); }

    friend bool operator==(const TimeGrid& l, const TimeGrid& r) { return l.points_ == r.points_; }

private:
    std::vector<double> points_;
    std::vector<std::size_t> perm_;
};

/// Dense p1 x p2 x n array. Storage is contiguous with the time index k
/// slowest, then i, then j: offset(i, j, k) = j + p2 * (i + p1 * k).
/// Each time slice is therefore a row-major p1 x p2 block and row k of the
/// mode-3 matricization.
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(std::size_t p1, std::size_t p2, std::size_t n);
    Tensor3(std::size_t p1, std::size_t p2, std::size_t n, std::vector<double> data);

    std::size_t p1() const noexcept { return p1_; }
    std::size_t p2() const noexcept { return p2_; }
    std::size_t n() const noexcept { return n_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t i, std::size_t j, std::size_t k) { return data_[offset(i, j, k)]; }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const { return data_[offset(i, j, k)]; }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    /// Time slice k as a p1 x p2 matrix view.
    Eigen::Map<const RowMatrix> slice(std::size_t k) const {
        return {data_.data() + k * p1_ * p2_, Eigen::Index(p1_), Eigen::Index(p2_)};
    }
    Eigen::Map<RowMatrix> slice(std::size_t k) {
        return {data_.data() + k * p1_ * p2_, Eigen::Index(p1_), Eigen::Index(p2_)};
    }

    /// Throws ArgumentError if any entry is NaN or infinite.
    void check_finite() const;

    /// New tensor whose slice k is this tensor's slice perm[k].
    Tensor3 permute_time(const std::vector<std::size_t>& perm) const;

    Tensor3& operator*=(double c);
    Tensor3& operator+=(const Tensor3& other);
    Tensor3& operator-=(const Tensor3& other);

    friend bool operator==(const Tensor3& l, const Tensor3& r) {
        return l.p1_ == r.p1_ && l.p2_ == r.p2_ && l.n_ == r.n_ && l.data_ == r.data_;
    }

private:
    std::size_t offset(std::size_t i, std::size_t j, std::size_t k) const noexcept {
        return j + p2_ * (i + p1_ * k);
    }

    std::size_t p1_ = 0;
    std::size_t p2_ = 0;
    std::size_t n_ = 0;
    std::vector<double> data_;
};

/// Mode-m unfolding (m in {1, 2, 3}), 0-based column maps:
///   mode 1: p1 x (p2 n), column j + p2 k
///   mode 2: p2 x (p1 n), column i + p1 k
///   mode 3: n x (p1 p2), column j + p2 i
Matrix matricize(const Tensor3& t, int mode);

/// Inverse of `matricize` for the given dims.
Tensor3 dematricize(const Matrix& m, int mode, std::size_t p1, std::size_t p2, std::size_t n);

/// Result of a general contraction: matrix (one mode contracted, remaining
/// modes in order), vector (two modes), or scalar (all three).
using Contraction = std::variant<Matrix, Vector, double>;

/// Contract every supplied mode. At least one vector must be given.
Contraction contract(const Tensor3& t, const std::optional<Vector>& a, const std::optional<Vector>& b,
                     const std::optional<Vector>& v);

// Fixed-pattern contractions used on the hot path.
Vector contract_ab(const Tensor3& t, const Vector& a, const Vector& b);   // t x1 a x2 b, length n
Vector contract_av(const Tensor3& t, const Vector& a, const Vector& v);   // t x1 a x3 v, length p2
Vector contract_bv(const Tensor3& t, const Vector& b, const Vector& v);   // t x2 b x3 v, length p1
double contract_abv(const Tensor3& t, const Vector& a, const Vector& b, const Vector& v);

/// lambda * a (x) b (x) v.
Tensor3 rank1(double lambda, const Vector& a, const Vector& b, const Vector& v);

/// t - lambda * a (x) b (x) v.
Tensor3 subtract_rank1(const Tensor3& t, double lambda, const Vector& a, const Vector& b, const Vector& v);
void subtract_rank1_inplace(Tensor3& t, double lambda, const Vector& a, const Vector& b, const Vector& v);

/// lambda such that t - lambda a(x)b(x)v is orthogonal to a(x)b(x)v.
double projection_coefficient(const Tensor3& t, const Vector& a, const Vector& b, const Vector& v);

double frob_norm(const Tensor3& t);

/// One discretized rank-1 term lambda * a (x) b (x) v.
struct Rank1Term {
    double lambda = 0.0;
    Vector a;
    Vector b;
    Vector v;
};

/// Residual sum of squares of t against the sum of the given terms.
double rss(const Tensor3& t, std::span<const Rank1Term> terms);

}  // namespace ftsvd
