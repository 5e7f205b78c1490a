#include "ftsvd/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "ftsvd/error.hpp"

namespace ftsvd {

namespace {

double k1(double x) { return x - 0.5; }
double k2(double x) {
    const double u = k1(x);
    return (u * u - 1.0 / 12.0) / 2.0;
}
double k4(double x) {
    const double u2 = k1(x) * k1(x);
    return (u2 * u2 - u2 / 2.0 + 7.0 / 240.0) / 24.0;
}

double kernel_unchecked(double x, double y) { return 1.0 + k1(x) * k1(y) + k2(x) * k2(y) - k4(std::abs(x - y)); }

}  // namespace

KernelSpec KernelSpec::from_eigenvalues(std::vector<double> mu) {
    if (mu.empty()) throw ArgumentError("eigenvalue list is empty");
    for (std::size_t k = 0; k < mu.size(); ++k) {
        if (!std::isfinite(mu[k]) || mu[k] < 0.0) throw ArgumentError("eigenvalues must be finite and non-negative");
        if (k > 0 && mu[k] > mu[k - 1]) throw ArgumentError("eigenvalues must be non-increasing");
    }
    if (mu.front() > 1.0) throw ArgumentError("leading eigenvalue must be <= 1");
    return {KernelKind::eigen_list, std::move(mu)};
}

std::vector<double> KernelSpec::spectrum() const {
    if (!eigenvalues.empty()) return eigenvalues;
    if (kind == KernelKind::eigen_list) throw ArgumentError("eigen_list kernel without eigenvalues");
    static const std::vector<double> empirical = empirical_eigenvalues();
    return empirical;
}

const char* to_string(KernelKind kind) {
    return kind == KernelKind::bernoulli_w22 ? "bernoulli_w22" : "eigen_list";
}

KernelKind kernel_kind_from_string(const std::string& s) {
    if (s == "bernoulli_w22") return KernelKind::bernoulli_w22;
    if (s == "eigen_list") return KernelKind::eigen_list;
    throw ArgumentError("unknown kernel kind: " + s);
}

double kernel_eval(double x, double y) {
    if (!(x >= 0.0 && x <= 1.0) || !(y >= 0.0 && y <= 1.0)) throw ArgumentError("kernel arguments must lie in [0, 1]");
    return kernel_unchecked(x, y);
}

Matrix gram(const TimeGrid& grid) {
    const auto n = Eigen::Index(grid.size());
    Matrix g(n, n);
    for (Eigen::Index u = 0; u < n; ++u) {
        g(u, u) = kernel_unchecked(grid[std::size_t(u)], grid[std::size_t(u)]);
        for (Eigen::Index v = 0; v < u; ++v) {
            g(u, v) = g(v, u) = kernel_unchecked(grid[std::size_t(u)], grid[std::size_t(v)]);
        }
    }
    return g;
}

Matrix cross_gram(std::span<const double> points, const TimeGrid& grid) {
    Matrix m(Eigen::Index(points.size()), Eigen::Index(grid.size()));
    for (std::size_t u = 0; u < points.size(); ++u) {
        const double x = points[u];
        if (!(x >= 0.0 && x <= 1.0)) throw ArgumentError("evaluation point outside [0, 1]");
        for (std::size_t v = 0; v < grid.size(); ++v) m(Eigen::Index(u), Eigen::Index(v)) = kernel_unchecked(x, grid[v]);
    }
    return m;
}

std::vector<double> empirical_eigenvalues(std::size_t m) {
    if (m < 2) throw ArgumentError("empirical_eigenvalues: m must be >= 2");
    std::vector<double> pts(m);
    for (std::size_t u = 0; u < m; ++u) pts[u] = (double(u) + 0.5) / double(m);
    const Matrix g = gram(TimeGrid(pts)) / double(m);
    Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("eigen-solver failed on the kernel Gram matrix");
    std::vector<double> mu(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(mu.begin(), mu.end(), std::greater<>());
    const double cutoff = 1e-14 * mu.front();
    std::erase_if(mu, [cutoff](double x) { return x < cutoff; });
    return mu;
}

double effective_dimension(const KernelSpec& spec) {
    const auto mu = spec.spectrum();
    const double top = mu.empty() ? 0.0 : mu.front();
    if (top <= 0.0) throw ArgumentError("effective_dimension: all eigenvalues are zero");
    double acc = 0.0;
    for (double m : mu) acc += (m / top) * (m / top);
    return acc;
}

double q_n(double delta, const KernelSpec& spec, std::size_t n) {
    if (!(delta > 0.0)) throw ArgumentError("q_n: delta must be positive");
    if (n == 0) throw ArgumentError("q_n: n must be positive");
    const double d2 = delta * delta;
    double acc = 0.0;
    for (double m : spec.spectrum()) acc += std::min(d2, m);
    return std::sqrt(acc / double(n));
}

std::vector<double> zeta_check_lattice() {
    std::vector<double> lattice;
    lattice.reserve(41);
    for (int m = 0; m <= 40; ++m) lattice.push_back(std::ldexp(1.0, -m));
    return lattice;
}

double zeta_n(const KernelSpec& spec, std::size_t n) {
    if (n < 2) throw ArgumentError("zeta_n: n must be >= 2");
    const auto lattice = zeta_check_lattice();
    std::vector<double> q(lattice.size());
    for (std::size_t m = 0; m < lattice.size(); ++m) q[m] = q_n(lattice[m], spec, n);

    auto feasible = [&](double zeta) {
        for (std::size_t m = 0; m < lattice.size(); ++m) {
            if (q[m] > zeta * lattice[m] + zeta * zeta) return false;
        }
        return true;
    };

    const double floor = std::sqrt(std::log(double(n)) / double(n));
    if (feasible(floor)) return floor;

    double hi = floor;
    for (std::size_t m = 0; m < lattice.size(); ++m) hi = std::max(hi, q[m] / lattice[m]);
    while (!feasible(hi)) hi *= 2.0;
    double lo = floor;
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace ftsvd
