#include "ftsvd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ftsvd/error.hpp"

namespace ftsvd {

namespace {

// |sin| of the angle between u and v, from the rejection of u on v.
double sine(const Vector& u, const Vector& v) {
    const Vector uh = u / u.norm(), vh = v / v.norm();
    if (uh == vh || uh == -vh) return 0.0;
    return std::min(1.0, (uh - uh.dot(vh) * vh).norm());
}

}  // namespace

double dist_vec(const Vector& u, const Vector& v) {
    if (u.size() != v.size()) throw ArgumentError("dist_vec: length mismatch");
    const double nu = u.norm(), nv = v.norm();
    if (nu == 0.0 || nv == 0.0) throw ArgumentError("dist_vec: zero vector");
    return sine(u, v);
}

double dist_sampled(const Vector& f_on_quad, const Vector& g_on_quad) {
    if (f_on_quad.size() != g_on_quad.size()) throw ArgumentError("dist_fun: quadrature size mismatch");
    const double m = double(f_on_quad.size());
    const double nf = std::sqrt(f_on_quad.squaredNorm() / m);
    const double ng = std::sqrt(g_on_quad.squaredNorm() / m);
    if (nf <= 1e-12 || ng <= 1e-12) throw DegenerateError("dist_fun: function with (near) zero L2 norm");
    return sine(f_on_quad, g_on_quad);
}

Vector sample_on_quadrature(const RkhsFunction& f, std::size_t quad_m) { return evaluate(f, quadrature_points(quad_m)); }

Vector sample_on_quadrature(const std::function<double(double)>& f, std::size_t quad_m) {
    const auto pts = quadrature_points(quad_m);
    Vector out(Eigen::Index(pts.size()));
    for (std::size_t u = 0; u < pts.size(); ++u) out(Eigen::Index(u)) = f(pts[u]);
    return out;
}

double dist_fun(const RkhsFunction& f, const RkhsFunction& g, std::size_t quad_m) {
    return dist_sampled(sample_on_quadrature(f, quad_m), sample_on_quadrature(g, quad_m));
}

double dist_fun(const std::function<double(double)>& f, const std::function<double(double)>& g, std::size_t quad_m) {
    return dist_sampled(sample_on_quadrature(f, quad_m), sample_on_quadrature(g, quad_m));
}

ScoredComponent scored(const Component& c, std::size_t quad_m) { return {c.a, c.b, sample_on_quadrature(c.xi, quad_m)}; }

EvalReport summarize(std::vector<ComponentErrors> errors, std::vector<std::size_t> matching) {
    EvalReport report;
    const double count = double(errors.size());
    for (const auto& e : errors) {
        report.mean.dist_a += e.dist_a / count;
        report.mean.dist_b += e.dist_b / count;
        report.mean.dist_xi += e.dist_xi / count;
    }
    if (errors.size() > 1) {
        for (const auto& e : errors) {
            report.sd.dist_a += (e.dist_a - report.mean.dist_a) * (e.dist_a - report.mean.dist_a);
            report.sd.dist_b += (e.dist_b - report.mean.dist_b) * (e.dist_b - report.mean.dist_b);
            report.sd.dist_xi += (e.dist_xi - report.mean.dist_xi) * (e.dist_xi - report.mean.dist_xi);
        }
        report.sd.dist_a = std::sqrt(report.sd.dist_a / (count - 1.0));
        report.sd.dist_b = std::sqrt(report.sd.dist_b / (count - 1.0));
        report.sd.dist_xi = std::sqrt(report.sd.dist_xi / (count - 1.0));
    }
    report.errors = std::move(errors);
    report.matching = std::move(matching);
    return report;
}

EvalReport match_and_score(std::span<const ScoredComponent> estimated, std::span<const ScoredComponent> truth) {
    if (estimated.size() != truth.size()) throw ArgumentError("match_and_score: component counts differ");
    if (truth.empty()) throw ArgumentError("match_and_score: no components");
    const std::size_t r = truth.size();

    Matrix cos_a = Matrix::Zero(Eigen::Index(r), Eigen::Index(r));  // rows truth, cols estimate
    for (std::size_t t = 0; t < r; ++t)
        for (std::size_t e = 0; e < r; ++e) {
            const auto& u = truth[t].a;
            const auto& v = estimated[e].a;
            cos_a(Eigen::Index(t), Eigen::Index(e)) = std::abs(u.dot(v)) / (u.norm() * v.norm());
        }

    std::vector<std::size_t> matching(r);
    std::vector<bool> truth_used(r, false), est_used(r, false);
    for (std::size_t step = 0; step < r; ++step) {
        double best = -1.0;
        std::size_t bt = 0, be = 0;
        for (std::size_t t = 0; t < r; ++t) {
            if (truth_used[t]) continue;
            for (std::size_t e = 0; e < r; ++e) {
                if (est_used[e]) continue;
                if (cos_a(Eigen::Index(t), Eigen::Index(e)) > best) {
                    best = cos_a(Eigen::Index(t), Eigen::Index(e));
                    bt = t;
                    be = e;
                }
            }
        }
        truth_used[bt] = est_used[be] = true;
        matching[bt] = be;
    }

    std::vector<ComponentErrors> errors(r);
    for (std::size_t t = 0; t < r; ++t) {
        const auto& est = estimated[matching[t]];
        errors[t] = {dist_vec(est.a, truth[t].a), dist_vec(est.b, truth[t].b), dist_sampled(est.xi_on_quad, truth[t].xi_on_quad)};
    }
    return summarize(std::move(errors), std::move(matching));
}

EvalReport match_and_score(std::span<const Component> estimated, std::span<const Component> truth, std::size_t quad_m) {
    std::vector<ScoredComponent> est, tru;
    for (const auto& c : estimated) est.push_back(scored(c, quad_m));
    for (const auto& c : truth) tru.push_back(scored(c, quad_m));
    return match_and_score(std::span<const ScoredComponent>(est), std::span<const ScoredComponent>(tru));
}

double spectral_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    // Eigen-decompose the smaller Gram matrix.
    const Matrix g = m.rows() <= m.cols() ? Matrix(m * m.transpose()) : Matrix(m.transpose() * m);
    Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("spectral_norm: eigen-solver failed");
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double remainder_sup_norm(const Tensor3& z) {
    double sup = 0.0;
    for (std::size_t k = 0; k < z.n(); ++k) sup = std::max(sup, spectral_norm(Matrix(z.slice(k))));
    return sup;
}

Matrix aggregate_trajectories(const Tensor3& y, const Vector& b) {
    if (std::size_t(b.size()) != y.p2()) throw ArgumentError("aggregate_trajectories: b length does not match p2");
    Matrix out(Eigen::Index(y.p1()), Eigen::Index(y.n()));
    for (std::size_t k = 0; k < y.n(); ++k) out.col(Eigen::Index(k)) = y.slice(k) * b;
    return out;
}

std::vector<TrajectoryBand> trajectory_bands(const Matrix& trajectories, std::span<const std::string> labels) {
    if (std::size_t(trajectories.rows()) != labels.size()) {
        throw ArgumentError("trajectory_bands: one label per row is required");
    }
    std::vector<std::string> groups;
    std::map<std::string, std::vector<Eigen::Index>> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, inserted] = members.try_emplace(labels[i]);
        if (inserted) groups.push_back(labels[i]);
        it->second.push_back(Eigen::Index(i));
    }

    std::vector<TrajectoryBand> bands;
    for (Eigen::Index k = 0; k < trajectories.cols(); ++k) {
        for (const auto& g : groups) {
            const auto& rows = members[g];
            const double count = double(rows.size());
            double mean = 0.0;
            for (auto i : rows) mean += trajectories(i, k);
            mean /= count;
            double sem = 0.0;
            if (rows.size() > 1) {
                double ss = 0.0;
                for (auto i : rows) ss += (trajectories(i, k) - mean) * (trajectories(i, k) - mean);
                sem = std::sqrt(ss / (count - 1.0)) / std::sqrt(count);
            }
            bands.push_back({std::size_t(k), g, mean, mean - band_multiplier * sem, mean + band_multiplier * sem});
        }
    }
    return bands;
}

}  // namespace ftsvd
