#include "degchemo/norms.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <limits>

#include "degchemo/inequalities.hpp"

namespace degchemo {

using SpMat = Eigen::SparseMatrix<double>;

struct NormWorkspace::Impl {
    SpMat A;
    Eigen::SimplicialLDLT<SpMat> ldlt;
    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg;
    bool direct = true;
};

namespace {

// -lap with the ghost rule 2*0 - interior, i.e. 3/h^2 on boundary-adjacent diagonals.
SpMat negative_laplacian(const Grid& g) {
    const int n0 = g.cells(0);
    const int n1 = g.cells(1);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(g.size() * 5);
    for (int i = 0; i < n0; ++i) {
        for (int j = 0; j < n1; ++j) {
            const auto row = static_cast<int>(g.index(i, j));
            double diag = 0.0;
            auto axis = [&](int pos, int n, double h, auto neighbour) {
                const double c = 1.0 / (h * h);
                diag += 2.0 * c;
                if (pos == 0) diag += c; else t.emplace_back(row, neighbour(-1), -c);
                if (pos == n - 1) diag += c; else t.emplace_back(row, neighbour(1), -c);
            };
            axis(i, n0, g.spacing(0), [&](int d) { return static_cast<int>(g.index(i + d, j)); });
            if (g.dim() == 2) {
                axis(j, n1, g.spacing(1), [&](int d) { return static_cast<int>(g.index(i, j + d)); });
            }
            t.emplace_back(row, row, diag);
        }
    }
    SpMat A(static_cast<int>(g.size()), static_cast<int>(g.size()));
    A.setFromTriplets(t.begin(), t.end());
    return A;
}

}  // namespace

NormWorkspace::NormWorkspace(const Grid& grid, double tolerance)
    : grid_(grid), tolerance_(tolerance), impl_(std::make_unique<Impl>()) {
    if (!(tolerance > 0.0)) throw InvalidArgument("solver tolerance must be positive");
    impl_->A = negative_laplacian(grid);
    impl_->direct = grid.dim() == 1;
    if (impl_->direct) {
        impl_->ldlt.compute(impl_->A);
        if (impl_->ldlt.info() != Eigen::Success) throw SolverError("Laplacian factorization failed");
    } else {
        impl_->cg.setTolerance(tolerance);
        impl_->cg.setMaxIterations(static_cast<Eigen::Index>(10 * grid.size()));
        impl_->cg.compute(impl_->A);
    }
}

NormWorkspace::~NormWorkspace() = default;
NormWorkspace::NormWorkspace(NormWorkspace&&) noexcept = default;
NormWorkspace& NormWorkspace::operator=(NormWorkspace&&) noexcept = default;

ScalarField NormWorkspace::solve_poisson(const ScalarField& w) const {
    require_same_grid(grid_, w.grid, "solve_poisson");
    const Eigen::Map<const Eigen::VectorXd> rhs(w.values.data(), static_cast<Eigen::Index>(w.size()));
    ScalarField phi(grid_, 0.0, 0.0);
    Eigen::Map<Eigen::VectorXd> x(phi.values.data(), static_cast<Eigen::Index>(phi.size()));
    if (rhs.squaredNorm() == 0.0) return phi;
    if (impl_->direct) {
        x = impl_->ldlt.solve(rhs);
    } else {
        x = impl_->cg.solve(rhs);
        if (impl_->cg.info() != Eigen::Success) {
            throw SolverError("Poisson CG did not converge", impl_->cg.error());
        }
    }
    const double res = (impl_->A * x - rhs).norm() / rhs.norm();
    if (!(res <= std::max(1e-8, 10.0 * tolerance_))) {
        throw SolverError("Poisson solve residual too large", res);
    }
    return phi;
}

double lp_norm(const ScalarField& f, double p) {
    if (!(p >= 1.0)) throw InvalidArgument("lp_norm needs p >= 1");
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : f.values) m = std::max(m, std::abs(v));
        return m;
    }
    double s = 0.0;
    if (p == 2.0) {
        for (double v : f.values) s += v * v;
        return std::sqrt(s * f.grid.cell_volume());
    }
    for (double v : f.values) s += std::pow(std::abs(v), p);
    return std::pow(s * f.grid.cell_volume(), 1.0 / p);
}

double h1_seminorm(const ScalarField& f) { return face_l2_norm(gradient(f)); }

double hminus1_norm(const NormWorkspace& ws, const ScalarField& w) {
    ScalarField src = w;
    src.boundary_value = 0.0;
    return face_l2_norm(gradient(ws.solve_poisson(src)));
}

double x_norm(const NormWorkspace& ws, const ScalarField& W, const ScalarField& v) {
    require_same_grid(W.grid, v.grid, "x_norm");
    return std::hypot(hminus1_norm(ws, W), lp_norm(v, 2.0));
}

double holder_seminorm(const ScalarField& f, double theta) {
    if (!(theta > 0.0 && theta <= 1.0)) throw InvalidArgument("theta must lie in (0, 1]");
    const Grid& g = f.grid;
    const double hmin2 = std::pow(g.min_spacing() * (1.0 - 1e-12), 2);
    const std::size_t n = g.size();
    std::vector<std::array<double, 2>> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = g.center(i);
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = xs[i][0] - xs[j][0];
            const double dy = xs[i][1] - xs[j][1];
            const double d2 = dx * dx + dy * dy;
            if (d2 < hmin2) continue;
            const double diff = std::abs(f.values[i] - f.values[j]);
            if (diff == 0.0) continue;
            const double r = theta == 1.0 ? diff / std::sqrt(d2) : diff / std::pow(d2, 0.5 * theta);
            best = std::max(best, r);
        }
    }
    return best;
}

namespace {

double masked_sq(const ScalarField& f, const CellMask& mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (mask[i]) s += f.values[i] * f.values[i];
    }
    return s * f.grid.cell_volume();
}

}  // namespace

double sublevel_l2_norm(const ScalarField& f, const CellMask& mask, bool* empty_mask) {
    require_same_grid(f.grid, mask.grid, "sublevel_l2_norm");
    const bool empty = mask.empty();
    if (empty_mask) *empty_mask = empty;
    return empty ? 0.0 : std::sqrt(masked_sq(f, mask));
}

double sublevel_l2_norm(std::span<const ScalarField> slice, const CellMask& mask,
                        std::span<const double> time_weights, bool* empty_mask) {
    if (slice.size() != time_weights.size()) throw InvalidArgument("one time weight per snapshot");
    const bool empty = mask.empty();
    if (empty_mask) *empty_mask = empty;
    if (empty) return 0.0;
    double s = 0.0;
    for (std::size_t k = 0; k < slice.size(); ++k) {
        require_same_grid(slice[k].grid, mask.grid, "sublevel_l2_norm");
        s += time_weights[k] * masked_sq(slice[k], mask);
    }
    return std::sqrt(s);
}

double parabolic_z_norm(std::span<const ScalarField> slice, const CellMask& mask, double dt) {
    if (slice.size() < 2) throw InvalidArgument("parabolic_z_norm needs at least 2 snapshots");
    if (!(dt > 0.0)) throw InvalidArgument("parabolic_z_norm needs dt > 0");
    const Grid& g = mask.grid;
    const int n0 = g.cells(0);
    const int n1 = g.cells(1);
    const double vol = g.cell_volume();

    std::vector<std::uint8_t> interior(g.size(), 0);
    for (int i = 1; i < n0 - 1; ++i) {
        for (int j = 0; j < n1; ++j) {
            const auto c = g.index(i, j);
            bool ok = mask[c] && mask[g.index(i - 1, j)] && mask[g.index(i + 1, j)];
            if (g.dim() == 2) ok = ok && j > 0 && j < n1 - 1 && mask[g.index(i, j - 1)] && mask[g.index(i, j + 1)];
            interior[c] = ok ? 1 : 0;
        }
    }

    double total = 0.0;
    for (std::size_t k = 1; k < slice.size(); ++k) {
        const auto& u = slice[k].values;
        const auto& prev = slice[k - 1].values;
        require_same_grid(slice[k].grid, g, "parabolic_z_norm");
        double second = 0.0;
        double rate = 0.0;
        double zeroth = 0.0;
        for (int i = 0; i < n0; ++i) {
            for (int j = 0; j < n1; ++j) {
                const auto c = g.index(i, j);
                if (!mask[c]) continue;
                const double du = (u[c] - prev[c]) / dt;
                rate += du * du;
                zeroth += u[c] * u[c];
                if (!interior[c]) continue;
                const double h0 = g.spacing(0);
                const double d0 = (u[g.index(i - 1, j)] - 2.0 * u[c] + u[g.index(i + 1, j)]) / (h0 * h0);
                second += d0 * d0;
                if (g.dim() == 2) {
                    const double h1 = g.spacing(1);
                    const double d1 = (u[g.index(i, j - 1)] - 2.0 * u[c] + u[g.index(i, j + 1)]) / (h1 * h1);
                    second += d1 * d1;
                }
            }
        }
        total += dt * vol * (second + rate + zeroth);
    }
    return std::sqrt(total);
}

double interpolation_ratio(const NormWorkspace& ws, const ScalarField& w, double theta, double theta1) {
    const double num = lp_norm(w, std::numeric_limits<double>::infinity());
    const double den = std::pow(holder_seminorm(w, theta), 1.0 - theta1) * std::pow(hminus1_norm(ws, w), theta1);
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return num / den;
}

DiffNorms diff_norms(const NormWorkspace& ws, const ScalarField& M1, const ScalarField& rho1,
                     const ScalarField& M2, const ScalarField& rho2, double alpha) {
    require_same_grid(M1.grid, M2.grid, "diff_norms");
    require_same_grid(rho1.grid, rho2.grid, "diff_norms");
    ScalarField W(M1.grid, 0.0, 0.0);
    ScalarField v(rho1.grid, 0.0, 0.0);
    double pairing = 0.0;
    for (std::size_t i = 0; i < W.size(); ++i) {
        W.values[i] = M1.values[i] - M2.values[i];
        v.values[i] = rho1.values[i] - rho2.values[i];
        pairing += power_difference(M1.values[i], M2.values[i], alpha + 1.0) * W.values[i];
    }
    DiffNorms d;
    d.h_minus1_W = hminus1_norm(ws, W);
    d.l2_v = lp_norm(v, 2.0);
    d.x_combined = std::hypot(d.h_minus1_W, d.l2_v);
    const double inf = std::numeric_limits<double>::infinity();
    d.linf_W = lp_norm(W, inf);
    d.linf_v = lp_norm(v, inf);
    d.pairing = pairing * M1.grid.cell_volume();
    return d;
}

}  // namespace degchemo
