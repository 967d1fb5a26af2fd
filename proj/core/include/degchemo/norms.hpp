#pragma once

#include <memory>
#include <span>
#include <vector>

#include "degchemo/grid.hpp"
#include "degchemo/mask.hpp"

namespace degchemo {

/**
 * Cached Dirichlet Poisson solver for one grid. Sparse LDLT in 1D,
 * conjugate gradients in 2D. Immutable after construction; solves are
 * safe to run concurrently.
 */
class NormWorkspace {
public:
    explicit NormWorkspace(const Grid& grid, double tolerance = 1e-10);
    ~NormWorkspace();
    NormWorkspace(NormWorkspace&&) noexcept;
    NormWorkspace& operator=(NormWorkspace&&) noexcept;

    const Grid& grid() const { return grid_; }
    double tolerance() const { return tolerance_; }

    /// phi with -lap(phi) = w and zero trace. Throws SolverError on non-convergence.
    ScalarField solve_poisson(const ScalarField& w) const;

private:
    struct Impl;
    Grid grid_;
    double tolerance_;
    std::unique_ptr<Impl> impl_;
};

/// Midpoint-quadrature L^p norm; pass p = infinity for the max norm.
double lp_norm(const ScalarField& f, double p);
double h1_seminorm(const ScalarField& f);
double hminus1_norm(const NormWorkspace& ws, const ScalarField& w);
double x_norm(const NormWorkspace& ws, const ScalarField& W, const ScalarField& v);

/// sup |f(x)-f(y)| / |x-y|^theta over cell-center pairs at least one spacing apart.
double holder_seminorm(const ScalarField& f, double theta);

/// L2 norm over the masked cells. `empty_mask` is set when the mask selects nothing.
double sublevel_l2_norm(const ScalarField& f, const CellMask& mask, bool* empty_mask = nullptr);
/// sqrt(sum_k weights[k] * |f_k|^2_{L2(mask)}) over a time slice.
double sublevel_l2_norm(std::span<const ScalarField> slice, const CellMask& mask,
                        std::span<const double> time_weights, bool* empty_mask = nullptr);

/**
 * Discrete parabolic norm on a masked region over snapshots u^0..u^K spaced dt:
 *   sqrt( sum_{k=1..K} dt * ( |D2 u^k|^2 + |(u^k - u^{k-1})/dt|^2 + |u^k|^2 ) )
 * where |D2 u|^2 sums squared axis second differences over masked cells whose
 * stencil neighbours are masked too, and the other two terms run over the mask.
 */
double parabolic_z_norm(std::span<const ScalarField> slice, const CellMask& mask, double dt);

/// |w|_inf / (|w|_{C^theta}^(1-theta1) |w|_{H^-1}^theta1); +inf if the denominator vanishes.
double interpolation_ratio(const NormWorkspace& ws, const ScalarField& w, double theta, double theta1);

/// Norms of the difference of two solutions (W = M1 - M2, v = rho1 - rho2).
struct DiffNorms {
    double h_minus1_W = 0.0;
    double l2_v = 0.0;
    double x_combined = 0.0;
    double y_sublevel = 0.0;
    double z_parabolic = 0.0;
    double linf_W = 0.0;
    double linf_v = 0.0;
    /// integral of (M1^(alpha+1) - M2^(alpha+1)) (M1 - M2)
    double pairing = 0.0;
};

/// Fills every DiffNorms entry except the trajectory-level y/z terms.
DiffNorms diff_norms(const NormWorkspace& ws, const ScalarField& M1, const ScalarField& rho1,
                     const ScalarField& M2, const ScalarField& rho2, double alpha);

}  // namespace degchemo
