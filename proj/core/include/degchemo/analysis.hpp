#pragma once

#include <span>
#include <string>
#include <vector>

#include "degchemo/grid.hpp"
#include "degchemo/mask.hpp"
#include "degchemo/solver.hpp"

namespace degchemo {

/// Cells with M0 > delta.
CellMask sublevel_mask(const ScalarField& M0, double delta);

struct LevelsetDistance {
    double distance = 0.0;  // min center distance between {M0 <= delta} and {M0 >= 2 delta}
    double bound = 0.0;     // delta^(1/theta) |M0|_{C^theta}^(-1/theta)
    double holder = 0.0;
    double theta = 1.0;
    double spacing = 0.0;
    bool empty = false;     // one of the sets is empty; distance = +inf
    /// distance >= bound - spacing
    bool holds() const;
};

LevelsetDistance levelset_distance(const ScalarField& M0, double delta, double theta);

/// Cell-center distance to the nearest cell of `target` (0 on target, +inf if target is empty).
std::vector<double> distance_to(const CellMask& target);

struct Cutoff {
    ScalarField phi;
    double width = 0.0;          // distance from {M0 > delta1} to {M0 <= delta0}
    double C_phi = 0.0;          // max over {phi > 0} of |D^k phi| / phi^(1-omega), k = 1, 2
    double C_phi_first = 0.0;
    double C_phi_second = 0.0;
    bool lower_plateau = true;   // phi == 0 on {M0 <= delta0}
    bool upper_plateau = true;   // phi == 1 on {M0 > delta1}
    bool in_unit_interval = true;
};

/**
 * phi = exp((1 - 1/r) / omega), r = clamp(d / width, 0, 1), d the distance to
 * {M0 <= delta0}. Equals 0 there and 1 wherever d >= width, which covers {M0 > delta1}.
 */
Cutoff build_cutoff(const ScalarField& M0, double delta0, double delta1, double omega);

struct SublevelMinimum {
    std::vector<double> series;
    double infimum = 0.0;
    bool empty = false;
};

SublevelMinimum min_on_sublevel(const Trajectory& traj, const CellMask& mask);

struct Support {
    double measure = 0.0;
    double radius = 0.0;  // max distance of a supported center from the supported centroid
};

Support support_measure(const ScalarField& M, double tol = 1e-12);

struct BoxCounting {
    double dim = 0.0;
    double residual = 0.0;  // RMS misfit of log N_r
    std::vector<double> radii;
    std::vector<std::size_t> counts;
};

/// Slope of log N_r against log(1/r), N_r the number of occupied r-boxes anchored
/// at the bounding-box minimum. Needs >= 10 points and >= 4 radii spanning a decade.
BoxCounting box_counting_dimension(std::span<const std::vector<double>> points, std::span<const double> radii);

/// 16 block averages of M followed by 16 of rho (4x4 blocks in 2D).
std::vector<double> coarse_features(const State& s, int blocks = 16);

struct DecayFit {
    double C_fit = 0.0;
    double omega_fit = 0.0;
    double D_fit = 0.0;
    double residual = 0.0;  // RMS; +inf when the fit failed
    bool converged = true;
};

/// Least squares for v(t) ~ C exp(-omega t) + D. Needs >= 8 samples with increasing t.
DecayFit fit_dissipative(std::span<const double> t, std::span<const double> v);

}  // namespace degchemo
