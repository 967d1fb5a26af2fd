#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace degchemo {

/// Thrown for malformed inputs: bad grid parameters, mismatched fields, etc.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure: a linear solve that did not converge, a NaN in a step.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what, double residual = 0.0)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

/**
 * Uniform cell-centered mesh on an axis-aligned box [0, L0] (x [0, L1]).
 *
 * Cells are stored row-major with axis 0 slowest: index = i0 * n1 + i1.
 * Cell i along axis k has its center at (i + 1/2) * spacing[k].
 */
class Grid {
public:
    Grid() = default;

    int dim() const { return dim_; }
    double length(int axis) const { return lengths_[axis]; }
    int cells(int axis) const { return cells_[axis]; }
    double spacing(int axis) const { return spacing_[axis]; }
    const std::array<double, 2>& lengths() const { return lengths_; }
    const std::array<int, 2>& cells() const { return cells_; }
    const std::array<double, 2>& spacings() const { return spacing_; }

    std::size_t size() const { return static_cast<std::size_t>(cells_[0]) * cells_[1]; }
    double cell_volume() const { return spacing_[0] * (dim_ == 2 ? spacing_[1] : 1.0); }
    double domain_measure() const { return lengths_[0] * (dim_ == 2 ? lengths_[1] : 1.0); }
    double min_spacing() const;
    double max_length() const;

    std::size_t index(int i0, int i1 = 0) const {
        return static_cast<std::size_t>(i0) * cells_[1] + i1;
    }
    /// Coordinates of cell center `idx`; the second entry is 0 in 1D.
    std::array<double, 2> center(std::size_t idx) const;

    /// Number of faces normal to `axis`, boundary faces included.
    std::size_t face_count(int axis) const;

    bool operator==(const Grid& other) const = default;

    friend Grid make_grid(int dim, std::span<const double> lengths, std::span<const int> cells);

private:
    int dim_ = 1;
    std::array<double, 2> lengths_{1.0, 1.0};
    std::array<int, 2> cells_{1, 1};
    std::array<double, 2> spacing_{1.0, 1.0};
};

Grid make_grid(int dim, std::span<const double> lengths, std::span<const int> cells);
Grid make_grid_1d(double length, int cells);
Grid make_grid_2d(double lx, double ly, int nx, int ny);

/// Cell-centered samples plus the Dirichlet trace used by ghost cells.
struct ScalarField {
    Grid grid;
    std::vector<double> values;
    double boundary_value = 0.0;

    ScalarField() = default;
    ScalarField(Grid g, double fill, double boundary = 0.0);
    ScalarField(Grid g, std::vector<double> v, double boundary = 0.0);

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    /// Throws if the value count disagrees with the grid or any value is non-finite.
    void check() const;
};

/// Face-centered vector field; component k has grid.face_count(k) entries.
struct VectorField {
    Grid grid;
    std::array<std::vector<double>, 2> components;
};

/// Sample `fn(x, y)` at cell centers.
template <class Fn>
ScalarField sample(const Grid& grid, Fn&& fn, double boundary = 0.0) {
    ScalarField f(grid, 0.0, boundary);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto c = grid.center(i);
        f.values[i] = fn(c[0], c[1]);
    }
    return f;
}

/// Face differences; boundary faces use the ghost value 2 b - f.
VectorField gradient(const ScalarField& f);
/// Face-difference divergence back to cell centers.
ScalarField divergence(const VectorField& F);
/// 3-point / 5-point Dirichlet Laplacian. Bitwise equal to divergence(gradient(f)).
ScalarField laplacian_dirichlet(const ScalarField& f);
/// Midpoint quadrature.
double integrate(const ScalarField& f);
/// L2 norm of a face field with half-weight boundary faces, so that
/// |grad f|^2 = -integrate(f * lap f) holds exactly for zero trace.
double face_l2_norm(const VectorField& F);
double face_max_abs(const VectorField& F);

void require_same_grid(const Grid& a, const Grid& b, const char* what);

}  // namespace degchemo
