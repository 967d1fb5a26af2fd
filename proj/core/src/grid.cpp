#include "degchemo/grid.hpp"

#include <algorithm>
#include <cmath>

namespace degchemo {

Grid make_grid(int dim, std::span<const double> lengths, std::span<const int> cells) {
    if (dim != 1 && dim != 2) {
        throw InvalidArgument("unsupported dimension " + std::to_string(dim));
    }
    if (lengths.size() < static_cast<std::size_t>(dim) || cells.size() < static_cast<std::size_t>(dim)) {
        throw InvalidArgument("grid needs one length and one cell count per axis");
    }
    Grid g;
    g.dim_ = dim;
    for (int k = 0; k < dim; ++k) {
        if (!(lengths[k] > 0.0) || !std::isfinite(lengths[k])) {
            throw InvalidArgument("grid length must be positive");
        }
        if (cells[k] < 3) {
            throw InvalidArgument("grid needs at least 3 cells per axis");
        }
        g.lengths_[k] = lengths[k];
        g.cells_[k] = cells[k];
        g.spacing_[k] = lengths[k] / cells[k];
    }
    if (dim == 1) {
        g.lengths_[1] = 1.0;
        g.cells_[1] = 1;
        g.spacing_[1] = 1.0;
    }
    return g;
}

Grid make_grid_1d(double length, int cells) {
    const double l[] = {length};
    const int n[] = {cells};
    return make_grid(1, l, n);
}

Grid make_grid_2d(double lx, double ly, int nx, int ny) {
    const double l[] = {lx, ly};
    const int n[] = {nx, ny};
    return make_grid(2, l, n);
}

double Grid::min_spacing() const {
    return dim_ == 2 ? std::min(spacing_[0], spacing_[1]) : spacing_[0];
}

double Grid::max_length() const {
    return dim_ == 2 ? std::max(lengths_[0], lengths_[1]) : lengths_[0];
}

std::array<double, 2> Grid::center(std::size_t idx) const {
    const auto i0 = static_cast<int>(idx / cells_[1]);
    const auto i1 = static_cast<int>(idx % cells_[1]);
    return {(i0 + 0.5) * spacing_[0], dim_ == 2 ? (i1 + 0.5) * spacing_[1] : 0.0};
}

std::size_t Grid::face_count(int axis) const {
    if (axis == 0) return static_cast<std::size_t>(cells_[0] + 1) * cells_[1];
    return static_cast<std::size_t>(cells_[0]) * (cells_[1] + 1);
}

ScalarField::ScalarField(Grid g, double fill, double boundary)
    : grid(g), values(g.size(), fill), boundary_value(boundary) {}

ScalarField::ScalarField(Grid g, std::vector<double> v, double boundary)
    : grid(g), values(std::move(v)), boundary_value(boundary) {
    if (values.size() != grid.size()) {
        throw InvalidArgument("field size does not match grid");
    }
}

void ScalarField::check() const {
    if (values.size() != grid.size()) {
        throw InvalidArgument("field size does not match grid");
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw InvalidArgument("field holds a non-finite value");
    }
    if (!std::isfinite(boundary_value)) throw InvalidArgument("non-finite boundary value");
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) throw InvalidArgument(std::string("grid mismatch in ") + what);
}

// Face values are computed with one expression shared by gradient() and
// laplacian_dirichlet() so that the composition identity holds bitwise.
namespace {

inline double face_diff(double left, double right, double h) { return (right - left) / h; }

}  // namespace

VectorField gradient(const ScalarField& f) {
    const Grid& g = f.grid;
    const double b2 = 2.0 * f.boundary_value;
    VectorField out{g, {}};
    const int n0 = g.cells(0);
    const int n1 = g.cells(1);
    const double h0 = g.spacing(0);

    auto& c0 = out.components[0];
    c0.resize(g.face_count(0));
    for (int i = 0; i <= n0; ++i) {
        for (int j = 0; j < n1; ++j) {
            const double left = i > 0 ? f.values[g.index(i - 1, j)] : b2 - f.values[g.index(0, j)];
            const double right = i < n0 ? f.values[g.index(i, j)] : b2 - f.values[g.index(n0 - 1, j)];
            c0[static_cast<std::size_t>(i) * n1 + j] = face_diff(left, right, h0);
        }
    }
    if (g.dim() == 2) {
        const double h1 = g.spacing(1);
        auto& c1 = out.components[1];
        c1.resize(g.face_count(1));
        for (int i = 0; i < n0; ++i) {
            for (int j = 0; j <= n1; ++j) {
                const double low = j > 0 ? f.values[g.index(i, j - 1)] : b2 - f.values[g.index(i, 0)];
                const double high = j < n1 ? f.values[g.index(i, j)] : b2 - f.values[g.index(i, n1 - 1)];
                c1[static_cast<std::size_t>(i) * (n1 + 1) + j] = face_diff(low, high, h1);
            }
        }
    }
    return out;
}

ScalarField divergence(const VectorField& F) {
    const Grid& g = F.grid;
    ScalarField out(g, 0.0, 0.0);
    const int n0 = g.cells(0);
    const int n1 = g.cells(1);
    const double h0 = g.spacing(0);
    const double h1 = g.spacing(1);
    const auto& c0 = F.components[0];
    const auto& c1 = F.components[1];
    for (int i = 0; i < n0; ++i) {
        for (int j = 0; j < n1; ++j) {
            double acc = face_diff(c0[static_cast<std::size_t>(i) * n1 + j],
                                   c0[static_cast<std::size_t>(i + 1) * n1 + j], h0);
            if (g.dim() == 2) {
                acc += face_diff(c1[static_cast<std::size_t>(i) * (n1 + 1) + j],
                                 c1[static_cast<std::size_t>(i) * (n1 + 1) + j + 1], h1);
            }
            out.values[g.index(i, j)] = acc;
        }
    }
    return out;
}

ScalarField laplacian_dirichlet(const ScalarField& f) {
    const Grid& g = f.grid;
    const double b2 = 2.0 * f.boundary_value;
    ScalarField out(g, 0.0, 0.0);
    const int n0 = g.cells(0);
    const int n1 = g.cells(1);
    const double h0 = g.spacing(0);
    const double h1 = g.spacing(1);
    for (int i = 0; i < n0; ++i) {
        for (int j = 0; j < n1; ++j) {
            const double c = f.values[g.index(i, j)];
            const double w = i > 0 ? f.values[g.index(i - 1, j)] : b2 - c;
            const double e = i < n0 - 1 ? f.values[g.index(i + 1, j)] : b2 - c;
            double acc = face_diff(face_diff(w, c, h0), face_diff(c, e, h0), h0);
            if (g.dim() == 2) {
                const double s = j > 0 ? f.values[g.index(i, j - 1)] : b2 - c;
                const double nn = j < n1 - 1 ? f.values[g.index(i, j + 1)] : b2 - c;
                acc += face_diff(face_diff(s, c, h1), face_diff(c, nn, h1), h1);
            }
            out.values[g.index(i, j)] = acc;
        }
    }
    return out;
}

double integrate(const ScalarField& f) {
    double sum = 0.0;
    for (double v : f.values) sum += v;
    return sum * f.grid.cell_volume();
}

double face_l2_norm(const VectorField& F) {
    const Grid& g = F.grid;
    const int n0 = g.cells(0);
    const int n1 = g.cells(1);
    double total = 0.0;
    {
        const auto& c = F.components[0];
        for (int i = 0; i <= n0; ++i) {
            const double w = (i == 0 || i == n0) ? 0.5 : 1.0;
            for (int j = 0; j < n1; ++j) {
                const double v = c[static_cast<std::size_t>(i) * n1 + j];
                total += w * v * v;
            }
        }
    }
    if (g.dim() == 2) {
        const auto& c = F.components[1];
        for (int i = 0; i < n0; ++i) {
            for (int j = 0; j <= n1; ++j) {
                const double w = (j == 0 || j == n1) ? 0.5 : 1.0;
                const double v = c[static_cast<std::size_t>(i) * (n1 + 1) + j];
                total += w * v * v;
            }
        }
    }
    return std::sqrt(total * g.cell_volume());
}

double face_max_abs(const VectorField& F) {
    double m = 0.0;
    for (int k = 0; k < F.grid.dim(); ++k) {
        for (double v : F.components[k]) m = std::max(m, std::abs(v));
    }
    return m;
}

}  // namespace degchemo
