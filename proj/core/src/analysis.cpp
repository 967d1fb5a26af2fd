#include "degchemo/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "degchemo/norms.hpp"

namespace degchemo {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double center_dist(const Grid& g, std::size_t a, std::size_t b) {
    const auto x = g.center(a);
    const auto y = g.center(b);
    return std::hypot(x[0] - y[0], x[1] - y[1]);
}

std::vector<std::size_t> selected(const CellMask& m) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < m.cells.size(); ++i) {
        if (m.cells[i]) out.push_back(i);
    }
    return out;
}

CellMask mask_where(const ScalarField& f, std::string predicate, double delta, auto pred) {
    CellMask m(f.grid, false);
    m.predicate = std::move(predicate);
    m.delta = delta;
    m.field_hash = field_hash(f);
    for (std::size_t i = 0; i < f.size(); ++i) m.cells[i] = pred(f.values[i]) ? 1 : 0;
    return m;
}

}  // namespace

CellMask sublevel_mask(const ScalarField& M0, double delta) {
    return mask_where(M0, "M0 > delta", delta, [delta](double v) { return v > delta; });
}

std::vector<double> distance_to(const CellMask& target) {
    const Grid& g = target.grid;
    const auto idx = selected(target);
    std::vector<double> d(g.size(), inf);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (target.cells[i]) {
            d[i] = 0.0;
            continue;
        }
        for (std::size_t j : idx) d[i] = std::min(d[i], center_dist(g, i, j));
    }
    return d;
}

bool LevelsetDistance::holds() const { return empty || distance >= bound - spacing; }

LevelsetDistance levelset_distance(const ScalarField& M0, double delta, double theta) {
    if (!(delta > 0.0)) throw InvalidArgument("levelset_distance needs delta > 0");
    LevelsetDistance r;
    r.theta = theta;
    r.spacing = M0.grid.min_spacing();
    r.holder = holder_seminorm(M0, theta);
    r.bound = r.holder > 0.0 ? std::pow(delta, 1.0 / theta) * std::pow(r.holder, -1.0 / theta) : inf;
    const auto low = mask_where(M0, "M0 <= delta", delta, [delta](double v) { return v <= delta; });
    const auto high = mask_where(M0, "M0 >= 2 delta", delta, [delta](double v) { return v >= 2.0 * delta; });
    if (low.empty() || high.empty()) {
        r.empty = true;
        r.distance = inf;
        return r;
    }
    const auto d = distance_to(low);
    r.distance = inf;
    for (std::size_t i : selected(high)) r.distance = std::min(r.distance, d[i]);
    return r;
}

Cutoff build_cutoff(const ScalarField& M0, double delta0, double delta1, double omega) {
    if (!(delta0 > 0.0) || !(delta1 > delta0)) throw InvalidArgument("build_cutoff needs 0 < delta0 < delta1");
    if (!(omega > 0.0 && omega < 1.0)) throw InvalidArgument("build_cutoff needs omega in (0, 1)");
    const Grid& g = M0.grid;
    const auto zero_set = mask_where(M0, "M0 <= delta0", delta0, [delta0](double v) { return v <= delta0; });
    const auto one_set = mask_where(M0, "M0 > delta1", delta1, [delta1](double v) { return v > delta1; });

    Cutoff out;
    out.phi = ScalarField(g, 1.0, 0.0);
    if (zero_set.empty()) {
        out.width = inf;
        return out;
    }
    const auto d = distance_to(zero_set);
    out.width = inf;
    for (std::size_t i : selected(one_set)) out.width = std::min(out.width, d[i]);
    if (!std::isfinite(out.width)) {
        out.width = *std::max_element(d.begin(), d.end());
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = out.width > 0.0 ? std::clamp(d[i] / out.width, 0.0, 1.0) : 1.0;
        out.phi.values[i] = r <= 0.0 ? 0.0 : (r >= 1.0 ? 1.0 : std::exp((1.0 - 1.0 / r) / omega));
    }

    for (std::size_t i = 0; i < g.size(); ++i) {
        const double p = out.phi.values[i];
        if (zero_set.cells[i] && p != 0.0) out.lower_plateau = false;
        if (one_set.cells[i] && p != 1.0) out.upper_plateau = false;
        if (!(p >= 0.0 && p <= 1.0)) out.in_unit_interval = false;
    }

    // derivatives by central differences inside the grid, one-sided at its edge
    const auto& v = out.phi.values;
    const int n0 = g.cells(0);
    const int n1 = g.cells(1);
    for (int i = 0; i < n0; ++i) {
        for (int j = 0; j < n1; ++j) {
            const auto c = g.index(i, j);
            if (v[c] <= 0.0) continue;
            double grad2 = 0.0;
            double hess = 0.0;
            auto axis = [&](int pos, int n, double h, auto at) {
                const int lo = std::max(pos - 1, 0);
                const int hi = std::min(pos + 1, n - 1);
                grad2 += std::pow((at(hi) - at(lo)) / ((hi - lo) * h), 2);
                if (pos > 0 && pos < n - 1) hess = std::max(hess, std::abs(at(pos - 1) - 2.0 * v[c] + at(pos + 1)) / (h * h));
            };
            axis(i, n0, g.spacing(0), [&](int k) { return v[g.index(k, j)]; });
            if (g.dim() == 2) axis(j, n1, g.spacing(1), [&](int k) { return v[g.index(i, k)]; });
            const double w = std::pow(v[c], 1.0 - omega);
            out.C_phi_first = std::max(out.C_phi_first, std::sqrt(grad2) / w);
            out.C_phi_second = std::max(out.C_phi_second, hess / w);
        }
    }
    out.C_phi = std::max(out.C_phi_first, out.C_phi_second);
    return out;
}

SublevelMinimum min_on_sublevel(const Trajectory& traj, const CellMask& mask) {
    SublevelMinimum out;
    const auto idx = selected(mask);
    out.empty = idx.empty();
    out.infimum = inf;
    if (out.empty) return out;
    for (const auto& s : traj.snapshots) {
        require_same_grid(s.M.grid, mask.grid, "min_on_sublevel");
        double m = inf;
        for (std::size_t i : idx) m = std::min(m, s.M.values[i]);
        out.series.push_back(m);
        out.infimum = std::min(out.infimum, m);
    }
    return out;
}

Support support_measure(const ScalarField& M, double tol) {
    if (!(tol > 0.0)) throw InvalidArgument("support_measure needs tol > 0");
    const Grid& g = M.grid;
    std::vector<std::size_t> idx;
    double cx = 0.0;
    double cy = 0.0;
    for (std::size_t i = 0; i < M.size(); ++i) {
        if (M.values[i] > tol) {
            idx.push_back(i);
            const auto c = g.center(i);
            cx += c[0];
            cy += c[1];
        }
    }
    Support s;
    if (idx.empty()) return s;
    cx /= static_cast<double>(idx.size());
    cy /= static_cast<double>(idx.size());
    s.measure = static_cast<double>(idx.size()) * g.cell_volume();
    for (std::size_t i : idx) {
        const auto c = g.center(i);
        s.radius = std::max(s.radius, std::hypot(c[0] - cx, c[1] - cy));
    }
    return s;
}

BoxCounting box_counting_dimension(std::span<const std::vector<double>> points, std::span<const double> radii) {
    if (points.size() < 10) throw InvalidArgument("box counting needs at least 10 points");
    if (radii.size() < 4) throw InvalidArgument("box counting needs at least 4 radii");
    const auto [rmin, rmax] = std::minmax_element(radii.begin(), radii.end());
    if (!(*rmin > 0.0) || *rmax < 10.0 * *rmin) throw InvalidArgument("box counting radii must span a decade");
    const std::size_t dim = points.front().size();
    std::vector<double> lo(dim, inf);
    for (const auto& p : points) {
        if (p.size() != dim) throw InvalidArgument("points must share one dimension");
        for (std::size_t k = 0; k < dim; ++k) lo[k] = std::min(lo[k], p[k]);
    }

    BoxCounting out;
    std::vector<double> x, y;
    for (double r : radii) {
        std::set<std::vector<long long>> boxes;
        std::vector<long long> key(dim);
        for (const auto& p : points) {
            for (std::size_t k = 0; k < dim; ++k) key[k] = static_cast<long long>(std::floor((p[k] - lo[k]) / r));
            boxes.insert(key);
        }
        out.radii.push_back(r);
        out.counts.push_back(boxes.size());
        x.push_back(std::log(1.0 / r));
        y.push_back(std::log(static_cast<double>(boxes.size())));
    }
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    out.dim = sxy / sxx;
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (my + out.dim * (x[i] - mx));
        sse += e * e;
    }
    out.residual = std::sqrt(sse / n);
    return out;
}

std::vector<double> coarse_features(const State& s, int blocks) {
    const Grid& g = s.M.grid;
    int b0 = blocks;
    int b1 = 1;
    if (g.dim() == 2) {
        b0 = static_cast<int>(std::lround(std::sqrt(static_cast<double>(blocks))));
        b1 = blocks / b0;
    }
    if (b0 > g.cells(0) || b1 > g.cells(1)) throw InvalidArgument("more feature blocks than cells");
    std::vector<double> out;
    out.reserve(2 * static_cast<std::size_t>(b0 * b1));
    for (const ScalarField* f : {&s.M, &s.rho}) {
        std::vector<double> sum(static_cast<std::size_t>(b0 * b1), 0.0);
        std::vector<int> cnt(sum.size(), 0);
        for (int i = 0; i < g.cells(0); ++i) {
            for (int j = 0; j < g.cells(1); ++j) {
                const auto k = static_cast<std::size_t>((i * b0 / g.cells(0)) * b1 + (j * b1 / g.cells(1)));
                sum[k] += f->values[g.index(i, j)];
                ++cnt[k];
            }
        }
        for (std::size_t k = 0; k < sum.size(); ++k) out.push_back(sum[k] / cnt[k]);
    }
    return out;
}

namespace {

struct Projected {
    double c = 0.0;  // coefficient of exp(-omega (t - tref))
    double d = 0.0;
    double sse = inf;
    double tref = 0.0;
};

Projected project(std::span<const double> t, std::span<const double> v, double omega) {
    Projected p;
    p.tref = omega >= 0.0 ? t.front() : t.back();
    const double n = static_cast<double>(t.size());
    double sb = 0.0, sbb = 0.0, sv = 0.0, sbv = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double b = std::exp(-omega * (t[i] - p.tref));
        sb += b;
        sbb += b * b;
        sv += v[i];
        sbv += b * v[i];
    }
    const double det = n * sbb - sb * sb;
    if (!(det > 1e-13 * n * sbb)) {
        p.c = 0.0;
        p.d = sv / n;
    } else {
        p.c = (n * sbv - sb * sv) / det;
        p.d = (sbb * sv - sb * sbv) / det;
    }
    p.sse = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double e = p.c * std::exp(-omega * (t[i] - p.tref)) + p.d - v[i];
        p.sse += e * e;
    }
    return p;
}

double sse_at(std::span<const double> t, std::span<const double> v, double c, double omega, double d, double tref) {
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double e = c * std::exp(-omega * (t[i] - tref)) + d - v[i];
        s += e * e;
    }
    return s;
}

}  // namespace

DecayFit fit_dissipative(std::span<const double> t, std::span<const double> v) {
    if (t.size() != v.size()) throw InvalidArgument("fit_dissipative needs matching t and v");
    if (t.size() < 8) throw InvalidArgument("fit_dissipative needs at least 8 samples");
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (!(t[i] > t[i - 1])) throw InvalidArgument("fit_dissipative needs increasing t");
    }
    const std::size_t n = t.size();
    DecayFit fit;
    const auto [vmin, vmax] = std::minmax_element(v.begin(), v.end());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
    if (*vmax - *vmin <= 1e-14 * std::max(1.0, std::abs(mean))) {
        fit.D_fit = mean;
        return fit;
    }

    // starting point: tail mean, head minus tail, log-slope of the excess
    const std::size_t q = std::max<std::size_t>(2, n / 4);
    const double tail = std::accumulate(v.end() - static_cast<std::ptrdiff_t>(q), v.end(), 0.0) / q;
    const double head = v.front();
    double omega0 = 0.0;
    {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int m = 0;
        for (std::size_t i = 0; i + q < n; ++i) {
            const double e = (v[i] - tail) / (head - tail);
            if (e > 0.0) {
                const double y = std::log(e);
                sx += t[i]; sy += y; sxx += t[i] * t[i]; sxy += t[i] * y;
                ++m;
            }
        }
        if (m >= 2 && m * sxx - sx * sx > 0.0) omega0 = -(m * sxy - sx * sy) / (m * sxx - sx * sx);
    }

    const double T = t.back() - t.front();
    double best_w = omega0;
    double best = project(t, v, omega0).sse;
    const int scan = 1000;
    const double wlo = -20.0 / T;
    const double whi = 60.0 / T;
    const double dw = (whi - wlo) / scan;
    for (int k = 0; k <= scan; ++k) {
        const double w = wlo + k * dw;
        const double s = project(t, v, w).sse;
        if (s < best) {
            best = s;
            best_w = w;
        }
    }
    // golden section on the bracket around the best scan point
    {
        double a = best_w - dw;
        double b = best_w + dw;
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = b - g * (b - a);
        double x2 = a + g * (b - a);
        double f1 = project(t, v, x1).sse;
        double f2 = project(t, v, x2).sse;
        for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(best_w)); ++it) {
            if (f1 < f2) {
                b = x2; x2 = x1; f2 = f1;
                x1 = b - g * (b - a);
                f1 = project(t, v, x1).sse;
            } else {
                a = x1; x1 = x2; f1 = f2;
                x2 = a + g * (b - a);
                f2 = project(t, v, x2).sse;
            }
        }
        const double wm = 0.5 * (a + b);
        const double sm = project(t, v, wm).sse;
        if (sm <= best) {
            best = sm;
            best_w = wm;
        }
    }

    // Levenberg-Marquardt polish in (c, omega, d) with tref frozen
    Projected p = project(t, v, best_w);
    double c = p.c, w = best_w, d = p.d;
    const double tref = p.tref;
    double cur = sse_at(t, v, c, w, d, tref);
    double lambda = 1e-6;
    for (int it = 0; it < 100; ++it) {
        Eigen::Matrix3d JtJ = Eigen::Matrix3d::Zero();
        Eigen::Vector3d Jtr = Eigen::Vector3d::Zero();
        for (std::size_t i = 0; i < n; ++i) {
            const double s = t[i] - tref;
            const double b = std::exp(-w * s);
            const Eigen::Vector3d J(b, -c * s * b, 1.0);
            const double r = c * b + d - v[i];
            JtJ += J * J.transpose();
            Jtr += J * r;
        }
        Eigen::Matrix3d A = JtJ;
        A.diagonal() *= (1.0 + lambda);
        const Eigen::Vector3d delta = A.ldlt().solve(-Jtr);
        if (!delta.allFinite()) break;
        const double trial = sse_at(t, v, c + delta[0], w + delta[1], d + delta[2], tref);
        if (trial < cur) {
            c += delta[0];
            w += delta[1];
            d += delta[2];
            const bool tiny = cur - trial <= 1e-30 + 1e-15 * cur;
            cur = trial;
            lambda = std::max(lambda * 0.1, 1e-12);
            if (tiny) break;
        } else {
            lambda *= 10.0;
            if (lambda > 1e10) break;
        }
    }
    if (!(cur <= best)) {
        c = p.c;
        w = best_w;
        d = p.d;
        cur = best;
    }

    fit.omega_fit = w;
    fit.C_fit = c * std::exp(w * tref);
    fit.D_fit = d;
    fit.residual = std::sqrt(cur / static_cast<double>(n));
    if (!std::isfinite(fit.C_fit) || !std::isfinite(fit.omega_fit) || !std::isfinite(fit.D_fit) ||
        !std::isfinite(fit.residual)) {
        fit.converged = false;
        fit.residual = inf;
    }
    return fit;
}

}  // namespace degchemo
