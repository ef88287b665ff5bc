#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <functional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mos/exec.hpp"

// Uniform Cartesian discretization of the domain (interval or rectangle),
// node-valued fields with homogeneous Dirichlet masks, and the discrete
// gradient / quadrature pair the energy is built from.

namespace mos {

struct Grid {
    int dim = 1;
    std::array<double, 2> extent{1.0, 1.0};
    std::array<int, 2> n_cells{4, 1};

    static Grid line(double length, int cells) {
        Grid g;
        g.dim = 1;
        g.extent = {length, 1.0};
        g.n_cells = {cells, 1};
        g.validate();
        return g;
    }

    static Grid rect(double lx, double ly, int cx, int cy) {
        Grid g;
        g.dim = 2;
        g.extent = {lx, ly};
        g.n_cells = {cx, cy};
        g.validate();
        return g;
    }

    void validate() const {
        if (dim != 1 && dim != 2) throw std::invalid_argument("Grid: dim must be 1 or 2");
        for (int a = 0; a < dim; ++a) {
            if (!(extent[a] > 0.0)) throw std::invalid_argument("Grid: extent must be positive");
            if (n_cells[a] < 4) throw std::invalid_argument("Grid: need at least 4 cells per axis");
        }
    }

    double h(int axis) const { return extent[axis] / n_cells[axis]; }
    int nodes_axis(int axis) const { return axis < dim ? n_cells[axis] + 1 : 1; }

    std::size_t node_count() const {
        return static_cast<std::size_t>(nodes_axis(0)) * nodes_axis(1);
    }
    std::size_t cell_count() const {
        std::size_t c = n_cells[0];
        if (dim == 2) c *= n_cells[1];
        return c;
    }
    double cell_volume() const { return dim == 1 ? h(0) : h(0) * h(1); }

    std::size_t node_id(int i, int j = 0) const {
        return static_cast<std::size_t>(j) * nodes_axis(0) + i;
    }
    std::size_t cell_id(int i, int j = 0) const {
        return static_cast<std::size_t>(j) * n_cells[0] + i;
    }

    bool is_boundary(int i, int j = 0) const {
        if (i == 0 || i == n_cells[0]) return true;
        return dim == 2 && (j == 0 || j == n_cells[1]);
    }

    double node_x(int i) const { return i * h(0); }
    double node_y(int j) const { return dim == 2 ? j * h(1) : 0.0; }

    std::size_t interior_count() const {
        std::size_t n = static_cast<std::size_t>(n_cells[0] - 1);
        if (dim == 2) n *= static_cast<std::size_t>(n_cells[1] - 1);
        return n;
    }

    bool operator==(const Grid&) const = default;
};

/// Node-valued function. A dirichlet field keeps its boundary identically 0.
struct Field {
    Grid grid;
    std::vector<double> v;
    bool dirichlet = false;

    Field() = default;
    Field(const Grid& g, bool dirichlet_flag)
        : grid(g), v(g.node_count(), 0.0), dirichlet(dirichlet_flag) {}

    double& at(int i, int j = 0) { return v[grid.node_id(i, j)]; }
    double at(int i, int j = 0) const { return v[grid.node_id(i, j)]; }

    void enforce_boundary() {
        if (!dirichlet) return;
        for (int j = 0; j < grid.nodes_axis(1); ++j)
            for (int i = 0; i < grid.nodes_axis(0); ++i)
                if (grid.is_boundary(i, j)) v[grid.node_id(i, j)] = 0.0;
    }
};

struct CellField {
    Grid grid;
    std::vector<double> v;

    CellField() = default;
    explicit CellField(const Grid& g) : grid(g), v(g.cell_count(), 0.0) {}
};

/// Per-cell gradient vectors (y component unused for dim 1).
struct VecCellField {
    Grid grid;
    std::vector<double> x, y;

    VecCellField() = default;
    explicit VecCellField(const Grid& g)
        : grid(g), x(g.cell_count(), 0.0), y(g.dim == 2 ? g.cell_count() : 0, 0.0) {}
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* who) {
    if (!(a == b)) throw std::invalid_argument(std::string(who) + ": grid mismatch");
}

/// Forward-difference gradient per cell, anchored at the cell's lower corner.
/// Exact on affine fields.
inline VecCellField gradient(const Field& u) {
    const Grid& g = u.grid;
    VecCellField out(g);
    const double hx = g.h(0);
    if (g.dim == 1) {
        exec::parallel_for(g.cell_count(), [&](std::size_t c) {
            out.x[c] = (u.v[c + 1] - u.v[c]) / hx;
        });
    } else {
        const double hy = g.h(1);
        const int nx = g.n_cells[0];
        const int nodes_x = g.nodes_axis(0);
        exec::parallel_for(g.cell_count(), [&](std::size_t c) {
            const int j = static_cast<int>(c) / nx;
            const int i = static_cast<int>(c) % nx;
            const std::size_t n0 = static_cast<std::size_t>(j) * nodes_x + i;
            out.x[c] = (u.v[n0 + 1] - u.v[n0]) / hx;
            out.y[c] = (u.v[n0 + nodes_x] - u.v[n0]) / hy;
        });
    }
    return out;
}

inline CellField magnitude(const VecCellField& f) {
    CellField out(f.grid);
    if (f.grid.dim == 1) {
        exec::parallel_for(out.v.size(), [&](std::size_t c) { out.v[c] = std::abs(f.x[c]); });
    } else {
        exec::parallel_for(out.v.size(), [&](std::size_t c) {
            out.v[c] = std::hypot(f.x[c], f.y[c]);
        });
    }
    return out;
}

/// Cell value as the average of the 2^dim corner node values.
inline CellField corner_average(const Field& u, bool absolute = false) {
    const Grid& g = u.grid;
    CellField out(g);
    auto val = [&](std::size_t n) { return absolute ? std::abs(u.v[n]) : u.v[n]; };
    if (g.dim == 1) {
        exec::parallel_for(g.cell_count(), [&](std::size_t c) {
            out.v[c] = 0.5 * (val(c) + val(c + 1));
        });
    } else {
        const int nx = g.n_cells[0];
        const int nodes_x = g.nodes_axis(0);
        exec::parallel_for(g.cell_count(), [&](std::size_t c) {
            const int j = static_cast<int>(c) / nx;
            const int i = static_cast<int>(c) % nx;
            const std::size_t n0 = static_cast<std::size_t>(j) * nodes_x + i;
            out.v[c] = 0.25 * (val(n0) + val(n0 + 1) + val(n0 + nodes_x) + val(n0 + nodes_x + 1));
        });
    }
    return out;
}

/// Cell-rule quadrature: sum of cell values times the cell volume.
inline double integrate(const CellField& f) {
    return f.grid.cell_volume() * exec::tree_sum(f.v);
}

/// Samples expr(x, y) on the nodes; the dirichlet flag zeroes the boundary.
inline Field sample_on_nodes(const Grid& g, const std::function<double(double, double)>& expr,
                             bool dirichlet = false) {
    Field u(g, dirichlet);
    for (int j = 0; j < g.nodes_axis(1); ++j) {
        for (int i = 0; i < g.nodes_axis(0); ++i) {
            const double val = expr(g.node_x(i), g.node_y(j));
            if (!std::isfinite(val)) {
                std::ostringstream msg;
                msg << "sample_on_nodes: non-finite value at node (" << i;
                if (g.dim == 2) msg << "," << j;
                msg << ")";
                throw std::runtime_error(msg.str());
            }
            u.v[g.node_id(i, j)] = val;
        }
    }
    u.enforce_boundary();
    return u;
}

inline Field lincomb(double a, const Field& u, double b, const Field& v) {
    require_same_grid(u.grid, v.grid, "lincomb");
    Field out(u.grid, u.dirichlet && v.dirichlet);
    for (std::size_t k = 0; k < out.v.size(); ++k) out.v[k] = a * u.v[k] + b * v.v[k];
    return out;
}

inline Field scaled(const Field& u, double a) {
    Field out = u;
    for (double& x : out.v) x *= a;
    return out;
}

// ---------------------------------------------------------------------------
// Field CSV: header "dim,n1[,n2]", then node values row-major, one per line.
// ---------------------------------------------------------------------------

inline void write_field_csv(std::ostream& os, const Field& u) {
    os << u.grid.dim << "," << u.grid.n_cells[0];
    if (u.grid.dim == 2) os << "," << u.grid.n_cells[1];
    os << "\n";
    char buf[40];
    for (double x : u.v) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        os << buf << "\n";
    }
}

inline Field read_field_csv(std::istream& is, const Grid& grid, bool dirichlet = false) {
    std::string header;
    if (!std::getline(is, header)) throw std::runtime_error("field csv: empty stream");
    std::istringstream hs(header);
    int dim = 0, n1 = 0, n2 = 0;
    char comma;
    hs >> dim >> comma >> n1;
    if (dim == 2) hs >> comma >> n2;
    if (dim != grid.dim || n1 != grid.n_cells[0] || (dim == 2 && n2 != grid.n_cells[1]))
        throw std::runtime_error("field csv: header does not match the expected grid");
    Field u(grid, dirichlet);
    for (std::size_t k = 0; k < u.v.size(); ++k) {
        std::string line;
        if (!std::getline(is, line)) throw std::runtime_error("field csv: too few values");
        u.v[k] = std::stod(line);
        if (!std::isfinite(u.v[k]))
            throw std::runtime_error("field csv: non-finite value at row " + std::to_string(k));
    }
    u.enforce_boundary();
    return u;
}

}  // namespace mos
