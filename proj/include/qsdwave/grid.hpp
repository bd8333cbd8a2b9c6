#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "qsdwave/errors.hpp"

namespace qsdwave {

// Uniform 1-D grid of n nodes on [xmin, xmax].
struct Grid1D {
    double xmin = 0.0;
    double xmax = 1.0;
    std::size_t n = 2;

    static Grid1D with_spacing(double xmin, double xmax, double h) {
        if (!(xmax > xmin)) throw parameter_error("Grid1D: xmax must exceed xmin");
        if (!(h > 0.0)) throw parameter_error("Grid1D: spacing must be > 0");
        const double cells = (xmax - xmin) / h;
        const double rounded = std::round(cells);
        if (std::abs(cells - rounded) > 1e-9 * std::max(1.0, cells) || rounded < 1.0)
            throw parameter_error("Grid1D: (xmax - xmin)/h must be an integer cell count");
        Grid1D g;
        g.xmin = xmin;
        g.xmax = xmax;
        g.n = static_cast<std::size_t>(rounded) + 1;
        return g;
    }

    double h() const { return (xmax - xmin) / static_cast<double>(n - 1); }
    double x(std::size_t i) const { return xmin + static_cast<double>(i) * h(); }
    std::size_t size() const { return n; }
};

// Grid plus nodal values.
struct GridFunction {
    Grid1D grid;
    std::vector<double> values;

    GridFunction() = default;
    GridFunction(Grid1D g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (values.size() != grid.n) throw parameter_error("GridFunction: value count != node count");
    }

    static GridFunction sample(const Grid1D& g, const std::function<double(double)>& f) {
        std::vector<double> v(g.n);
        for (std::size_t i = 0; i < g.n; ++i) v[i] = f(g.x(i));
        return GridFunction(g, std::move(v));
    }

    // Linear interpolation, zero outside [xmin, xmax].
    double interpolate(double x) const {
        if (x < grid.xmin || x > grid.xmax) return 0.0;
        const double s = (x - grid.xmin) / grid.h();
        std::size_t i = static_cast<std::size_t>(s);
        if (i >= grid.n - 1) return values.back();
        const double w = s - static_cast<double>(i);
        return (1.0 - w) * values[i] + w * values[i + 1];
    }

    // Trapezoid mass over the whole grid.
    double mass() const {
        double m = 0.5 * (values.front() + values.back());
        for (std::size_t i = 1; i + 1 < values.size(); ++i) m += values[i];
        return m * grid.h();
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }

    void check_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) throw numerical_error("GridFunction: non-finite value");
    }
};

}  // namespace qsdwave
