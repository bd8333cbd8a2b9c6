#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "qsdwave/errors.hpp"
#include "qsdwave/grid.hpp"
#include "qsdwave/jump_law.hpp"
#include "qsdwave/snapshot.hpp"

namespace qsdwave {

enum class Scheme { explicit_euler, semi_implicit };

struct PdeConfig {
    double dt = 1e-4;
    double horizon = 1.0;
    Scheme scheme = Scheme::explicit_euler;
    double snapshot_dt = 0.5;

    void validate(const Grid1D& grid, double sigma) const {
        if (!(dt > 0.0)) throw config_error("PdeConfig: dt must be > 0");
        if (!(horizon >= 0.0)) throw config_error("PdeConfig: horizon must be >= 0");
        if (!(snapshot_dt > 0.0)) throw config_error("PdeConfig: snapshot_dt must be > 0");
        if (scheme == Scheme::explicit_euler) {
            const double h = grid.h();
            const double limit = 0.9 * h * h / (sigma * sigma);
            if (dt > limit) {
                std::ostringstream msg;
                msg << "PdeConfig: explicit scheme violates the diffusive CFL bound dt <= 0.9 h^2/sigma^2"
                    << " (dt = " << dt << ", bound = " << limit << ")";
                throw config_error(msg.str());
            }
        }
    }
};

// Largest explicit-scheme step for spacing h and diffusion sigma.
inline double stable_dt(const Grid1D& grid, double sigma = 1.0) {
    return 0.9 * grid.h() * grid.h() / (sigma * sigma);
}

namespace detail {

inline std::size_t steps_for(double horizon, double dt) {
    return static_cast<std::size_t>(std::llround(horizon / dt));
}

inline std::size_t snapshot_stride(double snapshot_dt, double dt) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(snapshot_dt / dt)));
}

// Thomas algorithm; diag/upper/lower are the constant tridiagonal coefficients.
struct Tridiagonal {
    std::vector<double> lower, diag, upper, scratch;

    void solve(std::vector<double>& rhs) {
        const std::size_t n = diag.size();
        scratch.resize(n);
        double beta = diag[0];
        rhs[0] /= beta;
        for (std::size_t i = 1; i < n; ++i) {
            scratch[i] = upper[i - 1] / beta;
            beta = diag[i] - lower[i] * scratch[i];
            rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
        }
        for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= scratch[i + 1] * rhs[i + 1];
    }
};

// Crank-Nicolson matrices for u_t = (sigma^2/2) u_xx + drift u_x with Dirichlet-0
// interior solve (boundary values handled by the caller).
struct CrankNicolson {
    Tridiagonal lhs;
    double a_lo, a_mid, a_hi;  // explicit-side stencil

    CrankNicolson(std::size_t interior, double h, double dt, double sigma, double drift) {
        const double d = 0.5 * sigma * sigma * dt / (h * h);
        const double adv = drift * dt / (2.0 * h);
        // implicit half
        lhs.lower.assign(interior, -0.5 * (d - adv));
        lhs.diag.assign(interior, 1.0 + d);
        lhs.upper.assign(interior, -0.5 * (d + adv));
        // explicit half
        a_lo = 0.5 * (d - adv);
        a_mid = 1.0 - d;
        a_hi = 0.5 * (d + adv);
    }

    // u has n = interior + 2 nodes with fixed ends; overwrites the interior.
    void step(std::vector<double>& u) {
        const std::size_t m = lhs.diag.size();
        std::vector<double> rhs(m);
        for (std::size_t i = 0; i < m; ++i)
            rhs[i] = a_lo * u[i] + a_mid * u[i + 1] + a_hi * u[i + 2];
        // boundary contributions of the implicit half (ends held fixed)
        rhs[0] -= lhs.lower[0] * u[0];
        rhs[m - 1] -= lhs.upper[m - 1] * u[m + 1];
        lhs.solve(rhs);
        for (std::size_t i = 0; i < m; ++i) u[i + 1] = rhs[i];
    }
};

}  // namespace detail

struct KppResult {
    GridSeries series;
    double total_clip = 0.0;            // accumulated |clipped| mass
    bool boundary_leak_warning = false; // solution activity reached the pinned edges
};

// Explicit (or semi-implicit) solve of v_t = 1/2 v_xx + r (v^2 - v) with the
// boundary pinned to the initial edge values. Values are clipped to [0,1] after
// each step and the clip magnitude accumulated.
inline KppResult kpp_solve(const GridFunction& v0, double r, const PdeConfig& cfg) {
    if (!(r > 0.0)) throw parameter_error("kpp_solve: r must be > 0");
    v0.check_finite();
    const Grid1D grid = v0.grid;
    cfg.validate(grid, 1.0);
    for (std::size_t i = 0; i < grid.n; ++i) {
        if (!(v0.values[i] >= 0.0 && v0.values[i] <= 1.0))
            throw parameter_error("kpp_solve: v0 must take values in [0,1]");
        if (i > 0 && v0.values[i] < v0.values[i - 1] - 1e-12)
            throw parameter_error("kpp_solve: v0 must be monotone nondecreasing");
    }

    const double h = grid.h();
    const double dt = cfg.dt;
    std::vector<double> v = v0.values;
    const double pin_left = v.front();
    const double pin_right = v.back();

    KppResult out;
    out.series.grid = grid;
    auto record = [&](double t) { out.series.snapshots.push_back({t, v}); };
    record(0.0);

    const std::size_t steps = detail::steps_for(cfg.horizon, dt);
    const std::size_t stride = detail::snapshot_stride(cfg.snapshot_dt, dt);
    std::vector<double> next(v.size());
    detail::CrankNicolson cn(grid.n >= 2 ? grid.n - 2 : 0, h, dt, 1.0, 0.0);

    for (std::size_t k = 1; k <= steps; ++k) {
        if (cfg.scheme == Scheme::explicit_euler) {
            for (std::size_t i = 1; i + 1 < v.size(); ++i) {
                const double vxx = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
                next[i] = v[i] + dt * (0.5 * vxx + r * (v[i] * v[i] - v[i]));
            }
            next.front() = pin_left;
            next.back() = pin_right;
            v.swap(next);
        } else {
            for (std::size_t i = 1; i + 1 < v.size(); ++i)
                v[i] += dt * r * (v[i] * v[i] - v[i]);
            cn.step(v);
            v.front() = pin_left;
            v.back() = pin_right;
        }
        for (double& x : v) {
            if (x < 0.0) {
                out.total_clip += -x;
                x = 0.0;
            } else if (x > 1.0) {
                out.total_clip += x - 1.0;
                x = 1.0;
            }
        }
        if (std::abs(v[1] - pin_left) > 1e-6 && pin_left < 0.5) out.boundary_leak_warning = true;
        if (std::abs(v[v.size() - 2] - pin_right) > 1e-6 && pin_right > 0.5) out.boundary_leak_warning = true;
        if (k % stride == 0 || k == steps) record(static_cast<double>(k) * dt);
    }
    return out;
}

struct CondEvResult {
    GridSeries series;
    // per recorded snapshot (skipping t=0): renormalization-rate proxy over the
    // window since the previous snapshot, -log(prod mass factors)/Delta t
    std::vector<double> renorm_rate;
    // one-sided boundary-flux proxy 1/2 u_x(t,0) at snapshot times
    std::vector<double> flux_rate;
};

// Conditioned evolution of Brownian motion with drift -c absorbed at 0:
// per step the linear part u_t = 1/2 u_xx + c u_x with absorbing ends, then
// renormalization of the total mass to 1 (the nonlinear flux term of the
// conditioned equation, exact to first order in dt). The per-step mass factor
// is the absorption-rate proxy.
inline CondEvResult conditioned_evolution_solve(const GridFunction& u0, double c,
                                                const PdeConfig& cfg) {
    if (!(c > 0.0)) throw parameter_error("conditioned_evolution_solve: c must be > 0");
    u0.check_finite();
    const Grid1D grid = u0.grid;
    cfg.validate(grid, 1.0);
    if (std::abs(grid.xmin) > 1e-12)
        throw parameter_error("conditioned_evolution_solve: grid must start at 0");
    for (double v : u0.values)
        if (v < -1e-12) throw parameter_error("conditioned_evolution_solve: u0 must be >= 0");
    if (std::abs(u0.values.front()) > 1e-8 * std::max(1.0, u0.max_abs()))
        throw parameter_error("conditioned_evolution_solve: u0(0) must vanish");
    const double mass0 = u0.mass();
    if (std::abs(mass0 - 1.0) > 1e-6)
        throw parameter_error("conditioned_evolution_solve: u0 must integrate to 1");

    const double h = grid.h();
    const double dt = cfg.dt;
    std::vector<double> u = u0.values;
    for (double& x : u) x /= mass0;
    u.front() = 0.0;
    u.back() = 0.0;

    CondEvResult out;
    out.series.grid = grid;
    auto flux = [&]() { return 0.5 * u[1] / h; };
    auto record = [&](double t, double rate) {
        out.series.snapshots.push_back({t, u});
        if (t > 0.0) out.renorm_rate.push_back(rate);
        out.flux_rate.push_back(flux());
    };
    record(0.0, 0.0);

    const std::size_t steps = detail::steps_for(cfg.horizon, dt);
    const std::size_t stride = detail::snapshot_stride(cfg.snapshot_dt, dt);
    std::vector<double> next(u.size());
    detail::CrankNicolson cn(grid.n >= 2 ? grid.n - 2 : 0, h, dt, 1.0, c);

    double log_mass_window = 0.0;
    double window_start = 0.0;
    for (std::size_t k = 1; k <= steps; ++k) {
        if (cfg.scheme == Scheme::explicit_euler) {
            for (std::size_t i = 1; i + 1 < u.size(); ++i) {
                const double uxx = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
                const double ux = (u[i + 1] - u[i - 1]) / (2.0 * h);
                next[i] = u[i] + dt * (0.5 * uxx + c * ux);
            }
            next.front() = 0.0;
            next.back() = 0.0;
            u.swap(next);
        } else {
            cn.step(u);
            u.front() = 0.0;
            u.back() = 0.0;
        }
        double mass = 0.0;
        for (double x : u) mass += x;
        mass *= h;
        if (!(mass > 0.0)) throw extinction_error("conditioned_evolution_solve: mass extinct");
        double min_value = 0.0;
        for (double x : u) min_value = std::min(min_value, x);
        if (min_value < -1e-12)
            throw numerical_error("conditioned_evolution_solve: negative values beyond tolerance");
        for (double& x : u) x /= mass;
        log_mass_window += -std::log(mass);
        if (k % stride == 0 || k == steps) {
            const double t = static_cast<double>(k) * dt;
            record(t, log_mass_window / (t - window_start));
            log_mass_window = 0.0;
            window_start = t;
        }
    }
    return out;
}

namespace detail {

struct Truncation {
    double gamma = 0.0;  // interpolated boundary, reported in snapshots
    double cut = 0.0;    // grid-aligned dead/live divide used by the stepper
};

// Advance gamma to the cutoff where the left-truncated mass equals 1 and zero
// everything left of it. Node values use midpoint mass bookkeeping (exact,
// since the far ends vanish); the reported gamma is interpolated on the
// trapezoid cumulative, while `cut` snaps to the last zeroed node so the
// dead-region classification never clips the partial boundary cell.
inline Truncation truncate_to_unit_mass(std::vector<double>& u, const Grid1D& grid,
                                        const Truncation& previous) {
    const double h = grid.h();
    double mass = 0.0;
    for (double x : u) mass += x;
    mass *= h;
    if (mass < 1.0 - 1e-12)
        throw numerical_error("free boundary: total mass fell below 1 before truncation");
    double excess = mass - 1.0;
    if (excess <= 0.0) return previous;

    Truncation result = previous;
    {
        double cum = 0.0;
        bool found = false;
        for (std::size_t i = 0; i + 1 < u.size(); ++i) {
            const double cell = 0.5 * (u[i] + u[i + 1]) * h;
            if (cum + cell >= excess && cell > 0.0) {
                result.gamma = grid.x(i) + h * (excess - cum) / cell;
                found = true;
                break;
            }
            cum += cell;
        }
        if (!found) result.gamma = grid.xmax;
    }

    for (std::size_t i = 0; i < u.size() && excess > 0.0; ++i) {
        const double cell = u[i] * h;
        if (cell <= excess) {
            excess -= cell;
            u[i] = 0.0;
            result.cut = std::max(result.cut, grid.x(i));
        } else {
            u[i] -= excess / h;
            excess = 0.0;
        }
    }
    result.gamma = std::max(result.gamma, previous.gamma);
    return result;
}

inline Truncation initial_truncation(const std::vector<double>& u, const Grid1D& grid) {
    for (std::size_t i = 0; i < u.size(); ++i)
        if (u[i] > 0.0) {
            const double edge = (i == 0) ? grid.xmin : grid.x(i - 1);
            return Truncation{edge, edge};
        }
    throw parameter_error("free boundary: u0 is identically zero");
}

}  // namespace detail

// Durrett-Remenik free-boundary problem with Brownian kernel:
//   u_t = 1/2 u_xx + r u on x > gamma(t), mass on [gamma, inf) pinned to 1.
// Per step: explicit diffusion with the dead region as absorbing zero, exact
// growth factor e^{r dt}, then mass-cutoff truncation from the left.
inline FreeBoundarySeries dr_bm_solve(const GridFunction& u0, double r, const PdeConfig& cfg) {
    if (!(r > 0.0)) throw parameter_error("dr_bm_solve: r must be > 0");
    u0.check_finite();
    const Grid1D grid = u0.grid;
    cfg.validate(grid, 1.0);
    for (double v : u0.values)
        if (v < -1e-12) throw parameter_error("dr_bm_solve: u0 must be >= 0");
    const double mass0 = u0.mass();
    if (std::abs(mass0 - 1.0) > 1e-6)
        throw parameter_error("dr_bm_solve: u0 must integrate to 1");

    const double h = grid.h();
    const double dt = cfg.dt;
    const double growth = std::exp(r * dt);
    std::vector<double> u = u0.values;
    for (double& x : u) x /= mass0;
    if (u.front() < 0.0) u.front() = 0.0;
    detail::Truncation boundary = detail::initial_truncation(u, grid);

    FreeBoundarySeries out;
    out.grid = grid;
    auto record = [&](double t) { out.snapshots.push_back({t, boundary.gamma, u}); };
    record(0.0);

    const std::size_t steps = detail::steps_for(cfg.horizon, dt);
    const std::size_t stride = detail::snapshot_stride(cfg.snapshot_dt, dt);
    std::vector<double> next(u.size());
    for (std::size_t k = 1; k <= steps; ++k) {
        for (std::size_t i = 1; i + 1 < u.size(); ++i) {
            if (grid.x(i) <= boundary.cut) {
                next[i] = 0.0;
                continue;
            }
            const double uxx = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
            next[i] = (u[i] + dt * 0.5 * uxx) * growth;
        }
        next.front() = 0.0;
        next.back() = 0.0;
        u.swap(next);
        if (u[u.size() - 2] > 1e-10)
            throw numerical_error("dr_bm_solve: solution reached the right edge; enlarge the domain");
        boundary = detail::truncate_to_unit_mass(u, grid, boundary);
        if (k % stride == 0 || k == steps) record(static_cast<double>(k) * dt);
    }
    return out;
}

// Durrett-Remenik free-boundary problem with random-walk kernel, as printed:
//   u_t = (rho * u)(x) on x > gamma(t), mass on [gamma, inf) pinned to 1.
// The convolution is a direct grid quadrature on the kernel's effective
// support; mass unaccounted for by the evaluation window raises a domain-size
// error.
inline FreeBoundarySeries dr_rw_solve(const GridFunction& u0, const JumpLaw& rho,
                                      const PdeConfig& cfg) {
    u0.check_finite();
    if (rho.kind() == JumpKind::none)
        throw parameter_error("dr_rw_solve: displacement law required");
    if (!rho.symmetric(1e-9))
        throw parameter_error("dr_rw_solve: displacement density must be symmetric");
    const Grid1D grid = u0.grid;
    if (!(cfg.dt > 0.0)) throw config_error("dr_rw_solve: dt must be > 0");
    if (!(cfg.snapshot_dt > 0.0)) throw config_error("dr_rw_solve: snapshot_dt must be > 0");
    for (double v : u0.values)
        if (v < -1e-12) throw parameter_error("dr_rw_solve: u0 must be >= 0");
    const double mass0 = u0.mass();
    if (std::abs(mass0 - 1.0) > 1e-6)
        throw parameter_error("dr_rw_solve: u0 must integrate to 1");

    const double h = grid.h();
    const double dt = cfg.dt;
    std::vector<double> u = u0.values;
    for (double& x : u) x /= mass0;
    detail::Truncation boundary = detail::initial_truncation(u, grid);

    // kernel samples (continuous kinds) or interpolated shifts (point masses)
    std::vector<double> kernel;
    long kmax = 0;
    const bool pointwise = rho.kind() == JumpKind::point_masses;
    if (!pointwise) {
        double reach;
        if (rho.kind() == JumpKind::two_sided_exponential)
            reach = 45.0 / std::min(rho.rate_up(), rho.rate_down());
        else
            reach = std::abs(rho.gaussian_mean()) + 9.0 * rho.gaussian_stddev();
        kmax = static_cast<long>(std::ceil(reach / h));
        kernel.resize(2 * kmax + 1);
        for (long k = -kmax; k <= kmax; ++k)
            kernel[static_cast<std::size_t>(k + kmax)] = rho.density(static_cast<double>(k) * h) * h;
    } else {
        kmax = 0;
        for (const auto& p : rho.points())
            kmax = std::max(kmax, static_cast<long>(std::ceil(std::abs(p.location) / h)) + 1);
    }

    FreeBoundarySeries out;
    out.grid = grid;
    auto record = [&](double t) { out.snapshots.push_back({t, boundary.gamma, u}); };
    record(0.0);

    const std::size_t n = grid.n;
    const std::size_t steps = detail::steps_for(cfg.horizon, dt);
    const std::size_t stride = detail::snapshot_stride(cfg.snapshot_dt, dt);
    std::vector<double> conv(n);
    GridFunction interp_view(grid, u);  // reused buffer for point-mass interpolation
    for (std::size_t k = 1; k <= steps; ++k) {
        // support window
        long lo = -1, hi = -1;
        for (std::size_t i = 0; i < n; ++i)
            if (u[i] > 0.0) {
                if (lo < 0) lo = static_cast<long>(i);
                hi = static_cast<long>(i);
            }
        if (lo < 0) throw numerical_error("dr_rw_solve: profile vanished");
        const long tlo = std::max<long>(0, lo - kmax);
        const long thi = std::min<long>(static_cast<long>(n) - 1, hi + kmax);

        double mass_before = 0.0;
        for (double x : u) mass_before += x;
        mass_before *= h;

        std::fill(conv.begin(), conv.end(), 0.0);
        double conv_mass = 0.0;
        if (!pointwise) {
            for (long i = tlo; i <= thi; ++i) {
                double acc = 0.0;
                const long jlo = std::max<long>(lo, i - kmax);
                const long jhi = std::min<long>(hi, i + kmax);
                for (long j = jlo; j <= jhi; ++j)
                    acc += kernel[static_cast<std::size_t>(i - j + kmax)] * u[static_cast<std::size_t>(j)];
                conv[static_cast<std::size_t>(i)] = acc;
                conv_mass += acc;
            }
        } else {
            interp_view.values = u;
            for (long i = tlo; i <= thi; ++i) {
                double acc = 0.0;
                const double xi = grid.x(static_cast<std::size_t>(i));
                for (const auto& p : rho.points())
                    acc += p.weight * interp_view.interpolate(xi - p.location);
                conv[static_cast<std::size_t>(i)] = acc;
                conv_mass += acc;
            }
        }
        conv_mass *= h;
        if (std::abs(conv_mass - mass_before) > 1e-8)
            throw numerical_error("dr_rw_solve: convolution mass leaked past the grid edge; enlarge the domain");

        for (long i = tlo; i <= thi; ++i)
            u[static_cast<std::size_t>(i)] += dt * conv[static_cast<std::size_t>(i)];
        // re-impose the dead region
        for (std::size_t i = 0; i < n && grid.x(i) <= gamma; ++i) u[i] = 0.0;
        if (u[n - 2] > 1e-10)
            throw numerical_error("dr_rw_solve: solution reached the right edge; enlarge the domain");
        gamma = detail::truncate_to_unit_mass(u, grid, gamma);
        if (k % stride == 0 || k == steps) record(static_cast<double>(k) * dt);
    }
    return out;
}

// Level-set front tracking: the first upward crossing of `level`, linearly
// interpolated; snapshots without a crossing yield an empty value.
inline std::vector<FrontPoint> front_position(const GridSeries& series, double level) {
    std::vector<FrontPoint> out;
    out.reserve(series.snapshots.size());
    const double h = series.grid.h();
    for (const auto& snap : series.snapshots) {
        FrontPoint p;
        p.t = snap.t;
        const auto& v = snap.values;
        for (std::size_t i = 0; i + 1 < v.size(); ++i) {
            if (v[i] <= level && v[i + 1] > level) {
                const double w = (level - v[i]) / (v[i + 1] - v[i]);
                p.x = series.grid.x(i) + w * h;
                break;
            }
        }
        out.push_back(std::move(p));
    }
    return out;
}

// gamma(t) series of a free-boundary solve as front points.
inline std::vector<FrontPoint> front_position(const FreeBoundarySeries& series) {
    std::vector<FrontPoint> out;
    out.reserve(series.snapshots.size());
    for (const auto& snap : series.snapshots) out.push_back({snap.t, snap.gamma});
    return out;
}

}  // namespace qsdwave
