#pragma once

#include <cmath>
#include <sstream>
#include <vector>

#include "qsdwave/errors.hpp"
#include "qsdwave/grid.hpp"
#include "qsdwave/jump_law.hpp"
#include "qsdwave/rng.hpp"

namespace qsdwave {

// The explicit QSD / traveling-wave density family for Brownian motion with
// drift -c absorbed at 0, indexed by the absorption rate 0 < r <= c^2/2:
//
//   w(x) = m e^{-cx} sinh(beta x),  beta = sqrt(c^2 - 2r),  m = 2r/beta   (r < c^2/2)
//   w(x) = c^2 x e^{-cx}                                                  (r = c^2/2)
//
// The normalization constants follow from int_0^inf e^{-cx} sinh(beta x) dx
// = beta / (c^2 - beta^2) = beta / (2r); at criticality int x e^{-cx} = 1/c^2.
// The oscillatory branch r > c^2/2 is not integrable and is rejected.
class QsdBrownianFamily {
public:
    QsdBrownianFamily(double c, double r) : c_(c), r_(r) {
        if (!(c > 0.0)) throw parameter_error("QsdBrownianFamily: c must be > 0");
        if (!(r > 0.0)) throw parameter_error("QsdBrownianFamily: r must be > 0");
        const double disc = c * c - 2.0 * r;
        if (disc < -1e-12 * c * c) {
            std::ostringstream msg;
            msg << "QsdBrownianFamily: r = " << r << " exceeds c^2/2 = " << 0.5 * c * c
                << "; the sine branch is not a normalizable density";
            throw domain_error(msg.str());
        }
        beta_ = std::sqrt(std::max(0.0, disc));
        m_ = critical() ? c * c : 2.0 * r / beta_;
    }

    double c() const { return c_; }
    double r() const { return r_; }
    double beta() const { return beta_; }
    double normalization() const { return m_; }
    bool critical() const { return beta_ < 1e-7 * c_; }

    double tail_exponent() const { return c_ - beta_; }
    double mean_absorption_time() const { return 1.0 / r_; }

    double density(double x) const {
        check_x(x);
        if (critical()) return 2.0 * r_ * x * std::exp(-c_ * x);
        // (m/2)(e^{-(c-beta)x} - e^{-(c+beta)x}); overflow-safe for large x
        return (r_ / beta_) * (std::exp(-(c_ - beta_) * x) - std::exp(-(c_ + beta_) * x));
    }

    double cdf(double x) const {
        check_x(x);
        if (critical()) return 1.0 - (1.0 + c_ * x) * std::exp(-c_ * x);
        const double a = c_ - beta_;
        const double b = c_ + beta_;
        return (r_ / beta_) * ((1.0 - std::exp(-a * x)) / a - (1.0 - std::exp(-b * x)) / b);
    }

    // 1 - cdf in a cancellation-free form (usable deep in the tail).
    double survival(double x) const {
        check_x(x);
        if (critical()) return (1.0 + c_ * x) * std::exp(-c_ * x);
        const double a = c_ - beta_;
        const double b = c_ + beta_;
        return (r_ / beta_) * (std::exp(-a * x) / a - std::exp(-b * x) / b);
    }

    // Inverse CDF by bisection to 1e-10.
    double quantile(double u) const {
        if (!(u >= 0.0 && u < 1.0)) throw parameter_error("QsdBrownianFamily::quantile: u must be in [0,1)");
        if (u == 0.0) return 0.0;
        double lo = 0.0;
        double hi = 1.0;
        while (cdf(hi) < u) hi *= 2.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (cdf(mid) < u)
                lo = mid;
            else
                hi = mid;
            if ((hi - lo) <= 1e-10 * std::max(1.0, hi)) break;
        }
        return 0.5 * (lo + hi);
    }

private:
    void check_x(double x) const {
        if (!(x >= 0.0)) throw parameter_error("QsdBrownianFamily: x must be >= 0");
    }

    double c_, r_, beta_, m_;
};

inline double qsd_density(double c, double r, double x) { return QsdBrownianFamily(c, r).density(x); }
inline double qsd_cdf(double c, double r, double x) { return QsdBrownianFamily(c, r).cdf(x); }
inline double qsd_survival(double c, double r, double x) { return QsdBrownianFamily(c, r).survival(x); }

// The family member with maximal absorption rate r = c^2/2 (fastest tail decay,
// density c^2 x e^{-cx}); 1/r is its mean absorption time.
inline QsdBrownianFamily minimal_qsd(double c) {
    if (!(c > 0.0)) throw parameter_error("minimal_qsd: c must be > 0");
    return QsdBrownianFamily(c, 0.5 * c * c);
}

// Inverse-transform sampling from the family.
inline std::vector<double> qsd_sample(RngStream& rng, double c, double r, std::size_t count) {
    QsdBrownianFamily fam(c, r);
    std::vector<double> xs;
    xs.reserve(count);
    for (std::size_t i = 0; i < count; ++i) xs.push_back(fam.quantile(rng.u01()));
    return xs;
}

// Absorption rate selected by an initial density with tail exponent b < c:
// r(b) = c b - b^2 / 2.
inline double attraction_rate(double c, double b) {
    if (!(c > 0.0)) throw parameter_error("attraction_rate: c must be > 0");
    if (!(b > 0.0 && b < c)) {
        std::ostringstream msg;
        msg << "attraction_rate: tail exponent b = " << b << " must lie in (0, c = " << c << ")";
        throw domain_error(msg.str());
    }
    return c * b - 0.5 * b * b;
}

// Decay rate of 1 - cdf: the smaller root b = c - sqrt(c^2 - 2r) of
// b^2 - 2cb + 2r = 0 (inverse of attraction_rate on (0, c]).
inline double tail_exponent(double c, double r) {
    if (!(c > 0.0)) throw parameter_error("tail_exponent: c must be > 0");
    if (!(r > 0.0)) throw parameter_error("tail_exponent: r must be > 0");
    const double disc = c * c - 2.0 * r;
    if (disc < -1e-12 * c * c)
        throw domain_error("tail_exponent: r exceeds c^2/2");
    return c - std::sqrt(std::max(0.0, disc));
}

// Pointwise residual of L* w + c w' + r w on the interior of w's grid, where L*
// is the adjoint generator of the (uncompensated, finite-activity) triplet:
//   L* f = (sigma^2/2) f'' - b f' + lambda int (f(x-y) - f(x)) rho(y) dy.
// Central differences for the local part, trapezoid quadrature on the grid
// spacing for the jump integral, w extended by zero outside its support
// (consistent with absorption at 0). Endpoints carry residual 0.
//
// discretization_limited is set when the measured residual shrinks materially
// on the half-resolution subgrid, i.e. the profile solves the equation to
// discretization order and the returned values are the h^2 floor, not a
// genuine defect of the profile.
struct GeneratorResidual {
    GridFunction values;
    bool discretization_limited = false;
};

namespace detail {

inline std::vector<double> residual_core(const GridFunction& w, const LevyTriplet& triplet,
                                         double c, double r) {
    const std::size_t n = w.grid.n;
    const double h = w.grid.h();
    const double sig2 = triplet.diffusion * triplet.diffusion;
    const double lambda = triplet.jumps.intensity();
    std::vector<double> res(n, 0.0);

    // jump kernel samples on the grid spacing
    std::vector<double> kernel;
    long kmax = 0;
    if (lambda > 0.0 && triplet.jumps.has_density()) {
        double reach = 0.0;
        if (triplet.jumps.kind() == JumpKind::two_sided_exponential)
            reach = 45.0 / std::min(triplet.jumps.rate_up(), triplet.jumps.rate_down());
        else
            reach = std::abs(triplet.jumps.gaussian_mean()) + 9.0 * triplet.jumps.gaussian_stddev();
        kmax = static_cast<long>(std::ceil(reach / h));
        kernel.resize(2 * kmax + 1);
        for (long k = -kmax; k <= kmax; ++k)
            kernel[static_cast<std::size_t>(k + kmax)] = triplet.jumps.density(static_cast<double>(k) * h);
    }

    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double wxx = (w.values[i + 1] - 2.0 * w.values[i] + w.values[i - 1]) / (h * h);
        const double wx = (w.values[i + 1] - w.values[i - 1]) / (2.0 * h);
        double jump = 0.0;
        if (lambda > 0.0) {
            if (triplet.jumps.has_density()) {
                double acc = 0.0;
                for (long k = -kmax; k <= kmax; ++k) {
                    const long j = static_cast<long>(i) - k;
                    const double wj =
                        (j >= 0 && j < static_cast<long>(n)) ? w.values[static_cast<std::size_t>(j)] : 0.0;
                    double weight = (k == -kmax || k == kmax) ? 0.5 : 1.0;
                    acc += weight * kernel[static_cast<std::size_t>(k + kmax)] * (wj - w.values[i]);
                }
                jump = lambda * acc * h;
            } else if (triplet.jumps.kind() == JumpKind::point_masses) {
                double acc = 0.0;
                for (const auto& p : triplet.jumps.points())
                    acc += p.weight * (w.interpolate(w.grid.x(i) - p.location) - w.values[i]);
                jump = lambda * acc;
            }
        }
        res[i] = 0.5 * sig2 * wxx - triplet.drift * wx + jump + c * wx + r * w.values[i];
    }
    return res;
}

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace detail

inline GeneratorResidual generator_residual(const GridFunction& w, const LevyTriplet& triplet,
                                            double c, double r) {
    triplet.validate();
    w.check_finite();
    if (w.grid.n < 5) throw parameter_error("generator_residual: grid too small");
    if (std::abs(w.grid.xmin) > 1e-12)
        throw parameter_error("generator_residual: w must be defined on [0, xmax]");
    if (std::abs(w.values.front()) > 1e-8 * std::max(1.0, w.max_abs()))
        throw parameter_error("generator_residual: w(0) must vanish");

    GeneratorResidual out;
    out.values = GridFunction(w.grid, detail::residual_core(w, triplet, c, r));

    if ((w.grid.n - 1) % 2 == 0 && w.grid.n >= 9) {
        Grid1D coarse;
        coarse.xmin = w.grid.xmin;
        coarse.xmax = w.grid.xmax;
        coarse.n = (w.grid.n - 1) / 2 + 1;
        std::vector<double> cv(coarse.n);
        for (std::size_t i = 0; i < coarse.n; ++i) cv[i] = w.values[2 * i];
        const auto coarse_res = detail::residual_core(GridFunction(coarse, std::move(cv)), triplet, c, r);
        out.discretization_limited =
            detail::max_abs(coarse_res) > 2.0 * detail::max_abs(out.values.values);
    }
    return out;
}

}  // namespace qsdwave
