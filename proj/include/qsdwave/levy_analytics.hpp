#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "qsdwave/errors.hpp"
#include "qsdwave/jump_law.hpp"

namespace qsdwave {

// Location of the negative infimum of psi_c(theta) = psi(theta) - c theta.
struct DualityPoint {
    double velocity = 0.0;   // c
    double theta_c = 0.0;    // argmin of psi_c on (0, min(theta*, cap)]
    double rate = 0.0;       // r = -psi_c(theta_c) >= 0
    bool at_search_cap = false;  // infimum hit the finite search cap (theta* = inf)
};

// Laplace exponent psi(theta) = b theta + sigma^2 theta^2 / 2 + lambda (M(theta) - 1)
// of a finite-activity Levy triplet, with the machinery around it: theta*, theta_c,
// the velocity/absorption-rate duality and Esscher tilting.
//
// `centered` adjusts the drift so psi'(0) = E[Z_1] = 0 (the standing assumption);
// `raw` keeps the triplet as passed.
class LaplaceExponent {
public:
    static LaplaceExponent centered(LevyTriplet triplet, double theta_search_cap = 1e3) {
        triplet.validate();
        triplet.drift -= triplet.mean_rate();
        return LaplaceExponent(std::move(triplet), theta_search_cap);
    }

    static LaplaceExponent raw(LevyTriplet triplet, double theta_search_cap = 1e3) {
        triplet.validate();
        return LaplaceExponent(std::move(triplet), theta_search_cap);
    }

    const LevyTriplet& triplet() const { return triplet_; }
    double theta_star() const { return theta_star_; }
    double search_cap() const { return cap_; }

    double psi(double theta) const {
        check_domain(theta);
        return psi_unchecked(theta);
    }

    double psi_c(double c, double theta) const { return psi(theta) - c * theta; }

    // Golden-section minimization of psi_c over (0, min(theta*, cap)], relative
    // tolerance 1e-10 on theta. psi_c is strictly convex, hence unimodal; for the
    // exponential family psi blows up at theta*, so the minimum is interior there.
    DualityPoint theta_c(double c) const {
        if (!(c > 0.0)) throw parameter_error("theta_c: velocity c must be > 0");
        const double hi_limit = std::min(theta_star_, cap_);
        double b = hi_limit;
        if (!std::isfinite(theta_star_)) {
            // expand until psi_c turns upward (it does: sigma > 0)
            b = 1e-3;
            while (b < cap_ && value_or_inf(c, 2.0 * b) <= value_or_inf(c, b)) b *= 2.0;
            b = std::min(2.0 * b, cap_);
        }
        double a = 0.0;
        const double invphi = 0.6180339887498948482;
        double x1 = b - invphi * (b - a);
        double x2 = a + invphi * (b - a);
        double f1 = value_or_inf(c, x1);
        double f2 = value_or_inf(c, x2);
        for (int it = 0; it < 400; ++it) {
            if (f1 <= f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - invphi * (b - a);
                f1 = value_or_inf(c, x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + invphi * (b - a);
                f2 = value_or_inf(c, x2);
            }
            if ((b - a) <= 1e-10 * std::max(0.5 * (a + b), 1e-6)) break;
        }
        DualityPoint p;
        p.velocity = c;
        p.theta_c = 0.5 * (a + b);
        p.at_search_cap = !std::isfinite(theta_star_) && p.theta_c > cap_ * (1.0 - 1e-8);
        if (p.at_search_cap) p.theta_c = cap_;
        p.rate = -value_or_inf(c, p.theta_c);
        return p;
    }

    // Maximal absorption rate for drift c: r(c) = -psi_c(theta_c).
    double max_absorption_rate(double c) const { return theta_c(c).rate; }

    // Inverse of c -> r(c) (strictly increasing): the minimal velocity admitting
    // absorption rate r. Bisection to relative tolerance 1e-10.
    double min_velocity(double r) const {
        if (!(r > 0.0)) throw parameter_error("min_velocity: rate r must be > 0");
        double lo = 0.0;
        double hi = 1.0;
        int guard = 0;
        while (max_absorption_rate(hi) < r) {
            hi *= 2.0;
            if (++guard > 60)
                throw domain_error("min_velocity: rate r not attainable within search bracket");
        }
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (max_absorption_rate(mid) < r)
                lo = mid;
            else
                hi = mid;
            if ((hi - lo) <= 1e-11 * std::max(hi, 1.0)) break;
        }
        return 0.5 * (lo + hi);
    }

    // Triplet of Z under the Esscher measure dP^theta/dP|_t = e^{theta Z_t - psi(theta) t}:
    // Brownian drift gains sigma^2 theta, jumps are tilted in-family. The result is
    // generally not centered; wrap with LaplaceExponent::raw.
    LevyTriplet esscher_tilt(double theta) const {
        check_domain(theta);
        LevyTriplet tilted;
        tilted.drift = triplet_.drift + triplet_.diffusion * triplet_.diffusion * theta;
        tilted.diffusion = triplet_.diffusion;
        tilted.jumps = triplet_.jumps.esscher_tilt(theta);
        return tilted;
    }

private:
    LaplaceExponent(LevyTriplet triplet, double cap)
        : triplet_(std::move(triplet)), theta_star_(triplet_.jumps.theta_star()), cap_(cap) {
        if (!(cap_ > 0.0)) throw parameter_error("LaplaceExponent: search cap must be > 0");
    }

    void check_domain(double theta) const {
        if (!(theta >= 0.0)) throw parameter_error("psi: theta must be >= 0");
        if (theta >= theta_star_) {
            std::ostringstream msg;
            msg << "psi: theta = " << theta << " is outside [0, theta* = " << theta_star_ << ")";
            throw domain_error(msg.str());
        }
    }

    double psi_unchecked(double theta) const {
        double v = triplet_.drift * theta + 0.5 * triplet_.diffusion * triplet_.diffusion * theta * theta;
        const double lambda = triplet_.jumps.intensity();
        if (lambda > 0.0) v += lambda * (triplet_.jumps.mgf(theta) - 1.0);
        return v;
    }

    double value_or_inf(double c, double theta) const {
        if (theta >= theta_star_) return std::numeric_limits<double>::infinity();
        return psi_unchecked(theta) - c * theta;
    }

    LevyTriplet triplet_;
    double theta_star_;
    double cap_;
};

}  // namespace qsdwave
