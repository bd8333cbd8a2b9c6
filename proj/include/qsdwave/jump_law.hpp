#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qsdwave/errors.hpp"
#include "qsdwave/rng.hpp"

namespace qsdwave {

enum class JumpKind { none, two_sided_exponential, gaussian, point_masses };

struct PointMass {
    double location = 0.0;
    double weight = 0.0;
};

// Finite-activity jump law: intensity lambda (jumps per unit time) plus a jump
// size distribution. lambda == 0 iff kind == none.
//
// The two-sided exponential member carries split rates (rate_up, rate_down,
// p_up); the public constructor is the symmetric density (alpha/2) e^{-alpha|x|}
// and exponential tilting maps into the asymmetric members of the same family.
// Gaussian jumps carry a mean for the same reason (tilting shifts it).
class JumpLaw {
public:
    JumpLaw() : kind_(JumpKind::none), intensity_(0.0) {}

    static JumpLaw none() { return JumpLaw(); }

    static JumpLaw two_sided_exponential(double alpha, double intensity) {
        return two_sided_exponential(alpha, alpha, 0.5, intensity);
    }

    // Split-rate form: +Exp(rate_up) w.p. p_up, -Exp(rate_down) otherwise.
    static JumpLaw two_sided_exponential(double rate_up, double rate_down, double p_up,
                                         double intensity) {
        JumpLaw law;
        law.kind_ = JumpKind::two_sided_exponential;
        law.intensity_ = intensity;
        law.rate_up_ = rate_up;
        law.rate_down_ = rate_down;
        law.p_up_ = p_up;
        law.validate();
        return law;
    }

    static JumpLaw gaussian(double stddev, double intensity) {
        return gaussian(0.0, stddev, intensity);
    }

    static JumpLaw gaussian(double mean, double stddev, double intensity) {
        JumpLaw law;
        law.kind_ = JumpKind::gaussian;
        law.intensity_ = intensity;
        law.mean_ = mean;
        law.stddev_ = stddev;
        law.validate();
        return law;
    }

    static JumpLaw point_masses(std::vector<PointMass> points, double intensity) {
        JumpLaw law;
        law.kind_ = JumpKind::point_masses;
        law.intensity_ = intensity;
        law.points_ = std::move(points);
        law.validate();
        return law;
    }

    JumpKind kind() const { return kind_; }
    double intensity() const { return intensity_; }
    double rate_up() const { return rate_up_; }
    double rate_down() const { return rate_down_; }
    double p_up() const { return p_up_; }
    double gaussian_mean() const { return mean_; }
    double gaussian_stddev() const { return stddev_; }
    const std::vector<PointMass>& points() const { return points_; }

    void validate() const {
        if (!(intensity_ >= 0.0) || !std::isfinite(intensity_))
            throw parameter_error("JumpLaw: intensity must be finite and >= 0");
        if (kind_ == JumpKind::none) {
            if (intensity_ != 0.0) throw parameter_error("JumpLaw: intensity must be 0 for kind none");
            return;
        }
        if (intensity_ <= 0.0) throw parameter_error("JumpLaw: intensity must be > 0 unless kind is none");
        switch (kind_) {
            case JumpKind::two_sided_exponential:
                if (!(rate_up_ > 0.0) || !(rate_down_ > 0.0))
                    throw parameter_error("JumpLaw: exponential rates must be > 0");
                if (!(p_up_ >= 0.0 && p_up_ <= 1.0))
                    throw parameter_error("JumpLaw: p_up must lie in [0,1]");
                break;
            case JumpKind::gaussian:
                if (!(stddev_ > 0.0)) throw parameter_error("JumpLaw: gaussian std must be > 0");
                break;
            case JumpKind::point_masses: {
                if (points_.empty()) throw parameter_error("JumpLaw: point_masses needs at least one atom");
                double total = 0.0;
                for (const auto& p : points_) {
                    if (!(p.weight >= 0.0)) throw parameter_error("JumpLaw: point mass weights must be >= 0");
                    if (!std::isfinite(p.location)) throw parameter_error("JumpLaw: point mass location must be finite");
                    total += p.weight;
                }
                if (std::abs(total - 1.0) > 1e-9)
                    throw parameter_error("JumpLaw: point mass weights must sum to 1, got " + std::to_string(total));
                break;
            }
            default:
                break;
        }
    }

    // sup{theta : E e^{theta J} < infinity}
    double theta_star() const {
        if (kind_ == JumpKind::two_sided_exponential) return rate_up_;
        return std::numeric_limits<double>::infinity();
    }

    // M(theta) = E e^{theta J}; requires theta < theta_star().
    double mgf(double theta) const {
        switch (kind_) {
            case JumpKind::none:
                return 1.0;
            case JumpKind::two_sided_exponential:
                if (theta >= rate_up_ || theta <= -rate_down_)
                    throw domain_error("JumpLaw::mgf: theta outside (-rate_down, rate_up)");
                return p_up_ * rate_up_ / (rate_up_ - theta) +
                       (1.0 - p_up_) * rate_down_ / (rate_down_ + theta);
            case JumpKind::gaussian:
                return std::exp(mean_ * theta + 0.5 * stddev_ * stddev_ * theta * theta);
            case JumpKind::point_masses: {
                double m = 0.0;
                for (const auto& p : points_) m += p.weight * std::exp(theta * p.location);
                return m;
            }
        }
        return 1.0;
    }

    double mean() const {
        switch (kind_) {
            case JumpKind::none:
                return 0.0;
            case JumpKind::two_sided_exponential:
                return p_up_ / rate_up_ - (1.0 - p_up_) / rate_down_;
            case JumpKind::gaussian:
                return mean_;
            case JumpKind::point_masses: {
                double m = 0.0;
                for (const auto& p : points_) m += p.weight * p.location;
                return m;
            }
        }
        return 0.0;
    }

    double second_moment() const {
        switch (kind_) {
            case JumpKind::none:
                return 0.0;
            case JumpKind::two_sided_exponential:
                return 2.0 * p_up_ / (rate_up_ * rate_up_) +
                       2.0 * (1.0 - p_up_) / (rate_down_ * rate_down_);
            case JumpKind::gaussian:
                return mean_ * mean_ + stddev_ * stddev_;
            case JumpKind::point_masses: {
                double m = 0.0;
                for (const auto& p : points_) m += p.weight * p.location * p.location;
                return m;
            }
        }
        return 0.0;
    }

    bool has_density() const {
        return kind_ == JumpKind::two_sided_exponential || kind_ == JumpKind::gaussian;
    }

    double density(double x) const {
        switch (kind_) {
            case JumpKind::two_sided_exponential:
                if (x >= 0.0) return p_up_ * rate_up_ * std::exp(-rate_up_ * x);
                return (1.0 - p_up_) * rate_down_ * std::exp(rate_down_ * x);
            case JumpKind::gaussian: {
                const double z = (x - mean_) / stddev_;
                return std::exp(-0.5 * z * z) / (stddev_ * 2.5066282746310005024);
            }
            default:
                throw parameter_error("JumpLaw::density: law has no density");
        }
    }

    double sample(RngStream& rng) const {
        switch (kind_) {
            case JumpKind::none:
                throw parameter_error("JumpLaw::sample: kind none has no jumps");
            case JumpKind::two_sided_exponential: {
                const double u = rng.u01();
                if (u < p_up_) return rng.exponential(rate_up_);
                return -rng.exponential(rate_down_);
            }
            case JumpKind::gaussian:
                return mean_ + stddev_ * rng.gaussian();
            case JumpKind::point_masses: {
                const double u = rng.u01();
                double acc = 0.0;
                for (const auto& p : points_) {
                    acc += p.weight;
                    if (u < acc) return p.location;
                }
                return points_.back().location;
            }
        }
        return 0.0;
    }

    // Law of jumps under the Esscher change of measure: density tilted by
    // e^{theta x} / M(theta), intensity multiplied by M(theta).
    JumpLaw esscher_tilt(double theta) const {
        switch (kind_) {
            case JumpKind::none:
                return none();
            case JumpKind::two_sided_exponential: {
                if (theta >= rate_up_)
                    throw domain_error("JumpLaw::esscher_tilt: theta >= rate_up");
                const double up_mass = p_up_ * rate_up_ / (rate_up_ - theta);
                const double down_mass = (1.0 - p_up_) * rate_down_ / (rate_down_ + theta);
                const double m = up_mass + down_mass;
                return two_sided_exponential(rate_up_ - theta, rate_down_ + theta, up_mass / m,
                                             intensity_ * m);
            }
            case JumpKind::gaussian: {
                const double m = mgf(theta);
                return gaussian(mean_ + theta * stddev_ * stddev_, stddev_, intensity_ * m);
            }
            case JumpKind::point_masses: {
                const double m = mgf(theta);
                std::vector<PointMass> tilted = points_;
                for (auto& p : tilted) p.weight = p.weight * std::exp(theta * p.location) / m;
                return point_masses(std::move(tilted), intensity_ * m);
            }
        }
        return none();
    }

    bool symmetric(double tol = 1e-12) const {
        switch (kind_) {
            case JumpKind::none:
                return true;
            case JumpKind::two_sided_exponential:
                return std::abs(rate_up_ - rate_down_) <= tol * std::max(rate_up_, rate_down_) &&
                       std::abs(p_up_ - 0.5) <= tol;
            case JumpKind::gaussian:
                return std::abs(mean_) <= tol;
            case JumpKind::point_masses: {
                for (const auto& p : points_) {
                    double mirrored = 0.0;
                    for (const auto& q : points_)
                        if (std::abs(q.location + p.location) <= tol * (1.0 + std::abs(p.location)))
                            mirrored += q.weight;
                    double same = 0.0;
                    for (const auto& q : points_)
                        if (std::abs(q.location - p.location) <= tol * (1.0 + std::abs(p.location)))
                            same += q.weight;
                    if (std::abs(mirrored - same) > 1e-9) return false;
                }
                return true;
            }
        }
        return false;
    }

private:
    JumpKind kind_;
    double intensity_;
    double rate_up_ = 0.0;
    double rate_down_ = 0.0;
    double p_up_ = 0.5;
    double mean_ = 0.0;
    double stddev_ = 0.0;
    std::vector<PointMass> points_;
};

// Levy triplet (b, sigma, jumps) for Z_t = b t + sigma B_t + compound Poisson.
// sigma must be strictly positive (keeps the process non-lattice).
struct LevyTriplet {
    double drift = 0.0;
    double diffusion = 1.0;
    JumpLaw jumps;

    void validate() const {
        if (!std::isfinite(drift)) throw parameter_error("LevyTriplet: drift must be finite");
        if (!(diffusion > 0.0)) throw parameter_error("LevyTriplet: diffusion must be > 0");
        jumps.validate();
    }

    // E[Z_1] = b + lambda E[J]
    double mean_rate() const { return drift + jumps.intensity() * jumps.mean(); }

    // Var[Z_1] = sigma^2 + lambda E[J^2]
    double variance_rate() const {
        return diffusion * diffusion + jumps.intensity() * jumps.second_moment();
    }

    static LevyTriplet brownian(double sigma = 1.0, double drift = 0.0) {
        return LevyTriplet{drift, sigma, JumpLaw::none()};
    }
};

}  // namespace qsdwave
