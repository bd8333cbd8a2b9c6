#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "qsdwave/errors.hpp"
#include "qsdwave/jump_law.hpp"
#include "qsdwave/rng.hpp"
#include "qsdwave/snapshot.hpp"
#include "qsdwave/stats.hpp"

namespace qsdwave {

// Plain branching Brownian motion state (population grows).
struct BbmState {
    std::vector<double> positions;
    double t = 0.0;

    std::size_t count() const { return positions.size(); }
};

// Event-driven BBM started from one particle at the origin: branch times are
// Exponential(r N_t), all particles advance by exact Gaussian increments to the
// event, a uniformly chosen particle splits. Binary branching is realized as
// parent-survives-plus-copy, distributionally identical to two-children-parent-dies.
inline BbmState bbm_run(RngStream& rng, double branch_rate, double t_max, double cap = 1e6) {
    if (!(branch_rate >= 0.0)) throw parameter_error("bbm_run: branch rate must be >= 0");
    if (!(t_max >= 0.0)) throw parameter_error("bbm_run: t_max must be >= 0");
    if (!(cap >= 1.0)) throw parameter_error("bbm_run: cap must be >= 1");
    if (std::exp(branch_rate * t_max) > cap)
        throw parameter_error("bbm_run: expected population e^{r t_max} exceeds cap");

    BbmState state;
    state.positions = {0.0};
    auto advance = [&](double delta) {
        if (delta <= 0.0) return;
        const double s = std::sqrt(delta);
        for (double& x : state.positions) x += s * rng.gaussian();
        state.t += delta;
    };
    while (true) {
        if (branch_rate == 0.0) {
            advance(t_max - state.t);
            return state;
        }
        const double wait = rng.exponential(branch_rate * static_cast<double>(state.count()));
        if (state.t + wait >= t_max) {
            advance(t_max - state.t);
            return state;
        }
        advance(wait);
        const std::size_t k = rng.uniform_index(state.count());
        state.positions.push_back(state.positions[k]);
        if (static_cast<double>(state.count()) > cap) {
            std::ostringstream msg;
            msg << "bbm_run: population exceeded cap " << cap << " at t = " << state.t;
            throw numerical_error(msg.str());
        }
    }
}

// Monte Carlo evaluation of v(t,x) = E prod_i v0(xi_t(i) + x) over independent
// BBM runs; the expectation solves the KPP equation with rate r.
inline EstimateWithCI mckean_mc(RngStream& rng, const std::function<double(double)>& v0, double r,
                                double t, double x, std::size_t reps, double cap = 1e6) {
    if (reps < 1) throw parameter_error("mckean_mc: reps must be >= 1");
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
        const BbmState state = bbm_run(rng, r, t, cap);
        double prod = 1.0;
        for (double xi : state.positions) {
            const double v = v0(xi + x);
            if (!(v >= -1e-12 && v <= 1.0 + 1e-12))
                throw parameter_error("mckean_mc: v0 must take values in [0,1]");
            prod *= std::min(1.0, std::max(0.0, v));
        }
        const double delta = prod - mean;
        mean += delta / static_cast<double>(rep + 1);
        m2 += delta * (prod - mean);
    }
    EstimateWithCI est;
    est.value = mean;
    est.n = reps;
    est.std_error = reps > 1 ? std::sqrt(m2 / static_cast<double>(reps - 1) / static_cast<double>(reps)) : 0.0;
    return est;
}

struct SelectionConfig {
    std::size_t n_particles = 2;
    double rate = 1.0;          // branch rate (N-BBM) / birth rate (N-BRW)
    JumpLaw displacement;       // child displacement density for N-BRW
    double snapshot_dt = 0.1;
    double horizon = 1.0;
    std::uint64_t seed = 1;
    std::uint64_t stream_id = 0;
    std::size_t full_dump_every = 10;  // position dumps every k-th snapshot

    void validate(bool needs_displacement) const {
        if (n_particles < 2) throw parameter_error("SelectionConfig: need at least two particles");
        if (!(rate > 0.0)) throw parameter_error("SelectionConfig: rate must be > 0");
        if (!(snapshot_dt > 0.0)) throw parameter_error("SelectionConfig: snapshot_dt must be > 0");
        if (!(horizon >= 0.0)) throw parameter_error("SelectionConfig: horizon must be >= 0");
        if (full_dump_every == 0) throw parameter_error("SelectionConfig: full_dump_every must be >= 1");
        if (needs_displacement) {
            if (displacement.kind() == JumpKind::none)
                throw parameter_error("SelectionConfig: N-BRW needs a displacement law");
            if (!displacement.symmetric(1e-9))
                throw parameter_error("SelectionConfig: displacement must be symmetric");
        }
    }
};

// One N-BBM branching event: a uniform particle duplicates, then the minimum of
// the N+1 positions is deleted (lowest index on ties). Exposed for tests.
inline void apply_branch_event(std::vector<double>& positions, std::size_t parent) {
    positions.push_back(positions[parent]);
    positions.erase(std::min_element(positions.begin(), positions.end()));
}

// One N-BRW birth: child at parent + displacement, then leftmost deletion.
inline void apply_birth_event(std::vector<double>& positions, std::size_t parent,
                              double displacement) {
    positions.push_back(positions[parent] + displacement);
    positions.erase(std::min_element(positions.begin(), positions.end()));
}

namespace detail {

template <typename AdvanceFn, typename EventFn>
inline SnapshotSeries run_selection(const SelectionConfig& cfg, std::vector<double> positions,
                                    RngStream& rng, AdvanceFn&& advance, EventFn&& event) {
    SnapshotSeries series;
    series.n_particles = positions.size();
    std::uint64_t events = 0;
    std::size_t snap_index = 0;
    auto record = [&](double t) {
        std::vector<double> sorted = positions;
        std::sort(sorted.begin(), sorted.end());
        const bool keep = (snap_index % cfg.full_dump_every) == 0;
        series.snapshots.push_back(make_particle_snapshot(t, events, std::move(sorted), keep));
        ++snap_index;
    };

    double t = 0.0;
    record(0.0);
    double next_snap = cfg.snapshot_dt;
    const double total_rate = cfg.rate * static_cast<double>(positions.size());
    while (t < cfg.horizon) {
        const double wait = rng.exponential(total_rate);
        double event_time = t + wait;
        const bool past_horizon = event_time > cfg.horizon;
        if (past_horizon) event_time = cfg.horizon;
        // emit snapshots that fall before the next event
        while (next_snap <= event_time + 1e-15 && next_snap <= cfg.horizon + 1e-15) {
            advance(positions, next_snap - t);
            t = next_snap;
            record(t);
            next_snap += cfg.snapshot_dt;
        }
        advance(positions, event_time - t);
        t = event_time;
        if (past_horizon) break;
        event(positions);
        ++events;
    }
    if (series.snapshots.back().t < cfg.horizon - 1e-12) {
        record(cfg.horizon);
    }
    return series;
}

}  // namespace detail

// N-BBM: branch at total rate r N; between events all particles advance by
// exact Gaussian increments; each branch duplicates a uniform particle and
// deletes the current leftmost.
inline SnapshotSeries nbbm_run(const SelectionConfig& cfg, std::vector<double> init) {
    cfg.validate(false);
    if (init.size() != cfg.n_particles) throw parameter_error("nbbm_run: init size != N");
    RngStream rng(cfg.seed, cfg.stream_id);
    auto advance = [&](std::vector<double>& xs, double delta) {
        if (delta <= 0.0) return;
        const double s = std::sqrt(delta);
        for (double& x : xs) x += s * rng.gaussian();
    };
    auto event = [&](std::vector<double>& xs) {
        apply_branch_event(xs, rng.uniform_index(xs.size()));
    };
    return detail::run_selection(cfg, std::move(init), rng, advance, event);
}

// N-BRW (Durrett-Remenik dynamics): particles are static between events; each
// birth (total rate N) adds a child displaced by the symmetric density and
// deletes the leftmost of the N+1.
inline SnapshotSeries nbrw_run(const SelectionConfig& cfg, std::vector<double> init) {
    cfg.validate(true);
    if (init.size() != cfg.n_particles) throw parameter_error("nbrw_run: init size != N");
    RngStream rng(cfg.seed, cfg.stream_id);
    auto advance = [](std::vector<double>&, double) {};
    auto event = [&](std::vector<double>& xs) {
        const std::size_t parent = rng.uniform_index(xs.size());
        apply_birth_event(xs, parent, cfg.displacement.sample(rng));
    };
    return detail::run_selection(cfg, std::move(init), rng, advance, event);
}

enum class FrontStatistic { min, median, max };

// Least-squares slope of the chosen order statistic against time after burn_in,
// with a batch-means standard error.
inline EstimateWithCI front_velocity(const SnapshotSeries& series, double burn_in,
                                     FrontStatistic statistic = FrontStatistic::median,
                                     std::size_t batches = 10) {
    std::vector<double> ts, ys;
    for (const auto& s : series.snapshots) {
        if (s.t <= burn_in) continue;
        ts.push_back(s.t);
        switch (statistic) {
            case FrontStatistic::min: ys.push_back(s.min); break;
            case FrontStatistic::median: ys.push_back(s.median); break;
            case FrontStatistic::max: ys.push_back(s.max); break;
        }
    }
    if (ts.size() < 10)
        throw parameter_error("front_velocity: fewer than 10 post-burn-in snapshots");
    const std::size_t b = std::max<std::size_t>(2, std::min(batches, ts.size() / 5));
    return batch_means_regression(ts, ys, burn_in, b);
}

// Minimal front speed of the branching system with displacement density rho and
// the given birth rate: inf_{theta>0} rate * M_rho(theta) / theta, the speed at
// which the linearized growth-and-displacement dynamics spread. Golden-section
// on the unimodal objective.
inline double branching_min_speed(const JumpLaw& displacement, double birth_rate = 1.0) {
    if (displacement.kind() == JumpKind::none)
        throw parameter_error("branching_min_speed: displacement law required");
    if (!(birth_rate > 0.0)) throw parameter_error("branching_min_speed: rate must be > 0");
    const double theta_star = displacement.theta_star();
    auto objective = [&](double theta) {
        if (theta >= theta_star) return std::numeric_limits<double>::infinity();
        return birth_rate * displacement.mgf(theta) / theta;
    };
    double a = 1e-9;
    double b;
    if (std::isfinite(theta_star)) {
        b = theta_star;
    } else {
        b = 1.0;
        while (b < 1e6 && objective(2.0 * b) <= objective(b)) b *= 2.0;
        b *= 2.0;
    }
    const double invphi = 0.6180339887498948482;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = objective(x1);
    double f2 = objective(x2);
    for (int it = 0; it < 300; ++it) {
        if (f1 <= f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = objective(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = objective(x2);
        }
        if ((b - a) <= 1e-12 * std::max(1.0, 0.5 * (a + b))) break;
    }
    return objective(0.5 * (a + b));
}

}  // namespace qsdwave
