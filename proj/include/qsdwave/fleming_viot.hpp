#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "qsdwave/errors.hpp"
#include "qsdwave/jump_law.hpp"
#include "qsdwave/rng.hpp"
#include "qsdwave/snapshot.hpp"
#include "qsdwave/stats.hpp"
#include "qsdwave/stochastic_kernels.hpp"

namespace qsdwave {

// N particles driven by the drifted process Z^c absorbed at 0; an absorbed
// particle instantly adopts the position of a uniformly chosen survivor.
struct ParticleEnsemble {
    std::vector<double> positions;
    double t = 0.0;
    std::uint64_t resample_count = 0;

    std::size_t size() const { return positions.size(); }
};

struct FvConfig {
    LevyTriplet triplet = LevyTriplet::brownian();
    double c = 1.0;               // drift toward the origin
    std::size_t n_particles = 2;
    double dt = 1e-3;
    double horizon = 1.0;         // T; T = 0 emits the initial snapshot only
    bool bridge_correction = true;
    std::uint64_t seed = 1;
    std::uint64_t stream_id = 0;
    std::size_t snapshot_every = 100;  // steps between snapshots
    bool record_positions = true;

    void validate() const {
        triplet.validate();
        if (!(c > 0.0)) throw parameter_error("FvConfig: c must be > 0");
        if (n_particles < 2) throw parameter_error("FvConfig: need at least two particles");
        if (!(dt > 0.0)) throw parameter_error("FvConfig: dt must be > 0");
        if (!(horizon >= 0.0)) throw parameter_error("FvConfig: horizon must be >= 0");
        if (snapshot_every == 0) throw parameter_error("FvConfig: snapshot_every must be >= 1");
    }
};

// One Euler step of every particle plus sequential relocation of the absorbed
// ones. A particle is absorbed when its endpoint is <= 0, or (with the bridge
// correction, exact for the Brownian part and ignoring intra-step jumps) with
// probability exp(-2 x0 x1 / (sigma^2 dt)). Absorbed particles relocate in
// ascending index order onto a uniformly chosen currently-alive particle;
// already-relocated particles rejoin the alive pool.
inline void fv_step(ParticleEnsemble& ens, const FvConfig& cfg, RngStream& rng) {
    const std::size_t n = ens.positions.size();
    std::vector<char> alive(n, 1);
    std::vector<std::size_t> absorbed;
    for (std::size_t i = 0; i < n; ++i) {
        const double x0 = ens.positions[i];
        const double x1 = x0 + levy_increment(rng, cfg.triplet, cfg.c, cfg.dt);
        bool hit = x1 <= 0.0;
        if (!hit && cfg.bridge_correction) {
            const double p = bridge_hit_probability(x0, x1, cfg.dt, cfg.triplet.diffusion);
            if (p > 0.0 && rng.u01() < p) hit = true;
        }
        ens.positions[i] = x1;
        if (hit) {
            alive[i] = 0;
            absorbed.push_back(i);
        }
    }
    if (!absorbed.empty()) {
        std::vector<std::size_t> alive_list;
        alive_list.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            if (alive[i]) alive_list.push_back(i);
        if (alive_list.empty()) {
            std::ostringstream msg;
            msg << "fv_step: all " << n << " particles absorbed in one step at t = " << ens.t
                << "; the process is not defined past total extinction";
            throw extinction_error(msg.str());
        }
        for (std::size_t idx : absorbed) {
            const std::size_t k = rng.uniform_index(alive_list.size());
            ens.positions[idx] = ens.positions[alive_list[k]];
            alive[idx] = 1;
            alive_list.push_back(idx);
            ++ens.resample_count;
        }
    }
    ens.t += cfg.dt;
}

inline SnapshotSeries fv_run(const FvConfig& cfg, std::vector<double> init) {
    cfg.validate();
    if (init.size() != cfg.n_particles)
        throw parameter_error("fv_run: init size != n_particles");
    for (double x : init)
        if (!(x > 0.0)) throw parameter_error("fv_run: initial positions must be > 0");

    ParticleEnsemble ens;
    ens.positions = std::move(init);
    RngStream rng(cfg.seed, cfg.stream_id);

    SnapshotSeries series;
    series.n_particles = cfg.n_particles;
    auto record = [&](const ParticleEnsemble& e) {
        std::vector<double> sorted = e.positions;
        std::sort(sorted.begin(), sorted.end());
        series.snapshots.push_back(
            make_particle_snapshot(e.t, e.resample_count, std::move(sorted), cfg.record_positions));
    };

    record(ens);
    const std::size_t steps = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.dt));
    for (std::size_t k = 1; k <= steps; ++k) {
        fv_step(ens, cfg, rng);
        if (k % cfg.snapshot_every == 0 || k == steps) record(ens);
    }
    return series;
}

// (resamplings after burn_in) / (N (T - burn_in)), batch-means standard error.
inline EstimateWithCI absorption_rate_estimate(const SnapshotSeries& series, double burn_in,
                                               std::size_t batches = 10) {
    if (series.snapshots.size() < 2)
        throw parameter_error("absorption_rate_estimate: need at least two snapshots");
    const double t_end = series.snapshots.back().t;
    if (!(burn_in < t_end))
        throw parameter_error("absorption_rate_estimate: empty post-burn-in window");
    std::size_t first = 0;
    while (first < series.snapshots.size() && series.snapshots[first].t < burn_in) ++first;
    if (first >= series.snapshots.size() - 1)
        throw parameter_error("absorption_rate_estimate: empty post-burn-in window");

    const double n = static_cast<double>(series.n_particles);
    const auto& s0 = series.snapshots[first];
    const auto& s1 = series.snapshots.back();
    const double window = s1.t - s0.t;
    if (!(window > 0.0))
        throw parameter_error("absorption_rate_estimate: empty post-burn-in window");
    const double total = static_cast<double>(s1.events - s0.events);
    EstimateWithCI est;
    est.value = total / (n * window);

    // batch means over the snapshot sequence
    const std::size_t m = series.snapshots.size() - first;
    const std::size_t usable = std::min<std::size_t>(batches, m - 1);
    if (usable >= 2 && total > 0.0) {
        std::vector<double> rates;
        for (std::size_t b = 0; b < usable; ++b) {
            const auto& a = series.snapshots[first + b * (m - 1) / usable];
            const auto& z = series.snapshots[first + (b + 1) * (m - 1) / usable];
            const double dt = z.t - a.t;
            if (dt > 0.0)
                rates.push_back(static_cast<double>(z.events - a.events) / (n * dt));
        }
        if (rates.size() >= 2) {
            double mean = 0.0;
            for (double v : rates) mean += v;
            mean /= static_cast<double>(rates.size());
            double var = 0.0;
            for (double v : rates) var += (v - mean) * (v - mean);
            var /= static_cast<double>(rates.size() - 1);
            est.std_error = std::sqrt(var / static_cast<double>(rates.size()));
            est.n = rates.size();
            return est;
        }
    }
    est.std_error = 0.0;
    est.n = 1;
    return est;
}

}  // namespace qsdwave
