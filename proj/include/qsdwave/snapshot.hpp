#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "qsdwave/errors.hpp"
#include "qsdwave/grid.hpp"

namespace qsdwave {

// Time-stamped ensemble state. `events` is the cumulative event counter of the
// producing simulator (Fleming-Viot resamplings, branching events). Positions
// are sorted; summary statistics are always present, the full dump only at the
// configured stride.
struct ParticleSnapshot {
    double t = 0.0;
    std::uint64_t events = 0;
    std::size_t n = 0;
    double min = 0.0;
    double median = 0.0;
    double max = 0.0;
    std::vector<double> positions;  // sorted; empty when summary-only
};

struct SnapshotSeries {
    std::size_t n_particles = 0;
    std::vector<ParticleSnapshot> snapshots;
};

inline ParticleSnapshot make_particle_snapshot(double t, std::uint64_t events,
                                               std::vector<double> sorted_positions,
                                               bool keep_positions) {
    if (sorted_positions.empty()) throw parameter_error("snapshot: empty ensemble");
    ParticleSnapshot s;
    s.t = t;
    s.events = events;
    s.n = sorted_positions.size();
    s.min = sorted_positions.front();
    s.max = sorted_positions.back();
    const std::size_t m = sorted_positions.size();
    s.median = (m % 2 == 1) ? sorted_positions[m / 2]
                            : 0.5 * (sorted_positions[m / 2 - 1] + sorted_positions[m / 2]);
    if (keep_positions) s.positions = std::move(sorted_positions);
    return s;
}

struct GridSnapshot {
    double t = 0.0;
    std::vector<double> values;
};

struct GridSeries {
    Grid1D grid;
    std::vector<GridSnapshot> snapshots;
};

struct FreeBoundarySnapshot {
    double t = 0.0;
    double gamma = 0.0;  // free boundary position
    std::vector<double> values;
};

// Snapshots of a mass-one free-boundary solve: u vanishes left of gamma and
// integrates to 1 on [gamma, inf).
struct FreeBoundarySeries {
    Grid1D grid;
    std::vector<FreeBoundarySnapshot> snapshots;
};

struct FrontPoint {
    double t = 0.0;
    std::optional<double> x;  // empty when the profile does not cross the level
};

}  // namespace qsdwave
