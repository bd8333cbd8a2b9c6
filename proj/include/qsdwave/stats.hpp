#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "qsdwave/errors.hpp"

namespace qsdwave {

struct EstimateWithCI {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;  // sample or batch count
};

// Right-continuous empirical CDF of a multiset.
class Ecdf {
public:
    explicit Ecdf(std::vector<double> xs) : xs_(std::move(xs)) {
        if (xs_.empty()) throw parameter_error("Ecdf: empty sample");
        std::sort(xs_.begin(), xs_.end());
    }

    double operator()(double x) const {
        const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        return static_cast<double>(it - xs_.begin()) / static_cast<double>(xs_.size());
    }

    const std::vector<double>& points() const { return xs_; }
    std::size_t size() const { return xs_.size(); }

private:
    std::vector<double> xs_;
};

using CdfFn = std::function<double(double)>;

// sup |F - G| over an explicit probe grid.
inline double ks_distance(const CdfFn& F, const CdfFn& G, const std::vector<double>& probe) {
    double d = 0.0;
    for (double x : probe) d = std::max(d, std::abs(F(x) - G(x)));
    return d;
}

// Exact sup distance between an empirical CDF and a (continuous) CDF: both
// sides of every jump are probed.
inline double ks_distance(const Ecdf& F, const CdfFn& G) {
    const auto& xs = F.points();
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double g = G(xs[i]);
        d = std::max(d, std::abs(g - static_cast<double>(i) / n));
        d = std::max(d, std::abs(g - static_cast<double>(i + 1) / n));
    }
    return d;
}

// Exact sup distance between two empirical CDFs (merge scan over all jumps).
inline double ks_distance(const Ecdf& F, const Ecdf& G) {
    const auto& a = F.points();
    const auto& b = G.points();
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        double x;
        if (j >= b.size() || (i < a.size() && a[i] <= b[j]))
            x = a[i++];
        else
            x = b[j++];
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        const double fa = static_cast<double>(i) / static_cast<double>(a.size());
        const double fb = static_cast<double>(j) / static_cast<double>(b.size());
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

// Default probe grid for functor-vs-functor comparisons: uniform span plus any
// step locations the caller wants included.
inline std::vector<double> make_probe_grid(double lo, double hi, std::size_t count = 10000,
                                           const std::vector<double>& extra = {}) {
    if (!(hi > lo)) throw parameter_error("make_probe_grid: hi must exceed lo");
    if (count < 2) throw parameter_error("make_probe_grid: need at least two points");
    std::vector<double> g;
    g.reserve(count + extra.size());
    for (std::size_t i = 0; i < count; ++i)
        g.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    g.insert(g.end(), extra.begin(), extra.end());
    std::sort(g.begin(), g.end());
    return g;
}

namespace detail {

struct OlsFit {
    double slope = 0.0;
    double slope_std_error = 0.0;
};

inline OlsFit ols_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    if (n < 2) throw parameter_error("ols_slope: need at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) throw parameter_error("ols_slope: degenerate abscissae");
    OlsFit fit;
    fit.slope = sxy / sxx;
    if (n > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = ys[i] - my - fit.slope * (xs[i] - mx);
            rss += r * r;
        }
        fit.slope_std_error = std::sqrt(rss / (static_cast<double>(n - 2) * sxx));
    }
    return fit;
}

}  // namespace detail

// Least-squares slope of -log(value) against x over [x1, x2].
inline EstimateWithCI tail_log_slope(const std::vector<double>& xs, const std::vector<double>& values,
                                     double x1, double x2) {
    if (xs.size() != values.size()) throw parameter_error("tail_log_slope: size mismatch");
    std::vector<double> wx, wy;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] < x1 || xs[i] > x2) continue;
        if (!(values[i] > 0.0))
            throw parameter_error("tail_log_slope: non-positive value inside the window");
        wx.push_back(xs[i]);
        wy.push_back(-std::log(values[i]));
    }
    if (wx.size() < 2) throw parameter_error("tail_log_slope: fewer than two points in the window");
    const auto fit = detail::ols_slope(wx, wy);
    return EstimateWithCI{fit.slope, fit.slope_std_error, wx.size()};
}

// Slope of y against t after burn_in: one OLS slope per contiguous batch,
// mean of slopes with the between-batch standard error.
inline EstimateWithCI batch_means_regression(const std::vector<double>& ts,
                                             const std::vector<double>& ys, double burn_in,
                                             std::size_t batches) {
    if (ts.size() != ys.size()) throw parameter_error("batch_means_regression: size mismatch");
    if (batches < 2) throw parameter_error("batch_means_regression: need at least two batches");
    std::vector<double> tt, yy;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts[i] <= burn_in) continue;
        tt.push_back(ts[i]);
        yy.push_back(ys[i]);
    }
    if (tt.size() < 5 * batches)
        throw parameter_error("batch_means_regression: need at least 5 points per batch");
    std::vector<double> slopes;
    const std::size_t m = tt.size();
    for (std::size_t b = 0; b < batches; ++b) {
        const std::size_t lo = b * m / batches;
        const std::size_t hi = (b + 1) * m / batches;
        std::vector<double> bx(tt.begin() + lo, tt.begin() + hi);
        std::vector<double> by(yy.begin() + lo, yy.begin() + hi);
        slopes.push_back(detail::ols_slope(bx, by).slope);
    }
    double mean = 0.0;
    for (double s : slopes) mean += s;
    mean /= static_cast<double>(batches);
    double var = 0.0;
    for (double s : slopes) var += (s - mean) * (s - mean);
    var /= static_cast<double>(batches - 1);
    return EstimateWithCI{mean, std::sqrt(var / static_cast<double>(batches)), batches};
}

}  // namespace qsdwave
