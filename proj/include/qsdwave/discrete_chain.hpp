#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "qsdwave/errors.hpp"

namespace qsdwave {

// Finite-state oracle for QSD theory: substochastic transition matrix on the
// transient states (absorption is the missing row mass), conditioned evolution,
// Yaglom limit by iteration, and the (R, nu, beta) eigentriple.
//
// This module covers the R-positive case only: a finite irreducible transient
// class always is. The untruncated constant-drift birth-death chain is not
// R-positive; truncation (as built here) removes that phenomenon.
class SubstochasticMatrix {
public:
    SubstochasticMatrix(std::size_t n, std::vector<double> entries)
        : n_(n), a_(std::move(entries)) {
        if (n_ == 0) throw parameter_error("SubstochasticMatrix: empty matrix");
        if (a_.size() != n_ * n_) throw parameter_error("SubstochasticMatrix: entry count != n*n");
        bool some_loss = false;
        for (std::size_t i = 0; i < n_; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < n_; ++j) {
                if (!(a_[i * n_ + j] >= 0.0))
                    throw parameter_error("SubstochasticMatrix: entries must be >= 0");
                row += a_[i * n_ + j];
            }
            if (row > 1.0 + 1e-12) throw parameter_error("SubstochasticMatrix: row sum exceeds 1");
            if (row < 1.0 - 1e-12) some_loss = true;
        }
        if (!some_loss)
            throw parameter_error("SubstochasticMatrix: at least one row must lose mass (absorption)");
    }

    // Truncated birth-death chain on states {1,...,L} (index 0 = state 1):
    // up p_up, down p_down, hold 1-p_up-p_down (> 0 keeps the chain aperiodic),
    // absorption at 0 from state 1, reflecting hold at the truncation level L.
    static SubstochasticMatrix birth_death(double p_up, double p_down, std::size_t L) {
        if (L == 0) throw parameter_error("birth_death: need at least one state");
        if (!(p_up > 0.0) || !(p_down > 0.0))
            throw parameter_error("birth_death: p_up and p_down must be > 0");
        if (!(p_up + p_down < 1.0))
            throw parameter_error("birth_death: p_up + p_down must be < 1 (hold probability > 0)");
        std::vector<double> a(L * L, 0.0);
        const double hold = 1.0 - p_up - p_down;
        for (std::size_t i = 0; i < L; ++i) {
            a[i * L + i] = hold;
            if (i + 1 < L)
                a[i * L + i + 1] = p_up;
            else
                a[i * L + i] += p_up;  // reflect at the truncation level
            if (i > 0) a[i * L + i - 1] = p_down;
            // i == 0: p_down goes to the absorbing state (row mass < 1)
        }
        return SubstochasticMatrix(L, std::move(a));
    }

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

    // v <- v p (row vector times matrix)
    std::vector<double> left_apply(const std::vector<double>& v) const {
        std::vector<double> out(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            const double vi = v[i];
            if (vi == 0.0) continue;
            for (std::size_t j = 0; j < n_; ++j) out[j] += vi * a_[i * n_ + j];
        }
        return out;
    }

    // v <- p v (matrix times column vector)
    std::vector<double> right_apply(const std::vector<double>& v) const {
        std::vector<double> out(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n_; ++j) acc += a_[i * n_ + j] * v[j];
            out[i] = acc;
        }
        return out;
    }

    // Strong connectivity of the transient class over the nonzero pattern.
    bool irreducible() const {
        return reaches_all(false) && reaches_all(true);
    }

private:
    bool reaches_all(bool transpose) const {
        std::vector<char> seen(n_, 0);
        std::vector<std::size_t> stack{0};
        seen[0] = 1;
        std::size_t count = 1;
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            for (std::size_t j = 0; j < n_; ++j) {
                const double e = transpose ? a_[j * n_ + i] : a_[i * n_ + j];
                if (e > 0.0 && !seen[j]) {
                    seen[j] = 1;
                    ++count;
                    stack.push_back(j);
                }
            }
        }
        return count == n_;
    }

    std::size_t n_;
    std::vector<double> a_;
};

struct Eigentriple {
    double R = 1.0;                 // 1 / spectral radius, > 1
    std::vector<double> nu;        // left eigenvector, normalized to probability
    std::vector<double> beta;      // right eigenvector, sum nu(k) beta(k) = 1
    std::size_t iterations = 0;
    double residual = 0.0;         // attained max-norm eigen-residual
};

inline double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return 0.5 * s;
}

// mu0 p^steps, renormalized to a probability vector.
inline std::vector<double> conditioned_evolution(const SubstochasticMatrix& p,
                                                 std::vector<double> mu, std::size_t steps) {
    if (mu.size() != p.size()) throw parameter_error("conditioned_evolution: size mismatch");
    double total = 0.0;
    for (double v : mu) {
        if (!(v >= 0.0)) throw parameter_error("conditioned_evolution: mu0 must be >= 0");
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw parameter_error("conditioned_evolution: mu0 must sum to 1");
    for (std::size_t k = 0; k < steps; ++k) {
        mu = p.left_apply(mu);
        double mass = 0.0;
        for (double v : mu) mass += v;
        if (!(mass > 0.0)) {
            std::ostringstream msg;
            msg << "conditioned_evolution: mass extinct at step " << (k + 1);
            throw extinction_error(msg.str());
        }
        for (double& v : mu) v /= mass;
    }
    return mu;
}

namespace detail {

// Power iteration on the shifted matrix p + s I (same eigenvectors, eigenvalues
// shifted by s), which converges for periodic patterns too. Returns the
// dominant eigenvector of p with its eigenvalue.
template <typename Apply>
inline std::pair<std::vector<double>, double> power_iterate(std::size_t n, Apply&& apply,
                                                            double tol, std::size_t max_iter,
                                                            std::size_t& iterations,
                                                            double& attained) {
    const double s = 0.5;
    std::vector<double> x(n, 1.0 / static_cast<double>(n));
    double lambda = 0.0;
    attained = 1.0;
    for (iterations = 0; iterations < max_iter; ++iterations) {
        std::vector<double> y = apply(x);
        for (std::size_t i = 0; i < n; ++i) y[i] += s * x[i];
        double norm = 0.0;
        for (double v : y) norm += v;
        if (!(norm > 0.0)) throw numerical_error("eigentriple: iterate collapsed to zero");
        double res = 0.0;
        for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(y[i] - norm * x[i]));
        for (double& v : y) v /= norm;
        lambda = norm;
        attained = res / norm;
        x.swap(y);
        if (attained < tol) return {x, lambda - s};
    }
    std::ostringstream msg;
    msg << "eigentriple: power iteration did not converge in " << max_iter
        << " iterations; attained residual " << attained;
    throw numerical_error(msg.str());
}

}  // namespace detail

inline Eigentriple eigentriple(const SubstochasticMatrix& p, double tol = 1e-13,
                               std::size_t max_iter = 2000000) {
    if (!p.irreducible())
        throw parameter_error("eigentriple: structure error, transient class is reducible");
    Eigentriple e;
    std::size_t it_l = 0, it_r = 0;
    double res_l = 0.0, res_r = 0.0;
    auto [nu, rho_l] = detail::power_iterate(
        p.size(), [&](const std::vector<double>& v) { return p.left_apply(v); }, tol, max_iter,
        it_l, res_l);
    auto [beta, rho_r] = detail::power_iterate(
        p.size(), [&](const std::vector<double>& v) { return p.right_apply(v); }, tol, max_iter,
        it_r, res_r);
    if (std::abs(rho_l - rho_r) > 1e-10)
        throw numerical_error("eigentriple: left/right spectral radii disagree");
    const double rho = 0.5 * (rho_l + rho_r);
    if (!(rho > 0.0 && rho < 1.0))
        throw numerical_error("eigentriple: spectral radius outside (0,1)");
    e.R = 1.0 / rho;
    e.nu = std::move(nu);
    e.beta = std::move(beta);
    double cross = 0.0;
    for (std::size_t i = 0; i < e.nu.size(); ++i) cross += e.nu[i] * e.beta[i];
    for (double& b : e.beta) b /= cross;
    e.iterations = it_l + it_r;
    e.residual = std::max(res_l, res_r);
    return e;
}

struct YaglomLimit {
    std::vector<double> distribution;
    double survival_factor = 0.0;  // per-step conditional survival, -> 1/R
    std::size_t steps = 0;
};

// Iterate the conditioned evolution from delta_{start} until the successive
// total-variation change drops below tol.
inline YaglomLimit yaglom_limit(const SubstochasticMatrix& p, std::size_t start, double tol,
                                std::size_t max_iter = 10000000) {
    if (start >= p.size()) throw parameter_error("yaglom_limit: start state out of range");
    if (!(tol > 0.0)) throw parameter_error("yaglom_limit: tol must be > 0");
    std::vector<double> mu(p.size(), 0.0);
    mu[start] = 1.0;
    YaglomLimit out;
    for (std::size_t k = 0; k < max_iter; ++k) {
        std::vector<double> next = p.left_apply(mu);
        double mass = 0.0;
        for (double v : next) mass += v;
        if (!(mass > 0.0)) {
            std::ostringstream msg;
            msg << "yaglom_limit: mass extinct at step " << (k + 1);
            throw extinction_error(msg.str());
        }
        for (double& v : next) v /= mass;
        const double tv = total_variation(next, mu);
        mu.swap(next);
        out.survival_factor = mass;
        out.steps = k + 1;
        if (tv < tol) {
            out.distribution = std::move(mu);
            return out;
        }
    }
    throw numerical_error("yaglom_limit: did not converge within max_iter");
}

}  // namespace qsdwave
