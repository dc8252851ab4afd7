// Ground-truth estimation for the exit and reach-avoid probabilities:
// Monte-Carlo simulation with exact (Clopper-Pearson) binomial confidence
// intervals, coupled original/frozen trajectory generation for the
// equivalence tests, and a brute-force enumeration oracle for finite-support
// disturbances.
//
// All randomness is SplitMix64 with per-path streams derived from
// (seed, path index), so results are bit-identical across platforms and
// independent of scheduling.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "model.hpp"
#include "rng.hpp"

namespace stochcert {

namespace detail {

// Continued-fraction core of the regularized incomplete beta function
// (modified Lentz iteration).
inline double betacf(double a, double b, double x) {
    const int max_iter = 300;
    const double eps = 3e-14, tiny = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

inline double betai(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                         a * std::log(x) + b * std::log(1.0 - x));
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

// Inverse of betai in x, by bisection (betai is monotone in x).
inline double betainv(double p, double a, double b) {
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 120; ++i) {
        double mid = 0.5 * (lo + hi);
        (betai(a, b, mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

// Exact two-sided binomial confidence interval for k successes in n trials.
inline std::pair<double, double> clopper_pearson(std::uint64_t k, std::uint64_t n,
                                                 double confidence = 0.99) {
    if (n == 0 || k > n) throw std::invalid_argument("invalid binomial counts");
    double tail = 0.5 * (1.0 - confidence);
    double lo = k == 0 ? 0.0
                       : detail::betainv(tail, static_cast<double>(k),
                                         static_cast<double>(n - k + 1));
    double hi = k == n ? 1.0
                       : detail::betainv(1.0 - tail, static_cast<double>(k + 1),
                                         static_cast<double>(n - k));
    return {lo, hi};
}

struct MCResult {
    double estimate = 0.0;
    std::uint64_t n_paths = 0;
    double ci_lo = 0.0;
    double ci_hi = 1.0;
    std::uint64_t seed = 0;
};

struct Trajectory {
    std::vector<std::vector<double>> states;        // length N+1
    std::vector<std::vector<double>> disturbances;  // length N
};

inline std::vector<double> draw_disturbance(SplitMix64& rng, const DisturbanceSpec& d) {
    if (auto* u = std::get_if<UniformBoxDist>(&d)) {
        std::vector<double> t(u->box.dim());
        for (std::size_t i = 0; i < t.size(); ++i)
            t[i] = rng.uniform(u->box.lo[i], u->box.hi[i]);
        return t;
    }
    const auto& f = std::get<FiniteSupportDist>(d);
    double r = rng.uniform01(), acc = 0.0;
    for (const auto& [pt, p] : f.atoms) {
        acc += p;
        if (r < acc) return pt;
    }
    return f.atoms.back().first;
}

namespace detail {

inline void require_initial_membership(const ProblemSpec& problem) {
    if (!problem.safe_set.contains(problem.x0))
        throw std::invalid_argument("x0 lies outside the safe set");
    if (problem.kind == ProblemKind::ReachAvoid && problem.target_set->contains(problem.x0))
        throw std::invalid_argument("x0 lies inside the target set");
}

// Event on one path, consuming disturbances from `rng`. Safety: the state
// leaves X at some step <= N. Reach-avoid: the state hits X_r at some step
// <= N with the whole prefix inside X.
inline bool simulate_one_path(const ProblemSpec& problem, SplitMix64& rng) {
    std::vector<double> x = problem.x0;
    const unsigned N = problem.horizon;
    if (problem.kind == ProblemKind::Safety) {
        for (unsigned k = 1; k <= N; ++k) {
            auto theta = draw_disturbance(rng, problem.system.disturbance);
            x = system_step(problem.system, x, theta);
            if (!problem.safe_set.contains(x)) return true;
        }
        return false;
    }
    for (unsigned k = 0;; ++k) {
        if (problem.target_set->contains(x)) return true;
        if (!problem.safe_set.contains(x)) return false;
        if (k == N) return false;
        auto theta = draw_disturbance(rng, problem.system.disturbance);
        x = system_step(problem.system, x, theta);
    }
}

}  // namespace detail

inline MCResult simulate_event(const ProblemSpec& problem, std::uint64_t n_paths,
                               std::uint64_t seed) {
    if (n_paths == 0) throw std::invalid_argument("n_paths must be >= 1");
    detail::require_initial_membership(problem);
    std::uint64_t hits = 0;
    for (std::uint64_t p = 0; p < n_paths; ++p) {
        SplitMix64 rng = SplitMix64::stream(seed, p);
        if (detail::simulate_one_path(problem, rng)) ++hits;
    }
    MCResult r;
    r.estimate = static_cast<double>(hits) / static_cast<double>(n_paths);
    r.n_paths = n_paths;
    auto [lo, hi] = clopper_pearson(hits, n_paths);
    r.ci_lo = lo;
    r.ci_hi = hi;
    r.seed = seed;
    return r;
}

// One original trajectory and its frozen counterpart driven by the identical
// disturbance sequence.
inline std::pair<Trajectory, Trajectory> simulate_coupled_pair(const ProblemSpec& problem,
                                                               SplitMix64& rng) {
    const unsigned N = problem.horizon;
    Trajectory orig, frozen;
    orig.states.push_back(problem.x0);
    frozen.states.push_back(problem.x0);
    for (unsigned k = 0; k < N; ++k) {
        auto theta = draw_disturbance(rng, problem.system.disturbance);
        orig.disturbances.push_back(theta);
        frozen.disturbances.push_back(theta);
        orig.states.push_back(system_step(problem.system, orig.states.back(), theta));
        frozen.states.push_back(problem.kind == ProblemKind::Safety
                                    ? switched_step_safety(frozen.states.back(), theta, problem)
                                    : switched_step_reach_avoid(frozen.states.back(), theta,
                                                                problem));
    }
    return {std::move(orig), std::move(frozen)};
}

inline std::vector<std::pair<Trajectory, Trajectory>> simulate_switched_coupled(
    const ProblemSpec& problem, std::uint64_t n_paths, std::uint64_t seed) {
    detail::require_initial_membership(problem);
    std::vector<std::pair<Trajectory, Trajectory>> out;
    out.reserve(n_paths);
    for (std::uint64_t p = 0; p < n_paths; ++p) {
        SplitMix64 rng = SplitMix64::stream(seed, p);
        out.push_back(simulate_coupled_pair(problem, rng));
    }
    return out;
}

namespace detail {

inline double exact_exit(const ProblemSpec& problem, const FiniteSupportDist& fs,
                         const std::vector<double>& x, unsigned k) {
    if (!problem.safe_set.contains(x)) return 1.0;
    if (k == 0) return 0.0;
    double acc = 0.0;
    for (const auto& [theta, p] : fs.atoms)
        acc += p * exact_exit(problem, fs, system_step(problem.system, x, theta), k - 1);
    return acc;
}

inline double exact_reach_avoid(const ProblemSpec& problem, const FiniteSupportDist& fs,
                                const std::vector<double>& x, unsigned k) {
    if (problem.target_set->contains(x)) return 1.0;
    if (!problem.safe_set.contains(x)) return 0.0;
    if (k == 0) return 0.0;
    double acc = 0.0;
    for (const auto& [theta, p] : fs.atoms)
        acc += p * exact_reach_avoid(problem, fs, system_step(problem.system, x, theta), k - 1);
    return acc;
}

}  // namespace detail

// Exact event probability by full enumeration of the disturbance tree.
// Requires a finite-support disturbance with s^N at most 1e7.
inline double exact_probability(const ProblemSpec& problem, unsigned N) {
    const auto* fs = std::get_if<FiniteSupportDist>(&problem.system.disturbance);
    if (!fs) throw std::invalid_argument("exact enumeration needs a finite-support disturbance");
    double tree = std::pow(static_cast<double>(fs->atoms.size()), static_cast<double>(N));
    if (tree > 1e7)
        throw std::invalid_argument("enumeration budget exceeded: " +
                                    std::to_string(fs->atoms.size()) + "^" + std::to_string(N) +
                                    " paths");
    detail::require_initial_membership(problem);
    if (problem.kind == ProblemKind::Safety)
        return detail::exact_exit(problem, *fs, problem.x0, N);
    return detail::exact_reach_avoid(problem, *fs, problem.x0, N);
}

inline double exact_probability(const ProblemSpec& problem) {
    return exact_probability(problem, problem.horizon);
}

}  // namespace stochcert
