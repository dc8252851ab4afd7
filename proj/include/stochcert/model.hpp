// Problem and system representation: polynomial dynamics with bounded random
// disturbances, semialgebraic sets, the one-step expectation operator, a
// one-step reachable-set enclosure, and the frozen (switched) step functions
// used to reduce "ever entered by time N" events to "is in at time N" events.
//
// Everything here is immutable after validation; step functions and the
// expectation operator are pure.

#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bernstein.hpp"
#include "polynomial.hpp"
#include "rng.hpp"

namespace stochcert {

enum class Relation { LeZero, GeZero };

struct Conjunct {
    Polynomial poly;
    Relation rel = Relation::LeZero;

    bool holds(std::span<const double> x) const {
        double v = poly.eval(x);
        return rel == Relation::LeZero ? v <= 0.0 : v >= 0.0;
    }
};

// Conjunction of closed polynomial inequalities. An empty conjunct list is
// the whole space.
struct SemialgebraicSet {
    std::vector<Conjunct> conjuncts;

    bool contains(std::span<const double> x) const {
        for (const auto& c : conjuncts)
            if (!c.holds(x)) return false;
        return true;
    }
};

struct UniformBoxDist {
    Box box;
};

struct FiniteSupportDist {
    std::vector<std::pair<std::vector<double>, double>> atoms;  // (point, probability)
};

using DisturbanceSpec = std::variant<UniformBoxDist, FiniteSupportDist>;

inline std::size_t disturbance_dim(const DisturbanceSpec& d) {
    if (auto* u = std::get_if<UniformBoxDist>(&d)) return u->box.dim();
    const auto& f = std::get<FiniteSupportDist>(d);
    return f.atoms.empty() ? 0 : f.atoms.front().first.size();
}

inline void validate_disturbance(const DisturbanceSpec& d) {
    if (auto* u = std::get_if<UniformBoxDist>(&d)) {
        if (u->box.lo.size() != u->box.hi.size())
            throw std::invalid_argument("disturbance box lo/hi arity mismatch");
        for (std::size_t i = 0; i < u->box.dim(); ++i)
            if (!(u->box.lo[i] <= u->box.hi[i]))
                throw std::invalid_argument("disturbance box is empty in dimension " +
                                            std::to_string(i));
        return;
    }
    const auto& f = std::get<FiniteSupportDist>(d);
    if (f.atoms.empty()) throw std::invalid_argument("finite disturbance has no atoms");
    double total = 0.0;
    std::size_t dim = f.atoms.front().first.size();
    for (const auto& [pt, p] : f.atoms) {
        if (pt.size() != dim)
            throw std::invalid_argument("finite disturbance atoms have mixed arity");
        if (p < 0.0) throw std::invalid_argument("negative disturbance probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("finite disturbance probabilities sum to " +
                                    std::to_string(total) + ", expected 1");
}

// Smallest box containing the support of the disturbance.
inline Box disturbance_box(const DisturbanceSpec& d) {
    if (auto* u = std::get_if<UniformBoxDist>(&d)) return u->box;
    const auto& f = std::get<FiniteSupportDist>(d);
    Box b{f.atoms.front().first, f.atoms.front().first};
    for (const auto& [pt, p] : f.atoms)
        for (std::size_t i = 0; i < pt.size(); ++i) {
            b.lo[i] = std::min(b.lo[i], pt[i]);
            b.hi[i] = std::max(b.hi[i], pt[i]);
        }
    return b;
}

struct SystemSpec {
    std::vector<std::string> state_vars;
    std::vector<std::string> disturbance_vars;
    std::vector<Polynomial> dynamics;  // per state variable, over state + disturbance vars
    DisturbanceSpec disturbance;

    std::vector<std::string> all_vars() const {
        auto v = state_vars;
        v.insert(v.end(), disturbance_vars.begin(), disturbance_vars.end());
        return v;
    }
};

inline void validate_system(SystemSpec& sys) {
    if (sys.dynamics.size() != sys.state_vars.size())
        throw std::invalid_argument("dynamics arity (" + std::to_string(sys.dynamics.size()) +
                                    ") does not match state dimension (" +
                                    std::to_string(sys.state_vars.size()) + ")");
    for (const auto& sv : sys.state_vars)
        for (const auto& dv : sys.disturbance_vars)
            if (sv == dv)
                throw std::invalid_argument("variable '" + sv +
                                            "' declared as both state and disturbance");
    validate_disturbance(sys.disturbance);
    if (disturbance_dim(sys.disturbance) != sys.disturbance_vars.size())
        throw std::invalid_argument("disturbance dimension does not match variable list");
    // Canonical variable order (state then disturbance) for every component.
    auto full = sys.all_vars();
    for (auto& f : sys.dynamics) f = f.reindexed(full);
}

enum class ProblemKind { Safety, ReachAvoid };

struct ProblemSpec {
    SystemSpec system;
    ProblemKind kind = ProblemKind::Safety;
    SemialgebraicSet safe_set;
    std::optional<SemialgebraicSet> target_set;
    SemialgebraicSet extended_set;
    Box extended_box;
    std::vector<double> x0;
    unsigned horizon = 0;

    // Filled by validate_problem: outer boxes of the safe/target sets inside
    // the extended box.
    Box safe_box;
    Box target_box;
};

// True step of the original system: x' = f(x, theta).
inline std::vector<double> system_step(const SystemSpec& sys, std::span<const double> x,
                                       std::span<const double> theta) {
    std::vector<double> point(x.begin(), x.end());
    point.insert(point.end(), theta.begin(), theta.end());
    std::vector<double> out(sys.state_vars.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = sys.dynamics[i].eval(point);
    return out;
}

// Safety variant: dynamics are frozen once the state has left the safe set.
inline std::vector<double> switched_step_safety(std::span<const double> x,
                                                std::span<const double> theta,
                                                const ProblemSpec& spec) {
    if (!spec.safe_set.contains(x)) return {x.begin(), x.end()};
    return system_step(spec.system, x, theta);
}

// Reach-avoid variant: frozen on the target set and outside the safe set.
inline std::vector<double> switched_step_reach_avoid(std::span<const double> x,
                                                     std::span<const double> theta,
                                                     const ProblemSpec& spec) {
    if (spec.target_set->contains(x)) return {x.begin(), x.end()};
    if (!spec.safe_set.contains(x)) return {x.begin(), x.end()};
    return system_step(spec.system, x, theta);
}

// E[v(f(x, theta))] as a polynomial in the state variables: compose v with the
// dynamics, then integrate out the disturbance monomials exactly.
inline Polynomial one_step_expectation(const Polynomial& v, const SystemSpec& sys) {
    for (std::size_t i = 0; i < v.vars.size(); ++i)
        for (const auto& dv : sys.disturbance_vars)
            if (v.vars[i] == dv)
                for (const auto& [e, c] : v.terms)
                    if (e[i] > 0)
                        throw std::invalid_argument(
                            "certificate polynomial mentions disturbance variable '" + dv + "'");

    std::map<std::string, Polynomial> sub;
    auto full = sys.all_vars();
    for (std::size_t i = 0; i < sys.state_vars.size(); ++i)
        sub.emplace(sys.state_vars[i], sys.dynamics[i]);
    Polynomial comp = compose(v.reindexed(sys.state_vars), sub).reindexed(full);

    const std::size_t ns = sys.state_vars.size();
    const std::size_t nd = sys.disturbance_vars.size();

    // Joint disturbance moment E[theta^k] for an exponent vector k.
    auto moment = [&](std::span<const unsigned> k) -> double {
        if (auto* u = std::get_if<UniformBoxDist>(&sys.disturbance)) {
            double m = 1.0;
            for (std::size_t i = 0; i < nd; ++i) {
                if (k[i] == 0) continue;
                double a = u->box.lo[i], b = u->box.hi[i];
                if (a == b) {
                    m *= Polynomial::ipow(a, k[i]);
                } else {
                    unsigned e = k[i] + 1;
                    m *= (Polynomial::ipow(b, e) - Polynomial::ipow(a, e)) / (e * (b - a));
                }
            }
            return m;
        }
        const auto& f = std::get<FiniteSupportDist>(sys.disturbance);
        double m = 0.0;
        for (const auto& [pt, p] : f.atoms) {
            double t = p;
            for (std::size_t i = 0; i < nd; ++i) t *= Polynomial::ipow(pt[i], k[i]);
            m += t;
        }
        return m;
    };

    Polynomial out(sys.state_vars);
    for (const auto& [e, c] : comp.terms) {
        Exponents state_part(e.begin(), e.begin() + ns);
        std::span<const unsigned> dist_part(e.data() + ns, nd);
        out.terms[state_part] += c * moment(dist_part);
    }
    out.normalize();
    return out;
}

inline bool set_contains(const SemialgebraicSet& s, std::span<const double> x) {
    return s.contains(x);
}

// Box containing {f(x, theta) | x in X_box, theta in support} together with
// X_box itself. Sound (interval/Bernstein enclosure), not tight.
inline Box enclose_one_step_reachable(const SystemSpec& sys, const Box& X_box) {
    Box theta = disturbance_box(sys.disturbance);
    Box full{X_box.lo, X_box.hi};
    full.lo.insert(full.lo.end(), theta.lo.begin(), theta.lo.end());
    full.hi.insert(full.hi.end(), theta.hi.begin(), theta.hi.end());

    Box out = X_box;
    for (std::size_t i = 0; i < sys.state_vars.size(); ++i) {
        Interval enc = interval_enclosure(sys.dynamics[i], full);
        out.lo[i] = std::min(out.lo[i], enc.lo);
        out.hi[i] = std::max(out.hi[i], enc.hi);
    }
    return out;
}

// Closure of A \ B as a union of conjunctive regions: one region per conjunct
// of B with that conjunct's relation flipped. Sound for certificate purposes
// (the union covers A \ B; overlap on B's boundary is measure zero).
inline std::vector<SemialgebraicSet> set_difference_regions(const SemialgebraicSet& a,
                                                            const SemialgebraicSet& b) {
    std::vector<SemialgebraicSet> out;
    for (const auto& c : b.conjuncts) {
        SemialgebraicSet r = a;
        r.conjuncts.push_back(
            {c.poly, c.rel == Relation::LeZero ? Relation::GeZero : Relation::LeZero});
        out.push_back(std::move(r));
    }
    return out;
}

enum class BoxStatus { Outside, Inside, Overlap };

// Classify a box against a set using range enclosures of each conjunct:
// Outside = provably disjoint, Inside = provably contained, else Overlap.
inline BoxStatus box_region_status(const SemialgebraicSet& s,
                                   const std::vector<std::string>& vars, const Box& box) {
    bool all_inside = true;
    for (const auto& c : s.conjuncts) {
        Interval enc = interval_enclosure(c.poly.reindexed(vars), box);
        if (c.rel == Relation::LeZero) {
            if (enc.lo > 0.0) return BoxStatus::Outside;
            if (enc.hi > 0.0) all_inside = false;
        } else {
            if (enc.hi < 0.0) return BoxStatus::Outside;
            if (enc.lo < 0.0) all_inside = false;
        }
    }
    return all_inside ? BoxStatus::Inside : BoxStatus::Overlap;
}

namespace detail {

// Sound outer bound on one face of the set inside `start`: best-first
// bisection along `axis`, popping the cell with the most extreme face first.
// An Inside cell at the top of the queue attains the bound exactly, so the
// result is machine-tight for sets whose faces are representable.
inline double face_bound(const SemialgebraicSet& s, const std::vector<std::string>& vars,
                         const Box& start, std::size_t axis, bool maximize) {
    std::vector<Box> store;
    std::priority_queue<std::pair<double, std::size_t>> pq;
    auto push = [&](Box b) {
        double pot = maximize ? b.hi[axis] : -b.lo[axis];
        store.push_back(std::move(b));
        pq.push({pot, store.size() - 1});
    };
    push(start);
    for (int iter = 0; iter < 20000 && !pq.empty(); ++iter) {
        auto [pot, idx] = pq.top();
        pq.pop();
        Box box = std::move(store[idx]);
        BoxStatus st = box_region_status(s, vars, box);
        if (st == BoxStatus::Outside) continue;
        double value = maximize ? box.hi[axis] : box.lo[axis];
        if (st == BoxStatus::Inside) return value;
        if (box.width(axis) <= 1e-13 * std::max(1.0, std::abs(value))) return value;
        auto [a, b] = box.split(axis);
        push(std::move(a));
        push(std::move(b));
    }
    if (pq.empty()) throw std::runtime_error("set is empty inside the given box");
    return maximize ? pq.top().first : -pq.top().first;
}

}  // namespace detail

// Tight outer bounding box of (the part of) a set inside `start`. Throws if
// the set is provably empty inside `start`.
inline Box outer_bounding_box(const SemialgebraicSet& s, const std::vector<std::string>& vars,
                              const Box& start) {
    Box out = start;
    for (std::size_t axis = 0; axis < start.dim(); ++axis) {
        out.lo[axis] = detail::face_bound(s, vars, start, axis, false);
        out.hi[axis] = detail::face_bound(s, vars, start, axis, true);
    }
    return out;
}

// Full problem validation. Checks the invariants that make the verification
// theory applicable and caches the safe/target bounding boxes.
inline void validate_problem(ProblemSpec& spec) {
    validate_system(spec.system);
    const std::size_t n = spec.system.state_vars.size();
    const auto& sv = spec.system.state_vars;

    if (spec.x0.size() != n) throw std::invalid_argument("x0 arity does not match state dimension");
    if (spec.extended_box.lo.size() != n || spec.extended_box.hi.size() != n)
        throw std::invalid_argument("extended-domain box arity mismatch");
    for (std::size_t i = 0; i < n; ++i)
        if (!(spec.extended_box.lo[i] < spec.extended_box.hi[i]))
            throw std::invalid_argument("extended-domain box is empty in dimension " +
                                        std::to_string(i));

    auto canon = [&](SemialgebraicSet& s) {
        for (auto& c : s.conjuncts) c.poly = c.poly.reindexed(sv);
    };
    canon(spec.safe_set);
    canon(spec.extended_set);
    if (spec.target_set) canon(*spec.target_set);

    if (spec.kind == ProblemKind::ReachAvoid && !spec.target_set)
        throw std::invalid_argument("reach-avoid problem requires a target set");
    if (spec.kind == ProblemKind::Safety && spec.target_set)
        throw std::invalid_argument("safety problem must not declare a target set");

    if (!spec.extended_set.contains(spec.x0) || !spec.extended_box.contains(spec.x0))
        throw std::invalid_argument("x0 lies outside the extended domain");
    if (!spec.safe_set.contains(spec.x0))
        throw std::invalid_argument("x0 lies outside the safe set");
    if (spec.kind == ProblemKind::ReachAvoid && spec.target_set->contains(spec.x0))
        throw std::invalid_argument("x0 lies inside the target set");

    spec.safe_box = outer_bounding_box(spec.safe_set, sv, spec.extended_box);

    Box reach = enclose_one_step_reachable(spec.system, spec.safe_box);
    for (std::size_t i = 0; i < n; ++i)
        if (reach.lo[i] < spec.extended_box.lo[i] - 1e-12 ||
            reach.hi[i] > spec.extended_box.hi[i] + 1e-12)
            throw std::invalid_argument(
                "extended-domain box does not contain the one-step reachable "
                "enclosure of the safe set (dimension " +
                std::to_string(i) + ": reachable [" + std::to_string(reach.lo[i]) + ", " +
                std::to_string(reach.hi[i]) + "])");

    if (spec.kind == ProblemKind::ReachAvoid) {
        spec.target_box = outer_bounding_box(*spec.target_set, sv, spec.extended_box);
        // Sampled containment check: target points must lie in the safe set.
        SplitMix64 rng(0x5EEDBA5Eu);
        std::vector<double> pt(n);
        for (int s = 0; s < 1000; ++s) {
            for (std::size_t i = 0; i < n; ++i)
                pt[i] = rng.uniform(spec.target_box.lo[i], spec.target_box.hi[i]);
            if (!spec.target_set->contains(pt)) continue;
            if (!spec.safe_set.contains(pt))
                throw std::invalid_argument(
                    "target set is not contained in the safe set (sampled witness)");
        }
    } else {
        spec.target_box = Box{};
    }
}

}  // namespace stochcert
