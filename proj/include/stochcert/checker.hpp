// Rigorous certificate checking: every bound kind induces a list of
// polynomial nonnegativity constraints over semialgebraic regions; a
// branch-and-bound over Bernstein/interval enclosures verifies or refutes
// each one. Also provides a certified upper bound on sup v over a box.
//
// Soundness contract: Verified means the residual is >= -1e-9 everywhere on
// the region (the margin absorbs double-precision coefficient noise and is
// reported). Falsified carries a concrete witness point. Unknown is a
// first-class outcome when the cell budget runs out.

#pragma once

#include <cstddef>
#include <deque>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "bernstein.hpp"
#include "bounds.hpp"
#include "model.hpp"

namespace stochcert {

inline constexpr double kVerifyMargin = -1e-9;
inline constexpr double kFalsifyThreshold = -1e-7;
inline constexpr std::size_t kDefaultCellBudget = 100000;

enum class Verdict { Verified, Falsified, Unknown };

inline std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Verified: return "verified";
        case Verdict::Falsified: return "falsified";
        case Verdict::Unknown: return "unknown";
    }
    throw std::logic_error("unreachable");
}

// How the certificate polynomial enters one constraint line.
enum class ConstraintForm {
    ExpectationUpper,  // v/alpha + beta - E[v o f] >= 0
    ExpectationLower,  // E[v o f] - alpha*v - beta >= 0
    AtLeastOne,        // v - 1 >= 0
    AtLeastZero,       // v >= 0
    AtMostOne,         // 1 - v >= 0
    SupBound,          // M - v >= 0
    NegativeDrift,     // -beta - (alpha-1)*v >= 0
};

struct ConstraintRegion {
    std::string name;
    ConstraintForm form = ConstraintForm::AtLeastZero;
    SemialgebraicSet region;
    Box box;
};

namespace detail {

inline void append_pieces(std::vector<ConstraintRegion>& out, const std::string& name,
                          ConstraintForm form, std::vector<SemialgebraicSet> pieces,
                          const Box& box) {
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        std::string n = name;
        if (pieces.size() > 1) n += " [piece " + std::to_string(i + 1) + "]";
        out.push_back({std::move(n), form, std::move(pieces[i]), box});
    }
}

}  // namespace detail

// The constraint system of a bound kind over a concrete problem's sets.
// Shared by the checker (numeric residuals) and the synthesizer (parametric
// rows), so the two agree on what must hold where.
inline std::vector<ConstraintRegion> constraint_layout(BoundKind kind, double alpha,
                                                       const ProblemSpec& problem) {
    bool kind_is_safety = is_safety_kind(kind);
    if (kind_is_safety != (problem.kind == ProblemKind::Safety))
        throw std::invalid_argument("bound kind does not match problem kind");

    std::vector<ConstraintRegion> out;
    const auto& X = problem.safe_set;
    const auto& Ext = problem.extended_set;

    if (kind_is_safety) {
        auto outside = set_difference_regions(Ext, X);
        switch (kind) {
            case BoundKind::SafetyUpperT1:
            case BoundKind::SafetyUpperKushner:
                out.push_back({"expectation decrease on the safe set",
                               ConstraintForm::ExpectationUpper, X, problem.safe_box});
                detail::append_pieces(out, "barrier at least one outside the safe set",
                                      ConstraintForm::AtLeastOne, outside,
                                      problem.extended_box);
                out.push_back({"barrier nonnegative on the safe set",
                               ConstraintForm::AtLeastZero, X, problem.safe_box});
                break;
            case BoundKind::SafetyLower:
                out.push_back({"expectation increase on the safe set",
                               ConstraintForm::ExpectationLower, X, problem.safe_box});
                // The at-most-one line outside the safe set is redundant when
                // alpha = 1 and is omitted there.
                if (alpha != 1.0)
                    detail::append_pieces(out, "barrier at most one outside the safe set",
                                          ConstraintForm::AtMostOne, outside,
                                          problem.extended_box);
                out.push_back({"barrier bounded by M on the extended domain",
                               ConstraintForm::SupBound, Ext, problem.extended_box});
                break;
            default: break;
        }
        return out;
    }

    const auto& Xr = *problem.target_set;
    auto transit = set_difference_regions(X, Xr);
    auto outside_safe = set_difference_regions(Ext, X);
    auto outside_target = set_difference_regions(Ext, Xr);
    switch (kind) {
        case BoundKind::RAUpperT3:
            detail::append_pieces(out, "expectation decrease outside the target",
                                  ConstraintForm::ExpectationUpper, transit,
                                  problem.safe_box);
            out.push_back({"barrier at least one on the target set",
                           ConstraintForm::AtLeastOne, Xr, problem.target_box});
            detail::append_pieces(out, "barrier nonnegative off the target",
                                  ConstraintForm::AtLeastZero, outside_target,
                                  problem.extended_box);
            break;
        case BoundKind::RAUpperKushner:
            detail::append_pieces(out, "expectation decrease outside the target",
                                  ConstraintForm::ExpectationUpper, transit,
                                  problem.safe_box);
            out.push_back({"barrier at least one on the target set",
                           ConstraintForm::AtLeastOne, Xr, problem.target_box});
            detail::append_pieces(out, "barrier at least one outside the safe set",
                                  ConstraintForm::AtLeastOne, outside_safe,
                                  problem.extended_box);
            out.push_back({"barrier nonnegative on the safe set",
                           ConstraintForm::AtLeastZero, X, problem.safe_box});
            break;
        case BoundKind::RALower:
            detail::append_pieces(out, "expectation increase outside the target",
                                  ConstraintForm::ExpectationLower, transit,
                                  problem.safe_box);
            out.push_back({"barrier at most one on the target set",
                           ConstraintForm::AtMostOne, Xr, problem.target_box});
            detail::append_pieces(out, "drift margin outside the safe set",
                                  ConstraintForm::NegativeDrift, outside_safe,
                                  problem.extended_box);
            out.push_back({"barrier bounded by M on the extended domain",
                           ConstraintForm::SupBound, Ext, problem.extended_box});
            break;
        default: break;
    }
    return out;
}

struct ResidualConstraint {
    std::string name;
    Polynomial residual;  // must be >= 0 on the region
    SemialgebraicSet region;
    Box box;
};

// Instantiate the constraint layout for a concrete certificate.
inline std::vector<ResidualConstraint> residuals_for(const Certificate& cert,
                                                     const ProblemSpec& problem) {
    validate_certificate_params(cert.kind, cert.alpha, cert.beta, cert.M);
    const auto& sv = problem.system.state_vars;
    Polynomial v = cert.v.reindexed(sv);
    Polynomial Ev = one_step_expectation(v, problem.system);
    const double a = cert.alpha, b = cert.beta;

    auto residual_of = [&](ConstraintForm form) -> Polynomial {
        switch (form) {
            case ConstraintForm::ExpectationUpper:
                return v * (1.0 / a) + Polynomial::constant(b, sv) - Ev;
            case ConstraintForm::ExpectationLower:
                return Ev - v * a - Polynomial::constant(b, sv);
            case ConstraintForm::AtLeastOne:
                return v - Polynomial::constant(1.0, sv);
            case ConstraintForm::AtLeastZero:
                return v;
            case ConstraintForm::AtMostOne:
                return Polynomial::constant(1.0, sv) - v;
            case ConstraintForm::SupBound:
                return Polynomial::constant(*cert.M, sv) - v;
            case ConstraintForm::NegativeDrift:
                return Polynomial::constant(-b, sv) - v * (a - 1.0);
        }
        throw std::logic_error("unreachable");
    };

    std::vector<ResidualConstraint> out;
    for (auto& entry : constraint_layout(cert.kind, a, problem))
        out.push_back({entry.name, residual_of(entry.form), std::move(entry.region),
                       std::move(entry.box)});
    return out;
}

struct ConstraintCheck {
    std::string name;
    Verdict verdict = Verdict::Unknown;
    std::vector<double> witness;  // nonempty iff Falsified
    double witness_value = 0.0;
    std::size_t cells_explored = 0;
    std::size_t cells_remaining = 0;
    // Enclosure of the residual on the most critical undecided cell
    // (meaningful when the verdict is Unknown).
    double residual_lo = 0.0;
    double residual_hi = 0.0;
};

// Branch-and-bound nonnegativity check of `p` over region intersect box.
inline ConstraintCheck check_nonnegativity(const Polynomial& p, const SemialgebraicSet& region,
                                           const Box& box,
                                           const std::vector<std::string>& vars,
                                           std::size_t budget = kDefaultCellBudget) {
    ConstraintCheck out;
    Polynomial q = p.reindexed(vars);
    std::deque<Box> queue{box};
    std::vector<Box> stuck;

    auto try_falsify = [&](const Box& cell) -> bool {
        std::vector<std::vector<double>> pts{cell.center()};
        for (std::size_t mask = 0; mask < (std::size_t{1} << cell.dim()); ++mask) {
            std::vector<double> c(cell.dim());
            for (std::size_t i = 0; i < cell.dim(); ++i)
                c[i] = (mask >> i & 1) ? cell.hi[i] : cell.lo[i];
            pts.push_back(std::move(c));
        }
        for (auto& pt : pts) {
            if (!region.contains(pt)) continue;
            double val = q.eval(pt);
            if (val < kFalsifyThreshold) {
                out.verdict = Verdict::Falsified;
                out.witness = pt;
                out.witness_value = val;
                return true;
            }
        }
        return false;
    };

    while (!queue.empty() && out.cells_explored < budget) {
        Box cell = std::move(queue.front());
        queue.pop_front();
        ++out.cells_explored;
        if (box_region_status(region, vars, cell) == BoxStatus::Outside) continue;
        Interval enc = interval_enclosure(q, cell);
        if (enc.lo >= kVerifyMargin) continue;
        if (try_falsify(cell)) return out;
        std::size_t axis = 0;
        double w = -1.0;
        for (std::size_t i = 0; i < cell.dim(); ++i) {
            double rel = cell.width(i) / std::max(box.width(i), 1e-300);
            if (rel > w) w = rel, axis = i;
        }
        if (cell.width(axis) <= 1e-15 * std::max(1.0, box.width(axis))) {
            // Too small to split; keep as undecided rather than dropping it.
            stuck.push_back(std::move(cell));
            continue;
        }
        auto [lo, hi] = cell.split(axis);
        queue.push_back(std::move(lo));
        queue.push_back(std::move(hi));
    }

    for (auto& cell : stuck) queue.push_back(std::move(cell));
    if (queue.empty()) {
        out.verdict = Verdict::Verified;
        return out;
    }
    out.verdict = Verdict::Unknown;
    out.cells_remaining = queue.size();
    double worst = std::numeric_limits<double>::infinity();
    out.residual_lo = 0.0;
    out.residual_hi = 0.0;
    std::size_t inspected = 0;
    for (const auto& cell : queue) {
        if (inspected++ >= 200) break;
        Interval enc = interval_enclosure(q, cell);
        if (enc.lo < worst) {
            worst = enc.lo;
            out.residual_lo = enc.lo;
            out.residual_hi = enc.hi;
        }
    }
    return out;
}

struct CheckReport {
    Verdict overall = Verdict::Unknown;
    std::vector<ConstraintCheck> constraints;
    std::size_t budget_consumed = 0;
};

// Check every constraint of the certificate's kind on the given problem.
inline CheckReport check_certificate(const Certificate& cert, const ProblemSpec& problem,
                                     std::size_t budget_per_constraint = kDefaultCellBudget) {
    validate_certificate_params(cert.kind, cert.alpha, cert.beta, cert.M);
    CheckReport report;

    // Kinds with an explicit initial-value requirement: checked at x0.
    if (cert.kind == BoundKind::SafetyUpperKushner || cert.kind == BoundKind::RAUpperKushner) {
        ConstraintCheck c;
        c.name = "initial value below one";
        double v0 = cert.v.reindexed(problem.system.state_vars).eval(problem.x0);
        if (v0 < 1.0) {
            c.verdict = Verdict::Verified;
        } else {
            c.verdict = Verdict::Falsified;
            c.witness = problem.x0;
            c.witness_value = v0;
        }
        report.constraints.push_back(std::move(c));
    }

    for (auto& rc : residuals_for(cert, problem)) {
        ConstraintCheck c = check_nonnegativity(rc.residual, rc.region, rc.box,
                                                problem.system.state_vars,
                                                budget_per_constraint);
        c.name = rc.name;
        report.budget_consumed += c.cells_explored;
        report.constraints.push_back(std::move(c));
    }

    report.overall = Verdict::Verified;
    for (const auto& c : report.constraints) {
        if (c.verdict == Verdict::Falsified) {
            report.overall = Verdict::Falsified;
            break;
        }
        if (c.verdict == Verdict::Unknown) report.overall = Verdict::Unknown;
    }
    return report;
}

// Closed-form bound implied by the certificate (meaningful once the
// certificate has been Verified).
inline BoundReport bound_from_certificate(const Certificate& cert, const ProblemSpec& problem) {
    validate_certificate_params(cert.kind, cert.alpha, cert.beta, cert.M);
    double v0 = cert.v.reindexed(problem.system.state_vars).eval(problem.x0);
    unsigned N = problem.horizon;
    switch (cert.kind) {
        case BoundKind::SafetyUpperT1:
            return upper_bound_safety_t1(v0, cert.alpha, cert.beta, N);
        case BoundKind::SafetyUpperKushner:
            return upper_bound_safety_kushner(v0, cert.alpha, cert.beta, N);
        case BoundKind::SafetyLower:
            return lower_bound_safety(v0, *cert.M, cert.alpha, cert.beta, N);
        case BoundKind::RAUpperT3:
            return upper_bound_ra_t3(v0, cert.alpha, cert.beta, N);
        case BoundKind::RAUpperKushner:
            return upper_bound_ra_kushner(v0, cert.alpha, cert.beta, N);
        case BoundKind::RALower:
            return lower_bound_ra(v0, *cert.M, cert.alpha, cert.beta, N);
    }
    throw std::logic_error("unreachable");
}

// Certified upper bound on sup of v over the box: best-first search on
// Bernstein upper bounds. Returns M with sup v <= M <= sup v + tolerance
// (when the budget suffices; on exhaustion the result is still an upper
// bound, possibly looser).
inline double certified_sup(const Polynomial& v, const Box& box, double tolerance,
                            std::size_t budget = kDefaultCellBudget) {
    if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (box.dim() != v.vars.size())
        throw std::invalid_argument("box dimension does not match polynomial arity");

    std::vector<Box> store;
    std::priority_queue<std::pair<double, std::size_t>> pq;
    double lower = -std::numeric_limits<double>::infinity();

    auto push = [&](Box cell) {
        BernsteinForm bf = bernstein_form(v, cell);
        for (std::size_t mask = 0; mask < (std::size_t{1} << cell.dim()); ++mask)
            lower = std::max(lower, bf.corner_value(mask));
        lower = std::max(lower, v.eval(cell.center()));
        store.push_back(std::move(cell));
        pq.push({bf.max_coeff, store.size() - 1});
    };
    push(box);

    for (std::size_t iter = 0; iter < budget && !pq.empty(); ++iter) {
        auto [upper, idx] = pq.top();
        if (upper - lower <= tolerance) return upper;
        pq.pop();
        Box cell = std::move(store[idx]);
        std::size_t axis = 0;
        double w = -1.0;
        for (std::size_t i = 0; i < cell.dim(); ++i) {
            double rel = cell.width(i) / std::max(box.width(i), 1e-300);
            if (rel > w) w = rel, axis = i;
        }
        auto [a, b] = cell.split(axis);
        push(std::move(a));
        push(std::move(b));
    }
    return pq.empty() ? lower : pq.top().first;
}

}  // namespace stochcert
