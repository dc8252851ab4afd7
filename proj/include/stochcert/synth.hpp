// Certificate synthesis by linear programming. For fixed alpha and beta the
// certificate coefficients enter every constraint linearly, and requiring
// the Bernstein coefficients of each residual to be nonnegative on a cell
// cover of the constraint regions yields a sound LP inner approximation.
// Cells that straddle a region boundary get nonnegative scalar multipliers
// on the region inequalities so that residuals need only dominate a
// combination of the defining polynomials there rather than be globally
// nonnegative on the cell.
//
// Every LP optimum is re-audited through check_certificate before being
// reported as a certificate; the audit re-derives residuals independently
// of the LP rows.

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bounds.hpp"
#include "checker.hpp"
#include "model.hpp"
#include "simplex.hpp"

namespace stochcert {

struct SynthesisOptions {
    unsigned degree = 2;                  // total degree of v
    unsigned depth = 3;                   // per-axis subdivision: 2^depth cells
    unsigned elevation = 0;               // extra Bernstein degree elevation
    std::vector<unsigned> degree_grid;    // sweep; empty means {degree}
    std::vector<double> alpha_grid{1.0};
    // nullopt entries leave beta as a free LP variable (alpha=1 upper kinds).
    std::vector<std::optional<double>> beta_grid{std::nullopt};
    double tie_tolerance = 1e-12;
    std::size_t audit_budget = kDefaultCellBudget;
};

struct LPModel {
    lp::Problem lp;
    std::vector<Exponents> monomials;  // LP variable i is the coefficient of monomials[i]
    std::optional<std::size_t> m_index;
    std::optional<std::size_t> beta_index;
    std::size_t multiplier_count = 0;
    std::size_t cells_used = 0;
    std::size_t cells_dropped = 0;
};

namespace detail {

inline std::vector<Exponents> monomial_basis(std::size_t nvars, unsigned max_total) {
    std::vector<Exponents> out;
    Exponents cur(nvars, 0);
    auto rec = [&](auto&& self, std::size_t pos, unsigned rem) -> void {
        if (pos + 1 == nvars) {
            cur[pos] = rem;
            out.push_back(cur);
            return;
        }
        for (unsigned k = 0; k <= rem; ++k) {
            cur[pos] = k;
            self(self, pos + 1, rem - k);
        }
    };
    for (unsigned total = 0; total <= max_total; ++total) rec(rec, 0, total);
    return out;
}

inline std::vector<Box> subdivide_box(const Box& box, unsigned depth) {
    const std::size_t per = std::size_t{1} << depth;
    std::vector<Box> out;
    std::vector<std::size_t> idx(box.dim(), 0);
    while (true) {
        Box c = box;
        for (std::size_t i = 0; i < box.dim(); ++i) {
            double w = box.width(i) / static_cast<double>(per);
            c.lo[i] = box.lo[i] + static_cast<double>(idx[i]) * w;
            c.hi[i] = idx[i] + 1 == per ? box.hi[i]
                                        : box.lo[i] + static_cast<double>(idx[i] + 1) * w;
        }
        out.push_back(std::move(c));
        std::size_t axis = 0;
        while (axis < idx.size() && ++idx[axis] == per) idx[axis++] = 0;
        if (axis == idx.size()) break;
    }
    return out;
}

struct SparseRow {
    std::vector<std::pair<std::size_t, double>> entries;
    lp::Rel rel = lp::Rel::Ge;
    double rhs = 0.0;
};

}  // namespace detail

// Assemble the synthesis LP for one (kind, alpha, beta) choice. A nullopt
// beta leaves it as a free variable, allowed only for upper-bound kinds with
// alpha=1 where the closed-form objective v(x0) + N*beta stays linear; the
// free beta is additionally constrained to [0,1] so that the linear-form
// branch of the bound applies.
inline LPModel build_lp(const ProblemSpec& problem, BoundKind kind, double alpha,
                        std::optional<double> beta, const SynthesisOptions& opt) {
    const bool lower = is_lower_kind(kind);
    const bool free_beta = !beta.has_value();
    if (free_beta && (lower || alpha != 1.0))
        throw std::invalid_argument(
            "beta can be left free only for upper-bound kinds with alpha=1");
    validate_certificate_params(kind, alpha, free_beta ? 0.5 : *beta,
                                lower ? std::optional<double>(0.0) : std::nullopt);

    const auto& sv = problem.system.state_vars;
    const std::size_t dim = sv.size();
    LPModel model;
    model.monomials = detail::monomial_basis(dim, opt.degree);
    const std::size_t nm = model.monomials.size();
    std::size_t nvars = nm;
    if (lower) model.m_index = nvars++;
    if (free_beta) model.beta_index = nvars++;

    std::vector<Polynomial> mono(nm), emono(nm);
    for (std::size_t i = 0; i < nm; ++i) {
        mono[i] = Polynomial::monomial(sv, model.monomials[i], 1.0);
        emono[i] = one_step_expectation(mono[i], problem.system);
    }

    const double beta_val = free_beta ? 0.0 : *beta;
    struct Part {
        std::size_t var;
        Polynomial poly;
    };
    std::vector<detail::SparseRow> rows;

    for (const auto& entry : constraint_layout(kind, alpha, problem)) {
        std::vector<Part> parts;
        parts.reserve(nm + 2);
        Polynomial constant = Polynomial::constant(0.0, sv);
        switch (entry.form) {
            case ConstraintForm::ExpectationUpper:
                for (std::size_t i = 0; i < nm; ++i)
                    parts.push_back({i, mono[i] * (1.0 / alpha) - emono[i]});
                if (free_beta)
                    parts.push_back({*model.beta_index, Polynomial::constant(1.0, sv)});
                else
                    constant = Polynomial::constant(beta_val, sv);
                break;
            case ConstraintForm::ExpectationLower:
                for (std::size_t i = 0; i < nm; ++i)
                    parts.push_back({i, emono[i] - mono[i] * alpha});
                constant = Polynomial::constant(-beta_val, sv);
                break;
            case ConstraintForm::AtLeastOne:
                for (std::size_t i = 0; i < nm; ++i) parts.push_back({i, mono[i]});
                constant = Polynomial::constant(-1.0, sv);
                break;
            case ConstraintForm::AtLeastZero:
                for (std::size_t i = 0; i < nm; ++i) parts.push_back({i, mono[i]});
                break;
            case ConstraintForm::AtMostOne:
                for (std::size_t i = 0; i < nm; ++i) parts.push_back({i, mono[i] * -1.0});
                constant = Polynomial::constant(1.0, sv);
                break;
            case ConstraintForm::SupBound:
                for (std::size_t i = 0; i < nm; ++i) parts.push_back({i, mono[i] * -1.0});
                parts.push_back({*model.m_index, Polynomial::constant(1.0, sv)});
                break;
            case ConstraintForm::NegativeDrift:
                for (std::size_t i = 0; i < nm; ++i)
                    parts.push_back({i, mono[i] * (1.0 - alpha)});
                constant = Polynomial::constant(-beta_val, sv);
                break;
        }

        for (const Box& cell : detail::subdivide_box(entry.box, opt.depth)) {
            BoxStatus status = box_region_status(entry.region, sv, cell);
            if (status == BoxStatus::Outside) {
                ++model.cells_dropped;
                continue;
            }
            ++model.cells_used;
            std::vector<Part> cell_parts = parts;
            if (status == BoxStatus::Overlap) {
                for (const auto& cj : entry.region.conjuncts) {
                    Polynomial g =
                        cj.rel == Relation::GeZero ? cj.poly : cj.poly * -1.0;
                    std::size_t lam = nvars++;
                    ++model.multiplier_count;
                    cell_parts.push_back({lam, g.reindexed(sv) * -1.0});
                    rows.push_back({{{lam, 1.0}}, lp::Rel::Ge, 0.0});
                }
            }

            std::vector<unsigned> target(dim, 0);
            auto absorb = [&](const Polynomial& p) {
                auto pd = p.per_var_degree();
                for (std::size_t i = 0; i < dim; ++i) target[i] = std::max(target[i], pd[i]);
            };
            absorb(constant);
            for (const auto& part : cell_parts) absorb(part.poly);
            for (std::size_t i = 0; i < dim; ++i) target[i] += opt.elevation;

            auto coeffs_at = [&](const Polynomial& p) {
                return elevate_form_to(bernstein_form(p, cell), target).coeffs;
            };
            std::vector<double> base = coeffs_at(constant);
            std::vector<detail::SparseRow> cell_rows(base.size());
            for (std::size_t t = 0; t < base.size(); ++t) {
                cell_rows[t].rel = lp::Rel::Ge;
                cell_rows[t].rhs = -base[t];
            }
            for (const auto& part : cell_parts) {
                std::vector<double> pc = coeffs_at(part.poly);
                for (std::size_t t = 0; t < pc.size(); ++t)
                    if (pc[t] != 0.0) cell_rows[t].entries.push_back({part.var, pc[t]});
            }
            for (auto& r : cell_rows) rows.push_back(std::move(r));
        }
    }

    std::vector<double> at_x0(nm);
    for (std::size_t i = 0; i < nm; ++i) at_x0[i] = mono[i].eval(problem.x0);

    if (kind == BoundKind::SafetyUpperKushner || kind == BoundKind::RAUpperKushner) {
        detail::SparseRow strict;
        strict.rel = lp::Rel::Le;
        strict.rhs = 1.0 - 1e-9;
        for (std::size_t i = 0; i < nm; ++i)
            if (at_x0[i] != 0.0) strict.entries.push_back({i, at_x0[i]});
        rows.push_back(std::move(strict));
    }
    if (free_beta) {
        rows.push_back({{{*model.beta_index, 1.0}}, lp::Rel::Ge, 0.0});
        rows.push_back({{{*model.beta_index, 1.0}}, lp::Rel::Le, 1.0});
    }

    model.lp.num_vars = nvars;
    model.lp.objective.assign(nvars, 0.0);
    const double N = static_cast<double>(problem.horizon);
    if (!lower) {
        model.lp.sense = lp::Sense::Minimize;
        for (std::size_t i = 0; i < nm; ++i) model.lp.objective[i] = at_x0[i];
        if (free_beta) model.lp.objective[*model.beta_index] = N;
    } else {
        model.lp.sense = lp::Sense::Maximize;
        if (alpha > 1.0) {
            double scale = std::pow(alpha, N + 1.0) * (alpha - 1.0);
            for (std::size_t i = 0; i < nm; ++i) model.lp.objective[i] = scale * at_x0[i];
            model.lp.objective[*model.m_index] = -(alpha - 1.0);
        } else {
            for (std::size_t i = 0; i < nm; ++i) model.lp.objective[i] = at_x0[i];
            model.lp.objective[*model.m_index] = -1.0;
        }
    }

    model.lp.rows.reserve(rows.size());
    for (const auto& sr : rows) {
        lp::Row dense;
        dense.coeffs.assign(nvars, 0.0);
        for (const auto& [var, val] : sr.entries) dense.coeffs[var] += val;
        // Basis conversions leave numerical dust (~1e-20) in coefficients
        // that are exact zeros; drop it so the solver never pivots on it.
        double scale = std::abs(sr.rhs);
        for (double c : dense.coeffs) scale = std::max(scale, std::abs(c));
        for (double& c : dense.coeffs)
            if (std::abs(c) < 1e-12 * scale) c = 0.0;
        dense.rel = sr.rel;
        dense.rhs = std::abs(sr.rhs) < 1e-12 * scale ? 0.0 : sr.rhs;
        model.lp.rows.push_back(std::move(dense));
    }
    return model;
}

enum class SynthStatus { Success, Infeasible, AuditFailed };

inline std::string synth_status_name(SynthStatus s) {
    switch (s) {
        case SynthStatus::Success: return "success";
        case SynthStatus::Infeasible: return "infeasible";
        case SynthStatus::AuditFailed: return "audit-failed";
    }
    throw std::logic_error("unreachable");
}

struct SynthesisResult {
    SynthStatus status = SynthStatus::Infeasible;
    std::optional<Certificate> certificate;
    std::optional<BoundReport> bound;  // present iff status == Success
    CheckReport audit;                 // present for Success and AuditFailed
    lp::Status lp_status = lp::Status::Infeasible;
    double lp_objective = 0.0;
    std::size_t lp_rows = 0;
    std::size_t lp_vars = 0;
};

// Solve the LP, rebuild the certificate from the optimum, and audit it from
// scratch. Only an audit-Verified certificate is reported as Success.
inline SynthesisResult synthesize(const ProblemSpec& problem, BoundKind kind, double alpha,
                                  std::optional<double> beta, const SynthesisOptions& opt) {
    LPModel model = build_lp(problem, kind, alpha, beta, opt);
    SynthesisResult res;
    res.lp_rows = model.lp.rows.size();
    res.lp_vars = model.lp.num_vars;
    lp::Solution sol = lp::solve(model.lp);
    res.lp_status = sol.status;
    if (sol.status == lp::Status::Infeasible) {
        res.status = SynthStatus::Infeasible;
        return res;
    }
    if (sol.status != lp::Status::Optimal)
        throw std::runtime_error("synthesis LP is unbounded; constraint assembly is broken");
    res.lp_objective = sol.objective;

    Certificate cert;
    cert.kind = kind;
    cert.alpha = alpha;
    cert.beta = model.beta_index ? sol.x[*model.beta_index] : *beta;
    if (model.m_index) cert.M = sol.x[*model.m_index];
    Polynomial v(problem.system.state_vars);
    for (std::size_t i = 0; i < model.monomials.size(); ++i)
        if (sol.x[i] != 0.0) v.terms[model.monomials[i]] += sol.x[i];
    v.normalize();

    // Simplex round-off can leave v(x0) a hair outside the evaluators'
    // closed preconditions (v0 >= 0 for upper kinds, v0 <= M for lower
    // kinds); restore them with a negligible shift, then audit the shifted
    // certificate.
    double v0 = v.eval(problem.x0);
    if (!is_lower_kind(kind) && v0 < 0.0) {
        v = v + Polynomial::constant(1e-12 - v0, problem.system.state_vars);
    } else if (is_lower_kind(kind) && v0 > *cert.M) {
        cert.M = v0;
    }
    cert.v = std::move(v);

    res.certificate = cert;
    res.audit = check_certificate(cert, problem, opt.audit_budget);
    if (res.audit.overall == Verdict::Verified) {
        res.status = SynthStatus::Success;
        res.bound = bound_from_certificate(cert, problem);
    } else {
        res.status = SynthStatus::AuditFailed;
    }
    return res;
}

struct SweepResult {
    Certificate certificate;
    BoundReport bound;
    CheckReport audit;
    std::size_t combinations_tried = 0;
    std::size_t combinations_succeeded = 0;
};

// Grid search over alpha x beta x degree; keeps the best audited bound
// (smallest upper, largest lower). Ties resolve to the smaller degree, then
// the alpha closest to 1. Grid combinations with invalid parameters for the
// kind are skipped.
inline SweepResult sweep(const ProblemSpec& problem, BoundKind kind,
                         const SynthesisOptions& opt) {
    const bool lower = is_lower_kind(kind);
    std::vector<unsigned> degrees =
        opt.degree_grid.empty() ? std::vector<unsigned>{opt.degree} : opt.degree_grid;

    std::optional<SweepResult> best;
    unsigned best_degree = 0;
    double best_alpha = 0.0;
    std::size_t tried = 0, succeeded = 0;

    for (double a : opt.alpha_grid) {
        for (const auto& b : opt.beta_grid) {
            for (unsigned d : degrees) {
                ++tried;
                SynthesisOptions o = opt;
                o.degree = d;
                SynthesisResult r;
                try {
                    r = synthesize(problem, kind, a, b, o);
                } catch (const std::invalid_argument&) {
                    continue;
                }
                if (r.status != SynthStatus::Success) continue;
                ++succeeded;
                double val = r.bound->clamped_value;
                bool better = false;
                if (!best) {
                    better = true;
                } else {
                    double cur = best->bound.clamped_value;
                    double gain = lower ? val - cur : cur - val;
                    if (gain > opt.tie_tolerance)
                        better = true;
                    else if (gain >= -opt.tie_tolerance) {
                        if (d != best_degree)
                            better = d < best_degree;
                        else
                            better = std::abs(a - 1.0) < std::abs(best_alpha - 1.0);
                    }
                }
                if (better) {
                    best = SweepResult{*r.certificate, *r.bound, r.audit, 0, 0};
                    best_degree = d;
                    best_alpha = a;
                }
            }
        }
    }
    if (!best) throw std::runtime_error("all grid combinations were infeasible");
    best->combinations_tried = tried;
    best->combinations_succeeded = succeeded;
    return *best;
}

}  // namespace stochcert
