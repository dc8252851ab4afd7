// Self-contained dense two-phase primal simplex over doubles. Variables are
// free (each is split internally into a positive and negative part);
// constraints are <=, >= or ==. Sized for the certificate-synthesis LPs
// (hundreds of variables and rows), not for sparse industrial problems.

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace stochcert::lp {

enum class Rel { Le, Ge, Eq };
enum class Sense { Minimize, Maximize };
enum class Status { Optimal, Infeasible, Unbounded };

struct Row {
    std::vector<double> coeffs;
    Rel rel = Rel::Le;
    double rhs = 0.0;
};

struct Problem {
    std::size_t num_vars = 0;
    Sense sense = Sense::Minimize;
    std::vector<double> objective;
    std::vector<Row> rows;
};

struct Solution {
    Status status = Status::Infeasible;
    std::vector<double> x;
    double objective = 0.0;
};

namespace detail {

class Tableau {
  public:
    Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), data_(rows * cols, 0.0) {}
    double& at(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * n_ + c]; }
    std::size_t rows() const { return m_; }
    std::size_t cols() const { return n_; }

    void pivot(std::size_t pr, std::size_t pc) {
        double piv = at(pr, pc);
        for (std::size_t j = 0; j < n_; ++j) data_[pr * n_ + j] /= piv;
        for (std::size_t r = 0; r < m_; ++r) {
            if (r == pr) continue;
            double f = at(r, pc);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < n_; ++j) data_[r * n_ + j] -= f * data_[pr * n_ + j];
            data_[r * n_ + pc] = 0.0;
        }
    }

  private:
    std::size_t m_, n_;
    std::vector<double> data_;
};

}  // namespace detail

namespace detail {

inline Solution solve_prepared(const Problem& prob, double eps) {
    if (prob.objective.size() != prob.num_vars)
        throw std::invalid_argument("objective length does not match variable count");
    for (const auto& row : prob.rows)
        if (row.coeffs.size() != prob.num_vars)
            throw std::invalid_argument("row length does not match variable count");

    const std::size_t n = prob.num_vars;
    const std::size_t m = prob.rows.size();
    const std::size_t structural = 2 * n;  // x = xplus - xminus

    std::size_t n_slack = 0, n_art = 0;
    for (const auto& row : prob.rows) {
        bool flip = row.rhs < 0.0;
        Rel rel = row.rel;
        if (flip) rel = (rel == Rel::Le ? Rel::Ge : rel == Rel::Ge ? Rel::Le : Rel::Eq);
        if (rel != Rel::Eq) ++n_slack;
        if (rel != Rel::Le) ++n_art;
    }

    const std::size_t width = structural + n_slack + n_art + 1;
    const std::size_t rhs_col = width - 1;
    const std::size_t art_begin = structural + n_slack;
    detail::Tableau T(m + 1, width);
    std::vector<std::size_t> basis(m);

    {
        std::size_t slack_at = structural, art_at = art_begin;
        for (std::size_t i = 0; i < m; ++i) {
            const auto& row = prob.rows[i];
            double sign = row.rhs < 0.0 ? -1.0 : 1.0;
            Rel rel = row.rel;
            if (sign < 0.0)
                rel = (rel == Rel::Le ? Rel::Ge : rel == Rel::Ge ? Rel::Le : Rel::Eq);
            for (std::size_t j = 0; j < n; ++j) {
                T.at(i, 2 * j) = sign * row.coeffs[j];
                T.at(i, 2 * j + 1) = -sign * row.coeffs[j];
            }
            T.at(i, rhs_col) = sign * row.rhs;
            if (rel == Rel::Le) {
                T.at(i, slack_at) = 1.0;
                basis[i] = slack_at++;
            } else if (rel == Rel::Ge) {
                T.at(i, slack_at) = -1.0;
                ++slack_at;
                T.at(i, art_at) = 1.0;
                basis[i] = art_at++;
            } else {
                T.at(i, art_at) = 1.0;
                basis[i] = art_at++;
            }
        }
    }

    const std::size_t obj = m;
    auto run = [&](std::size_t allowed_cols) -> Status {
        const std::size_t dantzig_limit = 500 + 2 * (m + width);
        const std::size_t hard_limit = 100 * dantzig_limit + 100000;
        for (std::size_t iter = 0;; ++iter) {
            if (iter > hard_limit) throw std::runtime_error("simplex iteration limit exceeded");
            bool bland = iter > dantzig_limit;
            std::size_t enter = width;
            double best = -eps;
            for (std::size_t j = 0; j < allowed_cols; ++j) {
                double rc = T.at(obj, j);
                if (rc < (bland ? -eps : best)) {
                    enter = j;
                    best = rc;
                    if (bland) break;
                }
            }
            if (enter == width) return Status::Optimal;

            // Two-pass ratio test: find the exact minimum ratio, then choose
            // among rows tied at that minimum. Accepting a strictly larger
            // ratio, even by 1e-12, walks other rows' rhs negative and lets
            // degenerate pivoting amplify the error.
            double best_ratio = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < m; ++r) {
                double a = T.at(r, enter);
                if (a <= eps) continue;
                double ratio = std::max(T.at(r, rhs_col), 0.0) / a;
                best_ratio = std::min(best_ratio, ratio);
            }
            if (best_ratio == std::numeric_limits<double>::infinity())
                return Status::Unbounded;
            const double tie = best_ratio + 1e-9 * (1.0 + best_ratio);
            std::size_t leave = m;
            for (std::size_t r = 0; r < m; ++r) {
                double a = T.at(r, enter);
                if (a <= eps) continue;
                double ratio = std::max(T.at(r, rhs_col), 0.0) / a;
                if (ratio > tie) continue;
                if (leave == m) {
                    leave = r;
                } else if (bland) {
                    if (basis[r] < basis[leave]) leave = r;
                } else if (a > T.at(leave, enter)) {
                    leave = r;  // largest pivot element for stability
                }
            }
            T.pivot(leave, enter);
            basis[leave] = enter;
            for (std::size_t r = 0; r < m; ++r) {
                double& rhs = T.at(r, rhs_col);
                if (rhs < 0.0 && rhs > -1e-9) rhs = 0.0;
            }
        }
    };

    // Phase 1: drive the artificial variables to zero.
    if (n_art > 0) {
        for (std::size_t j = 0; j < width; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                if (basis[i] >= art_begin) acc += T.at(i, j);
            T.at(obj, j) = (j >= art_begin && j < rhs_col) ? 1.0 - acc : -acc;
        }
        Status s1 = run(width - 1);
        if (s1 != Status::Optimal) throw std::runtime_error("phase-1 simplex failed");
        double infeas = -T.at(obj, rhs_col);
        if (infeas > 1e-7) return {Status::Infeasible, {}, 0.0};
        for (std::size_t i = 0; i < m; ++i) {
            if (basis[i] < art_begin) continue;
            std::size_t piv = width;
            for (std::size_t j = 0; j < art_begin; ++j)
                if (std::abs(T.at(i, j)) > eps) {
                    piv = j;
                    break;
                }
            if (piv == width) continue;  // redundant row, leave the null artificial in place
            T.pivot(i, piv);
            basis[i] = piv;
        }
    }

    // Phase 2: original objective, reduced through the current basis.
    {
        std::vector<double> c(width, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            double co = prob.objective[j] * (prob.sense == Sense::Maximize ? -1.0 : 1.0);
            c[2 * j] = co;
            c[2 * j + 1] = -co;
        }
        for (std::size_t j = 0; j < width; ++j) T.at(obj, j) = (j < rhs_col) ? c[j] : 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double cb = c[basis[i]];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j < width; ++j) T.at(obj, j) -= cb * T.at(i, j);
        }
    }
    Status s2 = run(art_begin);
    if (s2 == Status::Unbounded) return {Status::Unbounded, {}, 0.0};

    Solution sol;
    sol.status = Status::Optimal;
    sol.x.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        if (basis[i] >= structural) continue;
        double val = T.at(i, rhs_col);
        std::size_t var = basis[i] / 2;
        sol.x[var] += (basis[i] % 2 == 0) ? val : -val;
    }
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += prob.objective[j] * sol.x[j];
    sol.objective = z;
    return sol;
}

}  // namespace detail

// Equilibrates the constraint matrix with power-of-two row and column scales
// (exact in binary arithmetic), solves, and maps the solution back. Without
// this, high-degree Bernstein rows mix magnitudes badly enough to break the
// phase-1 feasibility test.
inline Solution solve(const Problem& prob, double eps = 1e-9) {
    if (prob.objective.size() != prob.num_vars)
        throw std::invalid_argument("objective length does not match variable count");
    for (const auto& row : prob.rows)
        if (row.coeffs.size() != prob.num_vars)
            throw std::invalid_argument("row length does not match variable count");

    Problem scaled = prob;
    std::vector<double> col_scale(prob.num_vars, 1.0);
    auto pow2_near = [](double s) { return std::exp2(std::lround(std::log2(s))); };
    for (int pass = 0; pass < 2; ++pass) {
        for (auto& row : scaled.rows) {
            double s = 0.0;
            for (double c : row.coeffs) s = std::max(s, std::abs(c));
            if (!(s > 0.0) || !std::isfinite(s)) continue;
            const double f = pow2_near(s);
            for (double& c : row.coeffs) c /= f;
            row.rhs /= f;
        }
        for (std::size_t j = 0; j < scaled.num_vars; ++j) {
            double s = 0.0;
            for (const auto& row : scaled.rows) s = std::max(s, std::abs(row.coeffs[j]));
            if (!(s > 0.0) || !std::isfinite(s)) continue;
            const double f = pow2_near(s);
            for (auto& row : scaled.rows) row.coeffs[j] /= f;
            scaled.objective[j] /= f;
            col_scale[j] *= f;
        }
    }

    Solution sol = detail::solve_prepared(scaled, eps);
    if (sol.status == Status::Optimal)
        for (std::size_t j = 0; j < prob.num_vars; ++j) sol.x[j] /= col_scale[j];
    return sol;
}

}  // namespace stochcert::lp
