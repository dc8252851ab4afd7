#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "stochcert/simplex.hpp"

using namespace stochcert;
using Catch::Approx;

namespace {

lp::Row row(std::vector<double> c, lp::Rel rel, double rhs) { return {std::move(c), rel, rhs}; }

bool satisfied(const lp::Row& r, const std::vector<double>& x, double tol = 1e-7) {
    double lhs = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) lhs += r.coeffs[i] * x[i];
    switch (r.rel) {
        case lp::Rel::Le: return lhs <= r.rhs + tol;
        case lp::Rel::Ge: return lhs >= r.rhs - tol;
        case lp::Rel::Eq: return std::abs(lhs - r.rhs) <= tol;
    }
    return false;
}

// Exact reference for two-variable problems with a bounded feasible region:
// enumerate intersections of constraint boundaries and pick the best
// feasible vertex.
std::optional<double> best_vertex_value(const lp::Problem& p) {
    std::optional<double> best;
    auto consider = [&](double x0, double x1) {
        std::vector<double> x{x0, x1};
        for (const auto& r : p.rows)
            if (!satisfied(r, x, 1e-9)) return;
        double z = p.objective[0] * x0 + p.objective[1] * x1;
        if (!best || (p.sense == lp::Sense::Minimize ? z < *best : z > *best)) best = z;
    };
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
        for (std::size_t j = i + 1; j < p.rows.size(); ++j) {
            const auto& a = p.rows[i];
            const auto& b = p.rows[j];
            double det = a.coeffs[0] * b.coeffs[1] - a.coeffs[1] * b.coeffs[0];
            if (std::abs(det) < 1e-7) continue;
            consider((a.rhs * b.coeffs[1] - a.coeffs[1] * b.rhs) / det,
                     (a.coeffs[0] * b.rhs - a.rhs * b.coeffs[0]) / det);
        }
    }
    return best;
}

}  // namespace

TEST_CASE("simplex solves textbook problems") {
    SECTION("maximization with inequality rows") {
        lp::Problem p;
        p.num_vars = 2;
        p.sense = lp::Sense::Maximize;
        p.objective = {3.0, 2.0};
        p.rows = {row({1, 1}, lp::Rel::Le, 4), row({1, 3}, lp::Rel::Le, 6),
                  row({1, 0}, lp::Rel::Ge, 0), row({0, 1}, lp::Rel::Ge, 0)};
        auto s = lp::solve(p);
        REQUIRE(s.status == lp::Status::Optimal);
        REQUIRE(s.objective == Approx(12.0));
        REQUIRE(s.x[0] == Approx(4.0));
        REQUIRE(s.x[1] == Approx(0.0).margin(1e-9));
    }
    SECTION("minimization with an equality row") {
        lp::Problem p;
        p.num_vars = 2;
        p.objective = {1.0, 1.0};
        p.rows = {row({1, 2}, lp::Rel::Eq, 3), row({1, 0}, lp::Rel::Ge, 0),
                  row({0, 1}, lp::Rel::Ge, 0)};
        auto s = lp::solve(p);
        REQUIRE(s.status == lp::Status::Optimal);
        REQUIRE(s.objective == Approx(1.5));
        REQUIRE(s.x[0] == Approx(0.0).margin(1e-9));
        REQUIRE(s.x[1] == Approx(1.5));
    }
    SECTION("three variables with hand-computed optimum") {
        lp::Problem p;
        p.num_vars = 3;
        p.objective = {-1.0, -2.0, -3.0};
        p.rows = {row({1, 1, 1}, lp::Rel::Le, 10), row({0, 0, 1}, lp::Rel::Le, 4),
                  row({0, 1, 0}, lp::Rel::Le, 3),  row({1, 0, 0}, lp::Rel::Ge, 0),
                  row({0, 1, 0}, lp::Rel::Ge, 0),  row({0, 0, 1}, lp::Rel::Ge, 0)};
        auto s = lp::solve(p);
        REQUIRE(s.status == lp::Status::Optimal);
        REQUIRE(s.objective == Approx(-21.0));
        REQUIRE(s.x[0] == Approx(3.0));
        REQUIRE(s.x[1] == Approx(3.0));
        REQUIRE(s.x[2] == Approx(4.0));
    }
}

TEST_CASE("simplex status detection") {
    SECTION("infeasible system") {
        lp::Problem p;
        p.num_vars = 1;
        p.objective = {1.0};
        p.rows = {row({1}, lp::Rel::Le, 0), row({1}, lp::Rel::Ge, 1)};
        REQUIRE(lp::solve(p).status == lp::Status::Infeasible);
    }
    SECTION("unbounded objective") {
        lp::Problem p;
        p.num_vars = 1;
        p.sense = lp::Sense::Maximize;
        p.objective = {1.0};
        p.rows = {row({1}, lp::Rel::Ge, 0)};
        REQUIRE(lp::solve(p).status == lp::Status::Unbounded);
    }
    SECTION("single feasible point") {
        lp::Problem p;
        p.num_vars = 1;
        p.objective = {1.0};
        p.rows = {row({1}, lp::Rel::Le, 1), row({1}, lp::Rel::Ge, 1)};
        auto s = lp::solve(p);
        REQUIRE(s.status == lp::Status::Optimal);
        REQUIRE(s.x[0] == Approx(1.0));
    }
    SECTION("input validation") {
        lp::Problem p;
        p.num_vars = 2;
        p.objective = {1.0};
        REQUIRE_THROWS_AS(lp::solve(p), std::invalid_argument);
        p.objective = {1.0, 1.0};
        p.rows = {row({1}, lp::Rel::Le, 0)};
        REQUIRE_THROWS_AS(lp::solve(p), std::invalid_argument);
    }
}

TEST_CASE("free variables take negative values") {
    lp::Problem p;
    p.num_vars = 2;  // (x, y), both free
    p.objective = {0.0, 1.0};
    p.rows = {row({-1, 1}, lp::Rel::Ge, -5), row({1, 1}, lp::Rel::Ge, 1)};
    auto s = lp::solve(p);
    REQUIRE(s.status == lp::Status::Optimal);
    REQUIRE(s.objective == Approx(-2.0));
    REQUIRE(s.x[0] == Approx(3.0));
    REQUIRE(s.x[1] == Approx(-2.0));
}

TEST_CASE("redundant equality rows are tolerated") {
    lp::Problem p;
    p.num_vars = 2;
    p.objective = {1.0, 0.0};
    p.rows = {row({1, 1}, lp::Rel::Eq, 2), row({2, 2}, lp::Rel::Eq, 4),
              row({1, 0}, lp::Rel::Ge, 0), row({0, 1}, lp::Rel::Ge, 0)};
    auto s = lp::solve(p);
    REQUIRE(s.status == lp::Status::Optimal);
    REQUIRE(s.objective == Approx(0.0).margin(1e-9));
    REQUIRE(s.x[1] == Approx(2.0));
}

TEST_CASE("random two-variable problems match vertex enumeration") {
    std::mt19937_64 rng(424242);
    std::uniform_real_distribution<double> coeff(-3.0, 3.0);
    std::uniform_real_distribution<double> rhs(-5.0, 5.0);
    int optimal_seen = 0, infeasible_seen = 0;
    for (int trial = 0; trial < 300; ++trial) {
        lp::Problem p;
        p.num_vars = 2;
        p.sense = trial % 2 == 0 ? lp::Sense::Minimize : lp::Sense::Maximize;
        p.objective = {coeff(rng), coeff(rng)};
        for (int r = 0; r < 5; ++r)
            p.rows.push_back(row({coeff(rng), coeff(rng)}, lp::Rel::Le, rhs(rng)));
        p.rows.push_back(row({1, 0}, lp::Rel::Le, 10));
        p.rows.push_back(row({1, 0}, lp::Rel::Ge, -10));
        p.rows.push_back(row({0, 1}, lp::Rel::Le, 10));
        p.rows.push_back(row({0, 1}, lp::Rel::Ge, -10));

        auto s = lp::solve(p);
        auto ref = best_vertex_value(p);
        if (s.status == lp::Status::Optimal) {
            ++optimal_seen;
            for (const auto& r : p.rows) REQUIRE(satisfied(r, s.x));
            REQUIRE(ref.has_value());
            REQUIRE(s.objective == Approx(*ref).margin(1e-5));
        } else {
            ++infeasible_seen;
            REQUIRE(s.status == lp::Status::Infeasible);
            REQUIRE_FALSE(ref.has_value());
        }
    }
    REQUIRE(optimal_seen > 50);
    REQUIRE(infeasible_seen > 10);
}
