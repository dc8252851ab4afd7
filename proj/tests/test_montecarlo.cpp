#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "stochcert/montecarlo.hpp"

using namespace stochcert;
using Catch::Approx;

namespace {

ProblemSpec random_walk_problem(ProblemKind kind) {
    ProblemSpec p;
    p.system.state_vars = {"x"};
    p.system.disturbance_vars = {"d"};
    p.system.dynamics = {parse_polynomial("x + d", {"x", "d"})};
    p.system.disturbance = UniformBoxDist{Box{{-0.1}, {0.1}}};
    p.kind = kind;
    p.safe_set.conjuncts = {{parse_polynomial("x^2 - 1", {"x"}), Relation::LeZero}};
    p.extended_set.conjuncts = {{parse_polynomial("x^2 - 2", {"x"}), Relation::LeZero}};
    p.extended_box = Box{{-std::sqrt(2.0)}, {std::sqrt(2.0)}};
    p.x0 = {0.2};
    p.horizon = 30;
    if (kind == ProblemKind::ReachAvoid)
        p.target_set = SemialgebraicSet{
            {{parse_polynomial("(x - 0.9)^2 - 1/10000", {"x"}), Relation::LeZero}}};
    validate_problem(p);
    return p;
}

ProblemSpec contraction_problem(ProblemKind kind) {
    ProblemSpec p;
    p.system.state_vars = {"x"};
    p.system.disturbance_vars = {"d"};
    p.system.dynamics = {parse_polynomial("(-0.5 + d)*x", {"x", "d"})};
    p.system.disturbance = UniformBoxDist{Box{{-1.0}, {1.0}}};
    p.kind = kind;
    p.safe_set.conjuncts = {{parse_polynomial("x^2 - 1", {"x"}), Relation::LeZero}};
    p.extended_set.conjuncts = {{parse_polynomial("x^2 - 2.25", {"x"}), Relation::LeZero}};
    p.extended_box = Box{{-1.5}, {1.5}};
    p.x0 = {-0.9};
    p.horizon = 50;
    if (kind == ProblemKind::ReachAvoid)
        p.target_set =
            SemialgebraicSet{{{parse_polynomial("x^2 - 0.36", {"x"}), Relation::LeZero}}};
    validate_problem(p);
    return p;
}

bool in_extended_minus_safe(const ProblemSpec& p, const std::vector<double>& x) {
    return p.extended_set.contains(x) && !p.safe_set.contains(x);
}

}  // namespace

TEST_CASE("incomplete beta round trips through its inverse") {
    for (double a : {1.0, 3.5, 20.0, 500.0})
        for (double b : {1.0, 7.0, 250.0})
            for (double p : {0.005, 0.1, 0.5, 0.9, 0.995}) {
                double x = detail::betainv(p, a, b);
                REQUIRE(detail::betai(a, b, x) == Approx(p).margin(1e-10));
            }
}

TEST_CASE("binomial interval endpoints") {
    SECTION("degenerate counts have closed forms") {
        for (std::uint64_t n : {10ull, 1000ull, 200000ull}) {
            auto [lo0, hi0] = clopper_pearson(0, n);
            REQUIRE(lo0 == 0.0);
            REQUIRE(hi0 == Approx(1.0 - std::pow(0.005, 1.0 / n)).margin(1e-9));
            auto [lon, hin] = clopper_pearson(n, n);
            REQUIRE(hin == 1.0);
            REQUIRE(lon == Approx(std::pow(0.005, 1.0 / n)).margin(1e-9));
        }
    }
    SECTION("interval brackets the estimate and is symmetric") {
        std::uint64_t n = 5000;
        double prev_lo = -1.0, prev_hi = -1.0;
        for (std::uint64_t k : {0ull, 17ull, 500ull, 2500ull, 4983ull, 5000ull}) {
            auto [lo, hi] = clopper_pearson(k, n);
            double est = static_cast<double>(k) / n;
            REQUIRE(lo <= est);
            REQUIRE(est <= hi);
            REQUIRE(lo > prev_lo);
            REQUIRE(hi > prev_hi);
            prev_lo = lo;
            prev_hi = hi;
            auto [mlo, mhi] = clopper_pearson(n - k, n);
            REQUIRE(lo == Approx(1.0 - mhi).margin(1e-9));
            REQUIRE(hi == Approx(1.0 - mlo).margin(1e-9));
        }
    }
    REQUIRE_THROWS_AS(clopper_pearson(1, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(clopper_pearson(7, 5), std::invalid_argument);
}

TEST_CASE("simulation reproduces the reference probabilities") {
    const std::uint64_t n = 50000;
    auto r1 = simulate_event(random_walk_problem(ProblemKind::Safety), n, 7);
    REQUIRE(r1.estimate == Approx(0.0085).margin(0.004));
    auto r2 = simulate_event(random_walk_problem(ProblemKind::ReachAvoid), n, 7);
    REQUIRE(r2.estimate == Approx(0.0128).margin(0.004));
    auto r3 = simulate_event(contraction_problem(ProblemKind::Safety), n, 7);
    REQUIRE(r3.estimate == Approx(0.2321).margin(0.01));
    auto r4 = simulate_event(contraction_problem(ProblemKind::ReachAvoid), n, 7);
    REQUIRE(r4.estimate == Approx(0.7708).margin(0.01));

    REQUIRE(r1.ci_lo <= r1.estimate);
    REQUIRE(r1.estimate <= r1.ci_hi);
    REQUIRE(r1.n_paths == n);
    REQUIRE(r1.seed == 7);
}

TEST_CASE("simulation is reproducible and seed-sensitive") {
    auto p = contraction_problem(ProblemKind::Safety);
    auto a = simulate_event(p, 5000, 42);
    auto b = simulate_event(p, 5000, 42);
    REQUIRE(a.estimate == b.estimate);
    REQUIRE(a.ci_lo == b.ci_lo);
    REQUIRE(a.ci_hi == b.ci_hi);
    auto c = simulate_event(p, 5000, 43);
    REQUIRE(a.estimate != c.estimate);
}

TEST_CASE("zero horizon cannot exit") {
    auto p = random_walk_problem(ProblemKind::Safety);
    p.horizon = 0;
    auto r = simulate_event(p, 1000, 1);
    REQUIRE(r.estimate == 0.0);
}

TEST_CASE("initial membership is enforced") {
    auto p = random_walk_problem(ProblemKind::Safety);
    p.x0 = {1.2};
    REQUIRE_THROWS_AS(simulate_event(p, 10, 1), std::invalid_argument);
    auto q = random_walk_problem(ProblemKind::ReachAvoid);
    q.x0 = {0.9};
    REQUIRE_THROWS_AS(simulate_event(q, 10, 1), std::invalid_argument);
}

TEST_CASE("finite-support sampling hits only the atoms") {
    FiniteSupportDist fs{{{{-0.1}, 0.25}, {{0.0}, 0.5}, {{0.1}, 0.25}}};
    DisturbanceSpec d = fs;
    SplitMix64 rng(123);
    int counts[3] = {0, 0, 0};
    for (int i = 0; i < 20000; ++i) {
        auto t = draw_disturbance(rng, d);
        if (t[0] == -0.1)
            ++counts[0];
        else if (t[0] == 0.0)
            ++counts[1];
        else if (t[0] == 0.1)
            ++counts[2];
        else
            FAIL("sample off the support");
    }
    REQUIRE(counts[0] / 20000.0 == Approx(0.25).margin(0.02));
    REQUIRE(counts[1] / 20000.0 == Approx(0.50).margin(0.02));
    REQUIRE(counts[2] / 20000.0 == Approx(0.25).margin(0.02));
}

TEST_CASE("coupled trajectories share disturbances and freeze correctly") {
    auto p = contraction_problem(ProblemKind::Safety);
    auto pairs = simulate_switched_coupled(p, 500, 11);
    REQUIRE(pairs.size() == 500);
    for (const auto& [orig, frozen] : pairs) {
        REQUIRE(orig.states.size() == p.horizon + 1);
        REQUIRE(orig.disturbances.size() == p.horizon);
        REQUIRE(orig.disturbances == frozen.disturbances);

        // Find the first exit of the original trajectory, if any.
        std::size_t first_exit = orig.states.size();
        for (std::size_t i = 0; i < orig.states.size(); ++i)
            if (!p.safe_set.contains(orig.states[i])) {
                first_exit = i;
                break;
            }
        if (first_exit == orig.states.size()) {
            REQUIRE(orig.states == frozen.states);
        } else {
            for (std::size_t i = 0; i <= first_exit; ++i)
                REQUIRE(orig.states[i] == frozen.states[i]);
            for (std::size_t i = first_exit; i < frozen.states.size(); ++i)
                REQUIRE(frozen.states[i] == frozen.states[first_exit]);
        }
    }
}

TEST_CASE("exit-by-time equals frozen-state-at-time, path by path") {
    for (auto problem : {random_walk_problem(ProblemKind::Safety),
                         contraction_problem(ProblemKind::Safety)}) {
        auto pairs = simulate_switched_coupled(problem, 10000, 2024);
        std::vector<std::uint64_t> freq(problem.horizon + 1, 0);
        for (const auto& [orig, frozen] : pairs) {
            bool exited = false;
            for (std::size_t i = 0; i < orig.states.size(); ++i) {
                if (!problem.safe_set.contains(orig.states[i])) exited = true;
                bool frozen_marks = in_extended_minus_safe(problem, frozen.states[i]);
                REQUIRE(exited == frozen_marks);
                if (frozen_marks) ++freq[i];
            }
        }
        for (std::size_t i = 0; i + 1 < freq.size(); ++i) REQUIRE(freq[i] <= freq[i + 1]);
    }
}

TEST_CASE("reach-by-time equals frozen-state-in-target, path by path") {
    for (auto problem : {random_walk_problem(ProblemKind::ReachAvoid),
                         contraction_problem(ProblemKind::ReachAvoid)}) {
        auto pairs = simulate_switched_coupled(problem, 10000, 515);
        for (const auto& [orig, frozen] : pairs) {
            bool reached = false, dead = false;
            for (std::size_t i = 0; i < orig.states.size(); ++i) {
                if (!dead && !reached) {
                    if (problem.target_set->contains(orig.states[i]))
                        reached = true;
                    else if (!problem.safe_set.contains(orig.states[i]))
                        dead = true;
                }
                REQUIRE(reached == problem.target_set->contains(frozen.states[i]));
            }
        }
    }
}

TEST_CASE("exact enumeration on hand-checkable instances") {
    ProblemSpec p;
    p.system.state_vars = {"x"};
    p.system.disturbance_vars = {"d"};
    p.system.dynamics = {parse_polynomial("x + d", {"x", "d"})};
    p.system.disturbance =
        FiniteSupportDist{{{{-0.1}, 1.0 / 3}, {{0.0}, 1.0 / 3}, {{0.1}, 1.0 / 3}}};
    p.kind = ProblemKind::Safety;
    p.safe_set.conjuncts = {{parse_polynomial("x^2 - 1", {"x"}), Relation::LeZero}};
    p.x0 = {0.9};
    p.horizon = 2;
    validate_system(p.system);

    SECTION("two-step walk exits only on the double-up path") {
        REQUIRE(exact_probability(p, 2) == Approx(1.0 / 9).margin(1e-12));
    }
    SECTION("zero horizon") { REQUIRE(exact_probability(p, 0) == 0.0); }
    SECTION("all successors exit") {
        ProblemSpec q = p;
        q.system.disturbance =
            FiniteSupportDist{{{{0.15}, 1.0 / 3}, {{0.2}, 1.0 / 3}, {{0.25}, 1.0 / 3}}};
        REQUIRE(exact_probability(q, 1) == Approx(1.0));
    }
    SECTION("budget is enforced") {
        REQUIRE_THROWS_WITH(exact_probability(p, 20),
                            Catch::Matchers::ContainsSubstring("budget"));
    }
    SECTION("continuous disturbances are rejected") {
        ProblemSpec q = p;
        q.system.disturbance = UniformBoxDist{Box{{-0.1}, {0.1}}};
        REQUIRE_THROWS_AS(exact_probability(q, 2), std::invalid_argument);
    }
}

TEST_CASE("exact enumeration for a reach-avoid instance") {
    ProblemSpec p;
    p.system.state_vars = {"x"};
    p.system.disturbance_vars = {"d"};
    p.system.dynamics = {parse_polynomial("x + d", {"x", "d"})};
    p.system.disturbance = FiniteSupportDist{{{{-0.1}, 0.5}, {{0.1}, 0.5}}};
    p.kind = ProblemKind::ReachAvoid;
    p.safe_set.conjuncts = {{parse_polynomial("x^2 - 1", {"x"}), Relation::LeZero}};
    p.target_set = SemialgebraicSet{
        {{parse_polynomial("(x - 0.3)^2 - 1/10000", {"x"}), Relation::LeZero}}};
    p.x0 = {0.1};
    p.horizon = 2;
    validate_system(p.system);
    REQUIRE(exact_probability(p, 2) == Approx(0.25).margin(1e-12));
}

TEST_CASE("confidence intervals cover the exact value") {
    ProblemSpec p;
    p.system.state_vars = {"x"};
    p.system.disturbance_vars = {"d"};
    p.system.dynamics = {parse_polynomial("x + d", {"x", "d"})};
    p.system.disturbance =
        FiniteSupportDist{{{{-0.1}, 1.0 / 3}, {{0.0}, 1.0 / 3}, {{0.1}, 1.0 / 3}}};
    p.kind = ProblemKind::Safety;
    p.safe_set.conjuncts = {{parse_polynomial("x^2 - 1", {"x"}), Relation::LeZero}};
    p.x0 = {0.8};
    p.horizon = 10;
    validate_system(p.system);

    double exact = exact_probability(p, 10);
    REQUIRE(exact > 0.001);
    REQUIRE(exact < 0.5);

    int covered = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        auto r = simulate_event(p, 2000, seed);
        if (r.ci_lo <= exact && exact <= r.ci_hi) ++covered;
    }
    REQUIRE(covered >= 99);
}
