#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "stochcert/bounds.hpp"

using namespace stochcert;
using Catch::Approx;

namespace {

// Closed form under test vs the step-by-step chain. The product-form branches
// 1-(1-v0)(1-beta)^N satisfy the same recurrence with alpha' = 1/(1-beta),
// so they are checked through that substitution.
double oracle_for_upper(double v0, double alpha, double beta, unsigned N, bool product) {
    if (product) return recursion_oracle(v0, std::nullopt, 1.0 / (1.0 - beta), beta, N,
                                         ChainDirection::Upper);
    return recursion_oracle(v0, std::nullopt, alpha, beta, N, ChainDirection::Upper);
}

void require_close(double a, double b) {
    REQUIRE(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)));
}

}  // namespace

TEST_CASE("parameter validation per kind") {
    REQUIRE(validate_certificate_params(BoundKind::SafetyUpperT1, 1.0, 0.0) ==
            "alpha=1, gamma in [0,1]: linear form");
    REQUIRE_THROWS_WITH(validate_certificate_params(BoundKind::RALower, 1.0, 0.5, 1.0),
                        Catch::Matchers::ContainsSubstring("cannot equal 1"));
    REQUIRE_THROWS_WITH(validate_certificate_params(BoundKind::SafetyLower, 1.0, 0.0, 1.0),
                        Catch::Matchers::ContainsSubstring("beta>0 required when alpha=1"));

    REQUIRE_THROWS_AS(validate_certificate_params(BoundKind::SafetyUpperT1, 0.0, 0.0),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(validate_certificate_params(BoundKind::SafetyUpperT1, 1.5, 0.0),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(validate_certificate_params(BoundKind::SafetyUpperT1, 1.0, 1.5),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(validate_certificate_params(BoundKind::SafetyUpperKushner, 0.9, 0.0),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(validate_certificate_params(BoundKind::SafetyUpperKushner, 2.0, -0.1),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(validate_certificate_params(BoundKind::RAUpperT3, 1.0, -0.01),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(validate_certificate_params(BoundKind::RALower, 0.9, 0.5, 1.0),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(validate_certificate_params(BoundKind::RALower, 1.5, -0.6, 1.0),
                      std::invalid_argument);

    REQUIRE_THROWS_WITH(validate_certificate_params(BoundKind::SafetyLower, 1.5, 0.0),
                        Catch::Matchers::ContainsSubstring("require M"));
    REQUIRE_THROWS_AS(validate_certificate_params(BoundKind::SafetyUpperT1, 1.0, 0.0, 1.0),
                      std::invalid_argument);

    REQUIRE(validate_certificate_params(BoundKind::SafetyUpperT1, 1.0, -0.1)
                .find("product") != std::string::npos);
    REQUIRE(validate_certificate_params(BoundKind::SafetyLower, 1.0, 0.5, 1.0)
                .find("probability one") != std::string::npos);
}

TEST_CASE("kind names round trip") {
    for (BoundKind k :
         {BoundKind::SafetyUpperT1, BoundKind::SafetyUpperKushner, BoundKind::SafetyLower,
          BoundKind::RAUpperT3, BoundKind::RAUpperKushner, BoundKind::RALower})
        REQUIRE(parse_kind(kind_name(k)) == k);
    REQUIRE_THROWS_AS(parse_kind("nonsense"), std::invalid_argument);
}

TEST_CASE("safety upper bound, contraction-permitting form") {
    REQUIRE(upper_bound_safety_t1(0.5, 1.0, 0.0, 30).raw_value == Approx(0.5));
    REQUIRE(std::abs(upper_bound_safety_t1(0.04, 1.0, 1.0 / 300.0, 30).raw_value - 0.14) <=
            1e-12);
    REQUIRE(upper_bound_safety_t1(0.03, 1.0 / 1.1, 0.001, 30).raw_value ==
            Approx(0.687976).margin(1e-5));
    REQUIRE(upper_bound_safety_t1(0.5, 1.0, -0.1, 2).raw_value == Approx(0.395));
    REQUIRE(upper_bound_safety_t1(0.5, 1.0, -0.1, 2).case_tag.find("product") !=
            std::string::npos);
    REQUIRE_THROWS_AS(upper_bound_safety_t1(-0.1, 1.0, 0.0, 5), std::invalid_argument);
}

TEST_CASE("safety upper bound, expansion-permitting form") {
    REQUIRE(upper_bound_safety_kushner(0.5, 2.0, 0.0, 10).raw_value == Approx(0.5));
    REQUIRE(upper_bound_safety_kushner(0.2, 2.0, 0.6, 1).raw_value == Approx(0.7));
    REQUIRE(upper_bound_safety_kushner(0.5, 1.0, 0.01, 10).raw_value == Approx(0.6));
    REQUIRE_THROWS_WITH(upper_bound_safety_kushner(1.0, 2.0, 0.5, 5),
                        Catch::Matchers::ContainsSubstring("< 1"));
}

TEST_CASE("safety lower bound") {
    REQUIRE(lower_bound_safety(0.7, 0.7, 1.0, 0.1, 12).raw_value == Approx(1.0));
    REQUIRE(lower_bound_safety(1.0, 1.0, 1.3, 0.0, 7).raw_value == Approx(1.0));
    REQUIRE(lower_bound_safety(0.0, 1.0, 1.0, 0.1, 9).raw_value == Approx(0.0).margin(1e-14));
    REQUIRE(lower_bound_safety(0.5, 1.0, 1.1, 0.0, 50).raw_value ==
            Approx(0.4961).margin(1e-4));
    REQUIRE_THROWS_AS(lower_bound_safety(1.2, 1.0, 1.1, 0.0, 5), std::invalid_argument);
}

TEST_CASE("reach-avoid upper bound, contraction-permitting form") {
    REQUIRE(upper_bound_ra_t3(0.3, 1.0, 0.0, 30).raw_value == Approx(0.3));
    REQUIRE(upper_bound_ra_t3(0.1, 1.0, 0.01, 30).raw_value == Approx(0.4));
    auto r = upper_bound_ra_t3(0.05, 1.0 / 1.1, 0.001, 30);
    REQUIRE(r.raw_value == Approx(1.0370).margin(1e-4));
    REQUIRE(r.clamped_value == 1.0);
}

TEST_CASE("reach-avoid upper bound, expansion-permitting form") {
    REQUIRE(upper_bound_ra_kushner(0.0, 2.0, 0.0, 5).raw_value == Approx(0.0).margin(1e-14));
    REQUIRE(upper_bound_ra_kushner(0.1, 2.0, 0.8, 1).raw_value == Approx(0.85));
    REQUIRE(upper_bound_ra_kushner(0.0, 2.0, 0.3, 1).raw_value == Approx(0.3));
    REQUIRE_THROWS_AS(upper_bound_ra_kushner(1.1, 2.0, 0.5, 5), std::invalid_argument);
}

TEST_CASE("reach-avoid lower bound") {
    REQUIRE(lower_bound_ra(1.0, 1.0, 1.06, 0.0, 17).raw_value == Approx(1.0));
    auto r = lower_bound_ra(0.0, 1.0, 1.06, 0.0, 50);
    REQUIRE(r.raw_value == Approx(-0.054).margin(1e-3));
    REQUIRE(r.clamped_value == 0.0);
    REQUIRE(lower_bound_ra(0.5, 1.0, 1.06, 0.0, 50).raw_value == Approx(0.4730).margin(1e-4));
}

TEST_CASE("recursion oracle fixed points") {
    REQUIRE(recursion_oracle(0.37, std::nullopt, 1.0, 0.0, 25, ChainDirection::Upper) ==
            Approx(0.37));
    REQUIRE(recursion_oracle(1.0, 1.0, 1.1, 0.0, 40, ChainDirection::Lower) == Approx(1.0));
    require_close(recursion_oracle(0.03, std::nullopt, 1.0 / 1.1, 0.001, 30,
                                   ChainDirection::Upper),
                  upper_bound_safety_t1(0.03, 1.0 / 1.1, 0.001, 30).raw_value);
}

TEST_CASE("closed forms agree with the recursion oracle") {
    std::mt19937_64 rng(20240817);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto maybe_one = [&](double lo, double hi) {
        return u01(rng) < 0.3 ? 1.0 : lo + (hi - lo) * u01(rng);
    };
    std::uniform_int_distribution<unsigned> nd(0, 60);

    SECTION("safety upper, contraction-permitting") {
        for (int i = 0; i < 1000; ++i) {
            double alpha = maybe_one(0.05, 1.0);
            double beta = -2.0 + 3.0 * u01(rng);
            double v0 = 3.0 * u01(rng);
            unsigned N = nd(rng);
            auto rep = upper_bound_safety_t1(v0, alpha, beta, N);
            bool product = gamma_of(alpha, beta) < 0.0;
            require_close(rep.raw_value, oracle_for_upper(v0, alpha, beta, N, product));
        }
    }
    SECTION("safety upper, expansion-permitting") {
        for (int i = 0; i < 1000; ++i) {
            double alpha = maybe_one(1.0, 3.0);
            double beta = u01(rng);
            double v0 = 0.999 * u01(rng);
            unsigned N = nd(rng);
            auto rep = upper_bound_safety_kushner(v0, alpha, beta, N);
            bool product = alpha > 1.0 && gamma_of(alpha, beta) <= 0.0;
            require_close(rep.raw_value, oracle_for_upper(v0, alpha, beta, N, product));
        }
    }
    SECTION("safety lower") {
        for (int i = 0; i < 1000; ++i) {
            double alpha = maybe_one(1.01, 3.0);
            double beta = alpha == 1.0 ? 0.01 + 1.99 * u01(rng)
                                       : (1.0 - alpha) + 0.01 + 2.0 * u01(rng);
            double M = -1.0 + 3.0 * u01(rng);
            double v0 = M - 2.0 * u01(rng);
            unsigned N = nd(rng);
            auto rep = lower_bound_safety(v0, M, alpha, beta, N);
            require_close(rep.raw_value,
                          recursion_oracle(v0, M, alpha, beta, N, ChainDirection::Lower));
        }
    }
    SECTION("reach-avoid upper, contraction-permitting") {
        for (int i = 0; i < 1000; ++i) {
            double alpha = maybe_one(0.05, 1.0);
            double beta = u01(rng);
            double v0 = 2.0 * u01(rng);
            unsigned N = nd(rng);
            auto rep = upper_bound_ra_t3(v0, alpha, beta, N);
            require_close(rep.raw_value, oracle_for_upper(v0, alpha, beta, N, false));
        }
    }
    SECTION("reach-avoid upper, expansion-permitting") {
        for (int i = 0; i < 1000; ++i) {
            double alpha = maybe_one(1.0, 3.0);
            double beta = u01(rng);
            double v0 = 0.999 * u01(rng);
            unsigned N = nd(rng);
            auto rep = upper_bound_ra_kushner(v0, alpha, beta, N);
            bool product = alpha > 1.0 && beta * alpha / (alpha - 1.0) <= 1.0;
            require_close(rep.raw_value, oracle_for_upper(v0, alpha, beta, N, product));
        }
    }
    SECTION("reach-avoid lower") {
        for (int i = 0; i < 1000; ++i) {
            double alpha = 1.01 + 2.0 * u01(rng);
            double beta = (1.0 - alpha) + 0.01 + 2.0 * u01(rng);
            double M = -1.0 + 3.0 * u01(rng);
            double v0 = M - 2.0 * u01(rng);
            unsigned N = nd(rng);
            auto rep = lower_bound_ra(v0, M, alpha, beta, N);
            require_close(rep.raw_value,
                          recursion_oracle(v0, M, alpha, beta, N, ChainDirection::Lower));
        }
    }
}

TEST_CASE("reversed-sign condition never exceeds zero") {
    auto r1 = reversed_sign_bounds(0.0, 1.0, -0.1, 5);
    REQUIRE(r1.raw_value == Approx(-0.5));
    REQUIRE(r1.clamped_value == 0.0);
    REQUIRE(reversed_sign_bounds(-0.2, 0.9, -0.2, 3).raw_value < 0.0);
    REQUIRE(reversed_sign_bounds(0.0, 1.0, 0.0, 12).raw_value == Approx(0.0).margin(1e-14));

    std::mt19937_64 rng(5150);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_int_distribution<unsigned> nd(0, 50);
    for (int i = 0; i < 1000; ++i) {
        double alpha = u01(rng) < 0.3 ? 1.0 : 0.05 + 0.95 * u01(rng);
        double beta = -2.0 + 3.0 * u01(rng);
        double v0 = -3.0 * u01(rng);
        auto rep = reversed_sign_bounds(v0, alpha, beta, nd(rng));
        REQUIRE(rep.raw_value <= 1e-12);
        REQUIRE(rep.clamped_value == 0.0);
    }
}

TEST_CASE("horizon monotonicity where the formulas force it") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        double beta = u01(rng), v0 = u01(rng);
        double prev = -1.0;
        for (unsigned N = 0; N <= 20; N += 4) {
            double b = upper_bound_safety_t1(v0, 1.0, beta, N).raw_value;
            REQUIRE(b >= prev - 1e-12);
            prev = b;
        }
    }
    for (int i = 0; i < 100; ++i) {
        double beta = 0.01 + u01(rng), M = u01(rng) + 0.5, v0 = M * u01(rng);
        double prev = -std::numeric_limits<double>::infinity();
        for (unsigned N = 0; N <= 20; N += 4) {
            double b = lower_bound_safety(v0, M, 1.0, beta, N).raw_value;
            REQUIRE(b >= prev - 1e-12);
            prev = b;
        }
    }
}

TEST_CASE("zero horizon degenerates to v0") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        double v0 = u01(rng) * 0.9;
        REQUIRE(upper_bound_safety_t1(v0, 0.5 + 0.5 * u01(rng), u01(rng), 0).raw_value ==
                Approx(v0));
        REQUIRE(upper_bound_safety_kushner(v0, 1.0 + u01(rng), u01(rng), 0).raw_value ==
                Approx(v0));
        REQUIRE(upper_bound_ra_t3(v0, 0.5 + 0.5 * u01(rng), u01(rng), 0).raw_value ==
                Approx(v0));
        REQUIRE(upper_bound_ra_kushner(v0, 1.0 + u01(rng), u01(rng), 0).raw_value ==
                Approx(v0));

        double alpha = 1.1 + u01(rng), beta = u01(rng), M = 1.0, w0 = u01(rng);
        double expect = ((alpha * w0 - M) * (alpha - 1.0) + beta * (alpha - 1.0)) /
                        ((alpha + beta - 1.0) * (alpha - 1.0));
        require_close(lower_bound_safety(w0, M, alpha, beta, 0).raw_value, expect);
        require_close(lower_bound_ra(w0, M, alpha, beta, 0).raw_value,
                      recursion_oracle(w0, M, alpha, beta, 0, ChainDirection::Lower));
    }
}

TEST_CASE("report bookkeeping") {
    auto rep = upper_bound_safety_t1(0.04, 1.0, 1.0 / 300.0, 30);
    REQUIRE(rep.kind == BoundKind::SafetyUpperT1);
    REQUIRE(rep.gamma == Approx(1.0 / 300.0));
    REQUIRE(rep.v0 == Approx(0.04));
    REQUIRE(rep.N == 30);
    REQUIRE_FALSE(rep.M.has_value());
    REQUIRE(rep.clamped_value == Approx(std::min(1.0, std::max(0.0, rep.raw_value))));

    auto low = lower_bound_safety(0.5, 1.0, 1.1, 0.0, 50);
    REQUIRE(low.M.has_value());
    REQUIRE(*low.M == Approx(1.0));
}
