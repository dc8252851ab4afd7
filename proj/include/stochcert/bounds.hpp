// Closed-form probability bounds derived from certificate parameters.
//
// Six bound kinds cover upper and lower bounds for the exit (safety) event
// and the reach-avoid event. Each evaluator validates its parameter ranges,
// dispatches on the case quantity gamma = beta*alpha - (alpha-1), reports the
// raw formula value plus a [0,1]-clamped value, and is cross-checked against
// an independent recursion oracle that replays the underlying expectation
// telescoping step by step.

#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "polynomial.hpp"

namespace stochcert {

enum class BoundKind {
    SafetyUpperT1,
    SafetyUpperKushner,
    SafetyLower,
    RAUpperT3,
    RAUpperKushner,
    RALower,
};

inline bool is_lower_kind(BoundKind k) {
    return k == BoundKind::SafetyLower || k == BoundKind::RALower;
}

inline bool is_safety_kind(BoundKind k) {
    return k == BoundKind::SafetyUpperT1 || k == BoundKind::SafetyUpperKushner ||
           k == BoundKind::SafetyLower;
}

inline std::string kind_name(BoundKind k) {
    switch (k) {
        case BoundKind::SafetyUpperT1: return "safety-upper-t1";
        case BoundKind::SafetyUpperKushner: return "safety-upper-kushner";
        case BoundKind::SafetyLower: return "safety-lower";
        case BoundKind::RAUpperT3: return "ra-upper-t3";
        case BoundKind::RAUpperKushner: return "ra-upper-kushner";
        case BoundKind::RALower: return "ra-lower";
    }
    throw std::logic_error("unreachable");
}

inline BoundKind parse_kind(const std::string& s) {
    for (BoundKind k :
         {BoundKind::SafetyUpperT1, BoundKind::SafetyUpperKushner, BoundKind::SafetyLower,
          BoundKind::RAUpperT3, BoundKind::RAUpperKushner, BoundKind::RALower})
        if (kind_name(k) == s) return k;
    throw std::invalid_argument("unknown bound kind '" + s + "'");
}

// A candidate certificate: the polynomial v plus the parameters tying it to
// one bound kind. M is a certified upper bound on v over the extended domain,
// required by the lower-bound kinds only.
struct Certificate {
    Polynomial v;
    BoundKind kind = BoundKind::SafetyUpperT1;
    double alpha = 1.0;
    double beta = 0.0;
    std::optional<double> M;
};

struct BoundReport {
    BoundKind kind = BoundKind::SafetyUpperT1;
    std::string case_tag;
    double gamma = 0.0;
    double raw_value = 0.0;
    double clamped_value = 0.0;
    double v0 = 0.0;
    double alpha = 1.0;
    double beta = 0.0;
    std::optional<double> M;
    unsigned N = 0;
};

inline double gamma_of(double alpha, double beta) { return beta * alpha - (alpha - 1.0); }

// Parameter-range validation shared by evaluators and synthesis. Returns the
// case tag of the formula branch that will fire; throws on invalid ranges.
inline std::string validate_certificate_params(BoundKind kind, double alpha, double beta,
                                               std::optional<double> M = std::nullopt) {
    const double g = gamma_of(alpha, beta);
    auto need = [](bool ok, const std::string& msg) {
        if (!ok) throw std::invalid_argument(msg);
    };
    if (is_lower_kind(kind))
        need(M.has_value(), "lower-bound kinds require M");
    else
        need(!M.has_value(), "M is only meaningful for lower-bound kinds");

    switch (kind) {
        case BoundKind::SafetyUpperT1:
            need(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0,1]");
            need(beta <= 1.0, "beta must be <= 1");
            if (g < 0.0) return "gamma<0: product form";
            if (alpha == 1.0) return "alpha=1, gamma in [0,1]: linear form";
            return "alpha in (0,1), gamma in [0,1]: geometric form";
        case BoundKind::SafetyUpperKushner:
            need(alpha >= 1.0, "alpha must be >= 1");
            need(beta >= 0.0 && beta <= 1.0, "beta must lie in [0,1]");
            if (alpha == 1.0) return "alpha=1: linear form";
            if (g <= 0.0) return "alpha>1, gamma<=0: product form";
            return "alpha>1, gamma>0: geometric form";
        case BoundKind::SafetyLower:
            need(alpha >= 1.0, "alpha must be >= 1");
            if (alpha == 1.0)
                need(beta > 0.0, "beta>0 required when alpha=1");
            else
                need(beta > 1.0 - alpha, "beta must be > 1-alpha");
            if (alpha == 1.0)
                return "alpha=1: mean-exit form (a valid certificate implies eventual "
                       "exit with probability one)";
            return "alpha>1: geometric-sum form";
        case BoundKind::RAUpperT3:
            need(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0,1]");
            need(beta >= 0.0 && beta <= 1.0, "beta must lie in [0,1]");
            if (alpha == 1.0) return "alpha=1: linear form";
            return "alpha in (0,1): geometric form";
        case BoundKind::RAUpperKushner:
            need(alpha >= 1.0, "alpha must be >= 1");
            need(beta >= 0.0 && beta <= 1.0, "beta must lie in [0,1]");
            if (alpha == 1.0) return "alpha=1: linear form";
            if (beta * alpha / (alpha - 1.0) > 1.0) return "alpha>1, ratio>1: geometric form";
            return "alpha>1, ratio<=1: product form";
        case BoundKind::RALower:
            need(alpha != 1.0, "alpha cannot equal 1");
            need(alpha > 1.0, "alpha must be > 1");
            need(beta > 1.0 - alpha, "beta must be > 1-alpha");
            return "alpha>1: geometric-sum form";
    }
    throw std::logic_error("unreachable");
}

namespace detail {

inline double linear_form(double v0, double beta, unsigned N) { return v0 + beta * N; }

inline double geometric_form(double v0, double alpha, double beta, unsigned N) {
    double an = std::pow(alpha, -static_cast<double>(N));
    return v0 * an + (1.0 - an) * alpha * beta / (alpha - 1.0);
}

inline double product_form(double v0, double beta, unsigned N) {
    return 1.0 - (1.0 - v0) * std::pow(1.0 - beta, static_cast<double>(N));
}

inline double lower_form_gt1(double v0, double M, double alpha, double beta, unsigned N) {
    double an1 = std::pow(alpha, static_cast<double>(N) + 1.0);
    return ((an1 * v0 - M) * (alpha - 1.0) + beta * (an1 - 1.0)) /
           ((alpha + beta - 1.0) * (an1 - 1.0));
}

inline double lower_form_eq1(double v0, double M, double beta, unsigned N) {
    return 1.0 + (v0 - M) / (beta * (static_cast<double>(N) + 1.0));
}

inline double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

inline BoundReport make_report(BoundKind kind, std::string tag, double raw, double v0,
                               double alpha, double beta, std::optional<double> M, unsigned N) {
    BoundReport r;
    r.kind = kind;
    r.case_tag = std::move(tag);
    r.gamma = gamma_of(alpha, beta);
    r.raw_value = raw;
    r.clamped_value = clamp01(raw);
    r.v0 = v0;
    r.alpha = alpha;
    r.beta = beta;
    r.M = M;
    r.N = N;
    return r;
}

}  // namespace detail

inline BoundReport upper_bound_safety_t1(double v0, double alpha, double beta, unsigned N) {
    std::string tag = validate_certificate_params(BoundKind::SafetyUpperT1, alpha, beta);
    if (v0 < 0.0) throw std::invalid_argument("v(x0) must be nonnegative");
    double g = gamma_of(alpha, beta);
    double raw;
    if (g < 0.0)
        raw = detail::product_form(v0, beta, N);
    else if (alpha == 1.0)
        raw = detail::linear_form(v0, beta, N);
    else
        raw = detail::geometric_form(v0, alpha, beta, N);
    return detail::make_report(BoundKind::SafetyUpperT1, std::move(tag), raw, v0, alpha, beta,
                               std::nullopt, N);
}

inline BoundReport upper_bound_safety_kushner(double v0, double alpha, double beta, unsigned N) {
    std::string tag = validate_certificate_params(BoundKind::SafetyUpperKushner, alpha, beta);
    if (v0 >= 1.0) throw std::invalid_argument("v(x0) must be < 1");
    double g = gamma_of(alpha, beta);
    double raw;
    if (alpha == 1.0)
        raw = detail::linear_form(v0, beta, N);
    else if (g <= 0.0)
        raw = detail::product_form(v0, beta, N);
    else
        raw = detail::geometric_form(v0, alpha, beta, N);
    return detail::make_report(BoundKind::SafetyUpperKushner, std::move(tag), raw, v0, alpha,
                               beta, std::nullopt, N);
}

inline BoundReport lower_bound_safety(double v0, double M, double alpha, double beta,
                                      unsigned N) {
    std::string tag = validate_certificate_params(BoundKind::SafetyLower, alpha, beta, M);
    if (v0 > M) throw std::invalid_argument("v(x0) must be <= M");
    double raw = alpha == 1.0 ? detail::lower_form_eq1(v0, M, beta, N)
                              : detail::lower_form_gt1(v0, M, alpha, beta, N);
    return detail::make_report(BoundKind::SafetyLower, std::move(tag), raw, v0, alpha, beta, M,
                               N);
}

inline BoundReport upper_bound_ra_t3(double v0, double alpha, double beta, unsigned N) {
    std::string tag = validate_certificate_params(BoundKind::RAUpperT3, alpha, beta);
    double raw = alpha == 1.0 ? detail::linear_form(v0, beta, N)
                              : detail::geometric_form(v0, alpha, beta, N);
    return detail::make_report(BoundKind::RAUpperT3, std::move(tag), raw, v0, alpha, beta,
                               std::nullopt, N);
}

inline BoundReport upper_bound_ra_kushner(double v0, double alpha, double beta, unsigned N) {
    std::string tag = validate_certificate_params(BoundKind::RAUpperKushner, alpha, beta);
    if (v0 >= 1.0) throw std::invalid_argument("v(x0) must be < 1");
    double raw;
    if (alpha == 1.0)
        raw = detail::linear_form(v0, beta, N);
    else if (beta * alpha / (alpha - 1.0) > 1.0)
        raw = detail::geometric_form(v0, alpha, beta, N);
    else
        raw = detail::product_form(v0, beta, N);
    return detail::make_report(BoundKind::RAUpperKushner, std::move(tag), raw, v0, alpha, beta,
                               std::nullopt, N);
}

inline BoundReport lower_bound_ra(double v0, double M, double alpha, double beta, unsigned N) {
    std::string tag = validate_certificate_params(BoundKind::RALower, alpha, beta, M);
    if (v0 > M) throw std::invalid_argument("v(x0) must be <= M");
    double raw = detail::lower_form_gt1(v0, M, alpha, beta, N);
    return detail::make_report(BoundKind::RALower, std::move(tag), raw, v0, alpha, beta, M, N);
}

enum class ChainDirection { Upper, Lower };

// Independent cross-check: replays the expectation chains underlying the
// closed forms. Upper: iterate u <- u/alpha + beta for N steps. Lower: the
// explicit summation (alpha^{N+1} v0 + beta*sum alpha^i - M) normalized by
// (alpha+beta-1)*sum alpha^i. Agreement with the closed forms is a test
// invariant, not an implementation dependency.
inline double recursion_oracle(double v0, std::optional<double> M, double alpha, double beta,
                               unsigned N, ChainDirection direction) {
    if (alpha <= 0.0) throw std::invalid_argument("alpha must be positive");
    if (direction == ChainDirection::Upper) {
        double u = v0;
        for (unsigned k = 0; k < N; ++k) u = u / alpha + beta;
        return u;
    }
    if (!M) throw std::invalid_argument("lower chain requires M");
    double sum = 0.0, apow = 1.0;
    for (unsigned i = 0; i <= N; ++i) {
        sum += apow;
        apow *= alpha;
    }
    // apow is now alpha^{N+1}.
    return (apow * v0 + beta * sum - *M) / ((alpha + beta - 1.0) * sum);
}

// Sign-reversed variant of the exit upper-bound condition. Kept only to
// demonstrate that it never produces a useful (positive) lower bound: under
// its preconditions every raw value is <= 0, so the clamped bound is 0.
inline BoundReport reversed_sign_bounds(double v0, double alpha, double beta, unsigned N) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0,1]");
    if (v0 > 0.0) throw std::invalid_argument("v(x0) must be <= 0");
    double g = gamma_of(alpha, beta);
    double raw;
    std::string tag;
    if (g < 0.0 && alpha == 1.0) {
        raw = detail::linear_form(v0, beta, N);
        tag = "alpha=1, gamma<0: linear form";
    } else if (g < 0.0) {
        raw = detail::geometric_form(v0, alpha, beta, N);
        tag = "alpha in (0,1), gamma<0: geometric form";
    } else {
        raw = 1.0 - (1.0 - v0) * std::pow(alpha, -static_cast<double>(N));
        tag = "gamma>=0: reversed product form";
    }
    return detail::make_report(BoundKind::SafetyLower, std::move(tag), raw, v0, alpha, beta,
                               std::nullopt, N);
}

}  // namespace stochcert
