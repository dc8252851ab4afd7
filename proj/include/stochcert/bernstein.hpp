// Bernstein-form range enclosures for polynomials over axis-aligned boxes.
//
// A polynomial restricted to a box is rewritten in the tensor-product
// Bernstein basis; the coefficients then bracket the range of the polynomial
// on that box (min coefficient <= p(x) <= max coefficient for all x in the
// box) and coefficients at corner multi-indices equal the values of p at the
// box corners. Degree elevation (asking for a per-variable degree above the
// true degree) tightens the enclosure.

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "polynomial.hpp"

namespace stochcert {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dim() const { return lo.size(); }

    double width(std::size_t i) const { return hi[i] - lo[i]; }

    double max_width() const {
        double w = 0.0;
        for (std::size_t i = 0; i < dim(); ++i) w = std::max(w, width(i));
        return w;
    }

    std::vector<double> center() const {
        std::vector<double> c(dim());
        for (std::size_t i = 0; i < dim(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
        return c;
    }

    bool contains(std::span<const double> x, double slack = 0.0) const {
        for (std::size_t i = 0; i < dim(); ++i)
            if (x[i] < lo[i] - slack || x[i] > hi[i] + slack) return false;
        return true;
    }

    // Split along axis `i` at the midpoint.
    std::pair<Box, Box> split(std::size_t i) const {
        Box a = *this, b = *this;
        double mid = 0.5 * (lo[i] + hi[i]);
        a.hi[i] = mid;
        b.lo[i] = mid;
        return {a, b};
    }
};

namespace detail {

inline const std::vector<double>& binomial_row(unsigned n) {
    static std::vector<std::vector<double>> rows{{1.0}};
    while (rows.size() <= n) {
        const auto& prev = rows.back();
        std::vector<double> next(prev.size() + 1, 1.0);
        for (std::size_t k = 1; k + 1 < next.size(); ++k)
            next[k] = prev[k - 1] + prev[k];
        rows.push_back(std::move(next));
    }
    return rows[n];
}

}  // namespace detail

// Tensor-product Bernstein coefficients of a polynomial on a box.
struct BernsteinForm {
    Box box;
    std::vector<unsigned> degree;   // per-variable basis degree
    std::vector<double> coeffs;     // flat tensor, strides below
    std::vector<std::size_t> stride;

    double min_coeff = 0.0;
    double max_coeff = 0.0;

    Interval enclosure() const { return {min_coeff, max_coeff}; }

    std::size_t flat_index(std::span<const unsigned> idx) const {
        std::size_t f = 0;
        for (std::size_t i = 0; i < idx.size(); ++i) f += idx[i] * stride[i];
        return f;
    }

    // Exact value of the polynomial at a box corner: corner k (bitmask over
    // axes, bit set = upper face) corresponds to the coefficient whose
    // multi-index is 0 or degree[i] per axis.
    double corner_value(std::size_t corner_mask) const {
        std::size_t f = 0;
        for (std::size_t i = 0; i < degree.size(); ++i)
            if (corner_mask >> i & 1) f += degree[i] * stride[i];
        return coeffs[f];
    }

    std::vector<double> corner_point(std::size_t corner_mask) const {
        std::vector<double> x(box.dim());
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] = (corner_mask >> i & 1) ? box.hi[i] : box.lo[i];
        return x;
    }
};

// Compute the Bernstein form of `p` on `box`. If `elevate` is nonzero the
// basis degree per variable is raised by that amount above the polynomial's
// actual per-variable degree.
inline BernsteinForm bernstein_form(const Polynomial& p, const Box& box,
                                    unsigned elevate = 0) {
    const std::size_t n = p.vars.size();
    if (box.dim() != n)
        throw std::invalid_argument("box dimension does not match polynomial arity");

    // Affine change of variables onto the unit box.
    std::map<std::string, Polynomial> sub;
    for (std::size_t i = 0; i < n; ++i) {
        Polynomial u = Polynomial::variable(p.vars[i], p.vars);
        sub.emplace(p.vars[i], Polynomial::constant(box.lo[i], p.vars) + u * box.width(i));
    }
    Polynomial q = compose(p, sub).reindexed(p.vars);

    BernsteinForm bf;
    bf.box = box;
    bf.degree = q.per_var_degree();
    {
        // The unit-box polynomial can have lower per-variable degree than p
        // (cancellation); elevate relative to p's degrees so callers get a
        // predictable basis size.
        auto pd = p.per_var_degree();
        for (std::size_t i = 0; i < n; ++i)
            bf.degree[i] = std::max(bf.degree[i], pd[i]) + elevate;
    }

    bf.stride.assign(n, 1);
    std::size_t total = 1;
    for (std::size_t i = n; i-- > 0;) {
        bf.stride[i] = total;
        total *= bf.degree[i] + 1;
    }
    if (n == 0) total = 1;

    // Dense power-basis tensor of q.
    std::vector<double> a(total, 0.0);
    for (const auto& [e, c] : q.terms) {
        std::size_t f = 0;
        for (std::size_t i = 0; i < n; ++i) f += e[i] * bf.stride[i];
        a[f] += c;
    }

    // Axis-by-axis basis conversion: b_j = sum_{k<=j} C(j,k)/C(d,k) * a_k.
    std::vector<double> b(total, 0.0);
    for (std::size_t axis = 0; axis < n; ++axis) {
        const unsigned d = bf.degree[axis];
        const std::size_t st = bf.stride[axis];
        const auto& crow_d = detail::binomial_row(d);
        std::fill(b.begin(), b.end(), 0.0);
        // Iterate over all lines parallel to `axis`.
        const std::size_t line_len = d + 1;
        const std::size_t num_lines = total / line_len;
        for (std::size_t line = 0; line < num_lines; ++line) {
            // Decompose line index into the flat offset with axis removed.
            std::size_t rem = line, base = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (i == axis) continue;
                std::size_t extent = bf.degree[i] + 1;
                base += (rem % extent) * bf.stride[i];
                rem /= extent;
            }
            for (unsigned j = 0; j <= d; ++j) {
                const auto& crow_j = detail::binomial_row(j);
                double s = 0.0;
                for (unsigned k = 0; k <= j; ++k)
                    s += crow_j[k] / crow_d[k] * a[base + k * st];
                b[base + j * st] = s;
            }
        }
        a.swap(b);
    }

    bf.coeffs = std::move(a);
    bf.min_coeff = std::numeric_limits<double>::infinity();
    bf.max_coeff = -std::numeric_limits<double>::infinity();
    for (double c : bf.coeffs) {
        bf.min_coeff = std::min(bf.min_coeff, c);
        bf.max_coeff = std::max(bf.max_coeff, c);
    }
    if (bf.coeffs.empty()) bf.min_coeff = bf.max_coeff = 0.0;
    return bf;
}

// Raise the basis degree of an existing form to the given per-variable
// target without changing the represented polynomial. Needed when several
// polynomials must share one coefficient basis (e.g. linear-programming rows
// built from affine combinations of Bernstein coefficient vectors).
inline BernsteinForm elevate_form_to(BernsteinForm bf, const std::vector<unsigned>& target) {
    const std::size_t n = bf.degree.size();
    if (target.size() != n) throw std::invalid_argument("target degree arity mismatch");
    for (std::size_t axis = 0; axis < n; ++axis)
        if (target[axis] < bf.degree[axis])
            throw std::invalid_argument("cannot lower a Bernstein basis degree");

    for (std::size_t axis = 0; axis < n; ++axis) {
        while (bf.degree[axis] < target[axis]) {
            const unsigned d = bf.degree[axis];
            std::vector<unsigned> nd = bf.degree;
            nd[axis] += 1;
            std::vector<std::size_t> nstride(n, 1);
            std::size_t ntotal = 1;
            for (std::size_t i = n; i-- > 0;) {
                nstride[i] = ntotal;
                ntotal *= nd[i] + 1;
            }
            if (n == 0) ntotal = 1;
            std::vector<double> nc(ntotal, 0.0);
            const std::size_t line_len = d + 1;
            const std::size_t num_lines = bf.coeffs.size() / line_len;
            for (std::size_t line = 0; line < num_lines; ++line) {
                std::size_t rem = line, base_old = 0, base_new = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (i == axis) continue;
                    std::size_t extent = bf.degree[i] + 1;
                    std::size_t digit = rem % extent;
                    base_old += digit * bf.stride[i];
                    base_new += digit * nstride[i];
                    rem /= extent;
                }
                for (unsigned j = 0; j <= d + 1; ++j) {
                    double v = 0.0;
                    if (j > 0)
                        v += static_cast<double>(j) / (d + 1) *
                             bf.coeffs[base_old + (j - 1) * bf.stride[axis]];
                    if (j <= d)
                        v += static_cast<double>(d + 1 - j) / (d + 1) *
                             bf.coeffs[base_old + j * bf.stride[axis]];
                    nc[base_new + j * nstride[axis]] = v;
                }
            }
            bf.coeffs = std::move(nc);
            bf.degree = std::move(nd);
            bf.stride = std::move(nstride);
        }
    }
    bf.min_coeff = std::numeric_limits<double>::infinity();
    bf.max_coeff = -std::numeric_limits<double>::infinity();
    for (double c : bf.coeffs) {
        bf.min_coeff = std::min(bf.min_coeff, c);
        bf.max_coeff = std::max(bf.max_coeff, c);
    }
    if (bf.coeffs.empty()) bf.min_coeff = bf.max_coeff = 0.0;
    return bf;
}

namespace detail {

inline Interval interval_pow(double lo, double hi, unsigned e) {
    if (e == 0) return {1.0, 1.0};
    double plo = Polynomial::ipow(lo, e), phi = Polynomial::ipow(hi, e);
    if (e % 2 == 1) return {plo, phi};
    if (lo >= 0.0) return {plo, phi};
    if (hi <= 0.0) return {phi, plo};
    return {0.0, std::max(plo, phi)};
}

}  // namespace detail

// Naive per-term interval evaluation of p over the box.
inline Interval interval_eval(const Polynomial& p, const Box& box) {
    Interval r{0.0, 0.0};
    for (const auto& [e, c] : p.terms) {
        double lo = c, hi = c;
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] == 0) continue;
            Interval f = detail::interval_pow(box.lo[i], box.hi[i], e[i]);
            double a = lo * f.lo, b = lo * f.hi, cc = hi * f.lo, d = hi * f.hi;
            lo = std::min(std::min(a, b), std::min(cc, d));
            hi = std::max(std::max(a, b), std::max(cc, d));
        }
        r.lo += lo;
        r.hi += hi;
    }
    return r;
}

// Tightest of the Bernstein and plain interval enclosures, per side. If
// rounding makes the intersection empty the Bernstein enclosure wins.
inline Interval interval_enclosure(const Polynomial& p, const Box& box,
                                   unsigned elevate = 0) {
    Interval bern = bernstein_form(p, box, elevate).enclosure();
    Interval ia = interval_eval(p, box);
    Interval r{std::max(bern.lo, ia.lo), std::min(bern.hi, ia.hi)};
    if (r.lo > r.hi) return bern;
    return r;
}

}  // namespace stochcert
