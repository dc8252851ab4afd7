// Sparse multivariate polynomials over named variables: arithmetic, parsing,
// printing, evaluation and symbolic composition. This is the carrier type for
// dynamics, certificate candidates and set-defining polynomials everywhere else.
//
// Representation: an ordered variable list plus a map from exponent vectors to
// double coefficients. Terms with |coefficient| < 1e-15 are dropped on
// normalization. All values are immutable in spirit: operations return new
// polynomials and nothing mutates shared state, so instances can be shared
// freely across threads.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stochcert {

using Exponents = std::vector<unsigned>;

inline constexpr double kCoeffDropEps = 1e-15;

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"),
          position(pos) {}
    std::size_t position;
};

class Polynomial {
public:
    std::vector<std::string> vars;
    std::map<Exponents, double> terms;

    Polynomial() = default;

    explicit Polynomial(std::vector<std::string> variables) : vars(std::move(variables)) {}

    static Polynomial constant(double c, std::vector<std::string> variables = {}) {
        Polynomial p(std::move(variables));
        if (std::abs(c) >= kCoeffDropEps)
            p.terms.emplace(Exponents(p.vars.size(), 0u), c);
        return p;
    }

    static Polynomial variable(const std::string& name,
                               const std::vector<std::string>& variables) {
        Polynomial p(variables);
        auto it = std::find(variables.begin(), variables.end(), name);
        if (it == variables.end())
            throw std::invalid_argument("variable '" + name + "' not in variable list");
        Exponents e(variables.size(), 0u);
        e[static_cast<std::size_t>(it - variables.begin())] = 1u;
        p.terms.emplace(std::move(e), 1.0);
        return p;
    }

    static Polynomial monomial(const std::vector<std::string>& variables,
                               Exponents exps, double coeff) {
        if (exps.size() != variables.size())
            throw std::invalid_argument("exponent arity does not match variable list");
        Polynomial p(variables);
        if (std::abs(coeff) >= kCoeffDropEps) p.terms.emplace(std::move(exps), coeff);
        return p;
    }

    bool is_zero() const { return terms.empty(); }

    bool is_constant() const {
        return terms.empty() ||
               (terms.size() == 1 && total_exponent(terms.begin()->first) == 0);
    }

    double constant_value() const {
        if (terms.empty()) return 0.0;
        auto it = terms.find(Exponents(vars.size(), 0u));
        return it == terms.end() ? 0.0 : it->second;
    }

    unsigned degree_in(std::size_t var_index) const {
        unsigned d = 0;
        for (const auto& [e, c] : terms) d = std::max(d, e[var_index]);
        return d;
    }

    std::vector<unsigned> per_var_degree() const {
        std::vector<unsigned> d(vars.size(), 0u);
        for (const auto& [e, c] : terms)
            for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::max(d[i], e[i]);
        return d;
    }

    unsigned total_degree() const {
        unsigned d = 0;
        for (const auto& [e, c] : terms) d = std::max(d, total_exponent(e));
        return d;
    }

    void normalize() {
        for (auto it = terms.begin(); it != terms.end();) {
            if (std::abs(it->second) < kCoeffDropEps)
                it = terms.erase(it);
            else
                ++it;
        }
    }

    // Point given in the order of `vars`.
    double eval(std::span<const double> point) const {
        if (point.size() != vars.size())
            throw std::invalid_argument("evaluation point arity mismatch");
        double acc = 0.0;
        for (const auto& [e, c] : terms) {
            double m = c;
            for (std::size_t i = 0; i < e.size(); ++i) m *= ipow(point[i], e[i]);
            acc += m;
        }
        return acc;
    }

    double eval(const std::map<std::string, double>& assignment) const {
        std::vector<double> point(vars.size());
        for (std::size_t i = 0; i < vars.size(); ++i) {
            auto it = assignment.find(vars[i]);
            if (it == assignment.end())
                throw std::invalid_argument("missing variable assignment: " + vars[i]);
            point[i] = it->second;
        }
        return eval(point);
    }

    Polynomial& operator+=(const Polynomial& rhs) { return *this = *this + rhs; }
    Polynomial& operator-=(const Polynomial& rhs) { return *this = *this - rhs; }
    Polynomial& operator*=(const Polynomial& rhs) { return *this = *this * rhs; }
    Polynomial& operator*=(double s) { return *this = *this * s; }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        return combined(a, b, +1.0);
    }
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
        return combined(a, b, -1.0);
    }
    Polynomial operator-() const { return *this * -1.0; }

    friend Polynomial operator*(const Polynomial& a, double s) {
        Polynomial r(a.vars);
        for (const auto& [e, c] : a.terms) {
            double v = c * s;
            if (std::abs(v) >= kCoeffDropEps) r.terms.emplace(e, v);
        }
        return r;
    }
    friend Polynomial operator*(double s, const Polynomial& a) { return a * s; }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        auto mv = merged_vars(a.vars, b.vars);
        Polynomial x = a.reindexed(mv), y = b.reindexed(mv), r(mv);
        for (const auto& [ea, ca] : x.terms)
            for (const auto& [eb, cb] : y.terms) {
                Exponents e(ea.size());
                for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
                r.terms[e] += ca * cb;
            }
        r.normalize();
        return r;
    }

    Polynomial pow(unsigned e) const {
        Polynomial r = Polynomial::constant(1.0, vars);
        for (unsigned i = 0; i < e; ++i) r = r * *this;
        return r;
    }

    // Express this polynomial over `new_vars` (a superset of the variables it
    // actually uses). Throws if a used variable is absent from new_vars.
    Polynomial reindexed(const std::vector<std::string>& new_vars) const {
        if (new_vars == vars) return *this;
        std::vector<std::ptrdiff_t> where(vars.size(), -1);
        for (std::size_t i = 0; i < vars.size(); ++i) {
            auto it = std::find(new_vars.begin(), new_vars.end(), vars[i]);
            if (it != new_vars.end()) where[i] = it - new_vars.begin();
        }
        Polynomial r(new_vars);
        for (const auto& [e, c] : terms) {
            Exponents ne(new_vars.size(), 0u);
            for (std::size_t i = 0; i < e.size(); ++i) {
                if (e[i] == 0) continue;
                if (where[i] < 0)
                    throw std::invalid_argument("variable '" + vars[i] +
                                                "' missing from target variable list");
                ne[static_cast<std::size_t>(where[i])] = e[i];
            }
            r.terms[ne] += c;
        }
        r.normalize();
        return r;
    }

    // Deterministic printable form; parse(str()) reproduces the polynomial.
    std::string str() const {
        if (terms.empty()) return "0";
        std::string out;
        // Leading term first (reverse map order puts higher exponents first).
        for (auto it = terms.rbegin(); it != terms.rend(); ++it) {
            const auto& [e, c] = *it;
            double mag = std::abs(c);
            if (out.empty())
                out += (c < 0) ? "-" : "";
            else
                out += (c < 0) ? " - " : " + ";
            std::string mono = monomial_str(e);
            if (mono.empty()) {
                out += num_str(mag);
            } else {
                if (mag != 1.0) out += num_str(mag) + "*";
                out += mono;
            }
        }
        return out;
    }

    static std::vector<std::string> merged_vars(const std::vector<std::string>& a,
                                                const std::vector<std::string>& b) {
        std::vector<std::string> m = a;
        for (const auto& v : b)
            if (std::find(m.begin(), m.end(), v) == m.end()) m.push_back(v);
        return m;
    }

    static unsigned total_exponent(const Exponents& e) {
        unsigned s = 0;
        for (unsigned x : e) s += x;
        return s;
    }

    static double ipow(double x, unsigned e) {
        double r = 1.0;
        for (unsigned i = 0; i < e; ++i) r *= x;
        return r;
    }

private:
    static Polynomial combined(const Polynomial& a, const Polynomial& b, double sign) {
        auto mv = merged_vars(a.vars, b.vars);
        Polynomial r = a.reindexed(mv);
        Polynomial y = b.reindexed(mv);
        for (const auto& [e, c] : y.terms) r.terms[e] += sign * c;
        r.normalize();
        return r;
    }

    std::string monomial_str(const Exponents& e) const {
        std::string s;
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] == 0) continue;
            if (!s.empty()) s += "*";
            s += vars[i];
            if (e[i] > 1) s += "^" + std::to_string(e[i]);
        }
        return s;
    }

    static std::string num_str(double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return buf;
    }
};

// Symbolic composition: substitute each variable of p by a polynomial.
// eval(compose(p,s), a) == eval(p, {v: eval(s[v], a)}) up to rounding.
inline Polynomial compose(const Polynomial& p,
                          const std::map<std::string, Polynomial>& substitution) {
    for (const auto& v : p.vars)
        if (!substitution.count(v))
            throw std::invalid_argument("missing substitution entry for variable: " + v);

    // Target variable list: union of all substituted polynomials' variables,
    // in the deterministic order induced by p's variable order.
    std::vector<std::string> out_vars;
    for (const auto& v : p.vars)
        out_vars = Polynomial::merged_vars(out_vars, substitution.at(v).vars);

    // Per-variable power tables up to the needed exponent.
    std::vector<std::vector<Polynomial>> pow_table(p.vars.size());
    auto degs = p.per_var_degree();
    for (std::size_t i = 0; i < p.vars.size(); ++i) {
        Polynomial base = substitution.at(p.vars[i]).reindexed(out_vars);
        pow_table[i].push_back(Polynomial::constant(1.0, out_vars));
        for (unsigned k = 1; k <= degs[i]; ++k)
            pow_table[i].push_back(pow_table[i].back() * base);
    }

    Polynomial acc(out_vars);
    for (const auto& [e, c] : p.terms) {
        Polynomial t = Polynomial::constant(c, out_vars);
        for (std::size_t i = 0; i < e.size(); ++i)
            if (e[i] > 0) t = t * pow_table[i][e[i]];
        acc = acc + t;
    }
    acc.normalize();
    return acc;
}

namespace detail {

// Recursive-descent parser for the expression grammar:
//   expr   := ('+'|'-')? term (('+'|'-') term)*
//   term   := factor ('*' factor)*
//   factor := base ('^' uint)?
//   base   := number | ident | '(' expr ')'
// Numbers are decimal (optionally scientific) or rational literals "a/b".
class PolyParser {
public:
    PolyParser(const std::string& text, const std::vector<std::string>& variables)
        : text_(text), vars_(variables) {}

    Polynomial parse() {
        Polynomial p = expr();
        skip_ws();
        if (pos_ != text_.size())
            throw ParseError("unexpected trailing input", pos_);
        p.normalize();
        return p;
    }

private:
    const std::string& text_;
    const std::vector<std::string>& vars_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    Polynomial expr() {
        double sign = 1.0;
        if (eat('-'))
            sign = -1.0;
        else
            eat('+');
        Polynomial acc = term() * sign;
        for (;;) {
            if (eat('+'))
                acc = acc + term();
            else if (eat('-'))
                acc = acc - term();
            else
                return acc;
        }
    }

    Polynomial term() {
        Polynomial acc = factor();
        while (eat('*')) acc = acc * factor();
        return acc;
    }

    Polynomial factor() {
        Polynomial b = base();
        if (eat('^')) {
            skip_ws();
            std::size_t at = pos_;
            if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
                throw ParseError("expected nonnegative integer exponent", at);
            unsigned e = 0;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                e = e * 10 + static_cast<unsigned>(text_[pos_++] - '0');
            return b.pow(e);
        }
        return b;
    }

    Polynomial base() {
        char c = peek();
        if (c == '(') {
            eat('(');
            Polynomial p = expr();
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            return p;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return ident();
        throw ParseError("expected number, variable or '('", pos_);
    }

    Polynomial number() {
        double num = decimal();
        skip_ws();
        // Rational literal "a/b"; '/' is not an operator in this grammar.
        if (pos_ < text_.size() && text_[pos_] == '/') {
            ++pos_;
            skip_ws();
            std::size_t at = pos_;
            double den = decimal();
            if (den == 0.0) throw ParseError("zero denominator in rational literal", at);
            num /= den;
        }
        return Polynomial::constant(num, vars_);
    }

    double decimal() {
        skip_ws();
        std::size_t at = pos_;
        std::size_t end = pos_;
        while (end < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[end])) || text_[end] == '.'))
            ++end;
        if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
            std::size_t e = end + 1;
            if (e < text_.size() && (text_[e] == '+' || text_[e] == '-')) ++e;
            std::size_t d = e;
            while (d < text_.size() && std::isdigit(static_cast<unsigned char>(text_[d]))) ++d;
            if (d > e) end = d;
        }
        if (end == at) throw ParseError("expected number", at);
        try {
            std::size_t used = 0;
            double v = std::stod(text_.substr(at, end - at), &used);
            if (used != end - at) throw ParseError("malformed number", at);
            pos_ = end;
            return v;
        } catch (const std::invalid_argument&) {
            throw ParseError("malformed number", at);
        }
    }

    Polynomial ident() {
        skip_ws();
        std::size_t at = pos_;
        std::size_t end = pos_;
        while (end < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_'))
            ++end;
        std::string name = text_.substr(at, end - at);
        if (std::find(vars_.begin(), vars_.end(), name) == vars_.end())
            throw ParseError("undeclared variable '" + name + "'", at);
        pos_ = end;
        return Polynomial::variable(name, vars_);
    }
};

}  // namespace detail

inline Polynomial parse_polynomial(const std::string& text,
                                   const std::vector<std::string>& variables) {
    return detail::PolyParser(text, variables).parse();
}

}  // namespace stochcert
