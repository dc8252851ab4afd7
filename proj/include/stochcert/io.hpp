#pragma once
// JSON input/output. Problem and certificate files are parsed with full
// field-path diagnostics; report types serialize to nlohmann::json objects
// whose field names are stable so downstream tooling can rely on them.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "stochcert/bounds.hpp"
#include "stochcert/checker.hpp"
#include "stochcert/model.hpp"
#include "stochcert/montecarlo.hpp"
#include "stochcert/synth.hpp"

namespace stochcert::io {

using nlohmann::json;

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path.empty() ? what : path + ": " + what);
}

inline std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

inline std::string idx(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
}

inline const json& field(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(join(path, key), "missing required field");
    return *it;
}

inline double as_double(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

inline std::uint64_t as_uint(const json& j, const std::string& path) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
        fail(path, "expected a nonnegative integer");
    return j.get<std::uint64_t>();
}

inline std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

inline std::vector<double> as_double_vec(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_double(j[i], idx(path, i)));
    return out;
}

inline std::vector<std::string> as_string_vec(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of strings");
    std::vector<std::string> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_string(j[i], idx(path, i)));
    return out;
}

inline Polynomial parse_poly_text(const std::string& text, const std::vector<std::string>& vars,
                                  const std::string& path) {
    try {
        return parse_polynomial(text, vars);
    } catch (const std::exception& e) {
        fail(path, std::string("invalid polynomial: ") + e.what());
    }
}

inline SemialgebraicSet parse_set(const json& j, const std::vector<std::string>& vars,
                                  const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of conjuncts");
    SemialgebraicSet s;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string cp = idx(path, i);
        Conjunct c;
        c.poly = parse_poly_text(as_string(field(j[i], "poly", cp), join(cp, "poly")), vars,
                                 join(cp, "poly"));
        const std::string rel = as_string(field(j[i], "rel", cp), join(cp, "rel"));
        if (rel == "<=0")
            c.rel = Relation::LeZero;
        else if (rel == ">=0")
            c.rel = Relation::GeZero;
        else
            fail(join(cp, "rel"), "expected \"<=0\" or \">=0\", got \"" + rel + "\"");
        s.conjuncts.push_back(std::move(c));
    }
    return s;
}

inline Box parse_box(const json& j, const std::string& path) {
    Box b;
    b.lo = as_double_vec(field(j, "lo", path), join(path, "lo"));
    b.hi = as_double_vec(field(j, "hi", path), join(path, "hi"));
    if (b.lo.size() != b.hi.size()) fail(path, "lo and hi have different lengths");
    return b;
}

inline DisturbanceSpec parse_disturbance(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    if (j.contains("uniform_box"))
        return UniformBoxDist{parse_box(j["uniform_box"], join(path, "uniform_box"))};
    if (j.contains("finite")) {
        const json& atoms = j["finite"];
        const std::string ap = join(path, "finite");
        if (!atoms.is_array()) fail(ap, "expected an array of atoms");
        FiniteSupportDist fs;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            const std::string p = idx(ap, i);
            fs.atoms.emplace_back(
                as_double_vec(field(atoms[i], "point", p), join(p, "point")),
                as_double(field(atoms[i], "prob", p), join(p, "prob")));
        }
        return fs;
    }
    fail(path, "expected either \"uniform_box\" or \"finite\"");
}

}  // namespace detail

inline ProblemSpec parse_problem(const json& j, const std::string& path = "") {
    using namespace detail;
    ProblemSpec spec;
    spec.system.state_vars = as_string_vec(field(j, "state_vars", path), join(path, "state_vars"));
    spec.system.disturbance_vars =
        as_string_vec(field(j, "disturbance_vars", path), join(path, "disturbance_vars"));
    const auto all = spec.system.all_vars();

    const json& dyn = field(j, "dynamics", path);
    const std::string dp = join(path, "dynamics");
    if (!dyn.is_array()) fail(dp, "expected an array of polynomial strings");
    for (std::size_t i = 0; i < dyn.size(); ++i)
        spec.system.dynamics.push_back(
            parse_poly_text(as_string(dyn[i], idx(dp, i)), all, idx(dp, i)));

    spec.system.disturbance =
        parse_disturbance(field(j, "disturbance", path), join(path, "disturbance"));

    const std::string kind = as_string(field(j, "kind", path), join(path, "kind"));
    if (kind == "safety")
        spec.kind = ProblemKind::Safety;
    else if (kind == "reach-avoid")
        spec.kind = ProblemKind::ReachAvoid;
    else
        fail(join(path, "kind"), "expected \"safety\" or \"reach-avoid\", got \"" + kind + "\"");

    const auto& sv = spec.system.state_vars;
    spec.safe_set = parse_set(field(j, "safe_set", path), sv, join(path, "safe_set"));
    if (j.contains("target_set"))
        spec.target_set = parse_set(j["target_set"], sv, join(path, "target_set"));

    const json& ext = field(j, "extended_domain", path);
    const std::string ep = join(path, "extended_domain");
    spec.extended_set = parse_set(field(ext, "conjuncts", ep), sv, join(ep, "conjuncts"));
    spec.extended_box = parse_box(field(ext, "box", ep), join(ep, "box"));

    spec.x0 = as_double_vec(field(j, "x0", path), join(path, "x0"));
    spec.horizon = static_cast<unsigned>(as_uint(field(j, "horizon", path), join(path, "horizon")));

    validate_problem(spec);
    return spec;
}

inline json read_json_file(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open file: " + file);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(file + ": " + e.what());
    }
}

inline ProblemSpec load_problem(const std::string& file) {
    return parse_problem(read_json_file(file));
}

// Exponent tuples are rendered as comma-separated keys ("2", "1,0", ...).
inline std::string exponent_key(const std::vector<unsigned>& e) {
    std::ostringstream os;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (i) os << ',';
        os << e[i];
    }
    return os.str();
}

inline std::vector<unsigned> parse_exponent_key(const std::string& key, std::size_t arity,
                                                const std::string& path) {
    std::vector<unsigned> e;
    std::istringstream is(key);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        try {
            const long v = std::stol(tok);
            if (v < 0) throw std::invalid_argument("negative");
            e.push_back(static_cast<unsigned>(v));
        } catch (const std::exception&) {
            detail::fail(path, "invalid exponent tuple \"" + key + "\"");
        }
    }
    if (e.size() != arity)
        detail::fail(path, "exponent tuple \"" + key + "\" has arity " +
                               std::to_string(e.size()) + ", expected " + std::to_string(arity));
    return e;
}

inline json certificate_to_json(const Certificate& cert) {
    json j;
    j["kind"] = kind_name(cert.kind);
    j["alpha"] = cert.alpha;
    j["beta"] = cert.beta;
    if (cert.M) j["M"] = *cert.M;
    j["variables"] = cert.v.vars;
    json v = json::object();
    for (const auto& [e, c] : cert.v.terms) v[exponent_key(e)] = c;
    j["v"] = v;
    return j;
}

// The variable list is taken from the certificate itself when present and
// from the caller (normally the problem's state variables) otherwise.
inline Certificate parse_certificate(const json& j, const std::vector<std::string>& fallback_vars = {},
                                     const std::string& path = "") {
    using namespace detail;
    Certificate cert;
    cert.kind = [&] {
        const std::string s = as_string(field(j, "kind", path), join(path, "kind"));
        try {
            return parse_kind(s);
        } catch (const std::exception& e) {
            fail(join(path, "kind"), e.what());
        }
    }();
    cert.alpha = as_double(field(j, "alpha", path), join(path, "alpha"));
    cert.beta = as_double(field(j, "beta", path), join(path, "beta"));
    if (j.contains("M")) cert.M = as_double(j["M"], join(path, "M"));

    std::vector<std::string> vars;
    if (j.contains("variables"))
        vars = as_string_vec(j["variables"], join(path, "variables"));
    else if (!fallback_vars.empty())
        vars = fallback_vars;
    else
        fail(join(path, "variables"), "missing required field (no problem context to infer it)");

    const json& v = field(j, "v", path);
    const std::string vp = join(path, "v");
    if (!v.is_object()) fail(vp, "expected an object mapping exponent tuples to coefficients");
    cert.v = Polynomial(vars);
    for (const auto& [key, val] : v.items()) {
        const std::string tp = join(vp, "\"" + key + "\"");
        cert.v.terms[parse_exponent_key(key, vars.size(), tp)] = as_double(val, tp);
    }
    cert.v.normalize();
    return cert;
}

inline Certificate load_certificate(const std::string& file,
                                    const std::vector<std::string>& fallback_vars = {}) {
    return parse_certificate(read_json_file(file), fallback_vars);
}

inline void write_json_file(const std::string& file, const json& j) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write file: " + file);
    out << j.dump(2) << '\n';
}

inline json bound_to_json(const BoundReport& r) {
    json j;
    j["kind"] = kind_name(r.kind);
    j["case_tag"] = r.case_tag;
    j["gamma"] = r.gamma;
    j["raw"] = r.raw_value;
    j["clamped"] = r.clamped_value;
    j["v0"] = r.v0;
    j["alpha"] = r.alpha;
    j["beta"] = r.beta;
    j["M"] = r.M ? json(*r.M) : json(nullptr);
    j["N"] = r.N;
    return j;
}

inline json mc_to_json(const MCResult& r) {
    json j;
    j["estimate"] = r.estimate;
    j["n"] = r.n_paths;
    j["ci_lo"] = r.ci_lo;
    j["ci_hi"] = r.ci_hi;
    j["seed"] = r.seed;
    return j;
}

inline json check_to_json(const CheckReport& r) {
    json j;
    j["overall"] = verdict_name(r.overall);
    j["budget_consumed"] = r.budget_consumed;
    json cs = json::array();
    for (const auto& c : r.constraints) {
        json cj;
        cj["name"] = c.name;
        cj["verdict"] = verdict_name(c.verdict);
        if (!c.witness.empty()) {
            cj["witness"] = c.witness;
            cj["witness_value"] = c.witness_value;
        }
        cj["cells_explored"] = c.cells_explored;
        cj["cells_remaining"] = c.cells_remaining;
        if (c.verdict == Verdict::Unknown) {
            cj["residual_lo"] = c.residual_lo;
            cj["residual_hi"] = c.residual_hi;
        }
        cs.push_back(std::move(cj));
    }
    j["constraints"] = std::move(cs);
    return j;
}

inline json synthesis_to_json(const SynthesisResult& r) {
    json j;
    j["status"] = synth_status_name(r.status);
    j["lp"] = {{"status", r.lp_status == lp::Status::Optimal     ? "optimal"
                          : r.lp_status == lp::Status::Infeasible ? "infeasible"
                                                                  : "unbounded"},
               {"objective", r.lp_objective},
               {"rows", r.lp_rows},
               {"vars", r.lp_vars}};
    if (r.certificate) j["certificate"] = certificate_to_json(*r.certificate);
    if (r.bound) j["bound"] = bound_to_json(*r.bound);
    if (r.status != SynthStatus::Infeasible) j["audit"] = check_to_json(r.audit);
    return j;
}

inline json sweep_to_json(const SweepResult& r) {
    json j;
    j["combinations_tried"] = r.combinations_tried;
    j["combinations_succeeded"] = r.combinations_succeeded;
    j["certificate"] = certificate_to_json(r.certificate);
    j["bound"] = bound_to_json(r.bound);
    j["audit"] = check_to_json(r.audit);
    return j;
}

}  // namespace stochcert::io
