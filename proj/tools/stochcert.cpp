// stochcert: certified probability bounds for stochastic polynomial systems.
//
// Commands:
//   simulate    Monte-Carlo estimate of the exit / reach-avoid probability
//   exact       exhaustive enumeration oracle (finite-support disturbances)
//   check       verify a certificate file and report the bound it implies
//   bound       evaluate a closed-form bound from explicit parameters
//   synthesize  LP-based certificate search over parameter grids
//   reproduce   re-run the bundled studies and emit CSV tables
//
// Every command prints a JSON document to stdout (and to --out when given).
// Failures print {"error": ...} and exit nonzero. All output is deterministic
// for a fixed seed except the "timestamp" field.

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stochcert/io.hpp"

namespace sc = stochcert;
using nlohmann::json;

namespace {

constexpr std::uint64_t kDefaultSeed = 123456789;

std::string iso_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", x);
    return buf;
}

// Flat single-record CSVs: header line + one value line.
std::string record_csv(const json& j) {
    std::ostringstream head, row;
    bool first = true;
    for (const auto& [k, v] : j.items()) {
        if (v.is_object() || v.is_array()) continue;
        if (!first) {
            head << ',';
            row << ',';
        }
        first = false;
        head << k;
        if (v.is_number_float())
            row << fmt(v.get<double>());
        else if (v.is_string())
            row << v.get<std::string>();
        else
            row << v.dump();
    }
    return head.str() + "\n" + row.str() + "\n";
}

std::string check_csv(const sc::CheckReport& r) {
    std::ostringstream os;
    os << "constraint,verdict,cells_explored,cells_remaining\n";
    for (const auto& c : r.constraints)
        os << '"' << c.name << "\"," << sc::verdict_name(c.verdict) << ',' << c.cells_explored
           << ',' << c.cells_remaining << '\n';
    return os.str();
}

void emit(const json& payload, const std::string& out_path, const std::string& format,
          const std::string& csv_body) {
    const std::string text = format == "csv" ? csv_body : payload.dump(2) + "\n";
    std::cout << text;
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write file: " + out_path);
        out << text;
    }
}

json envelope(const std::string& command) {
    json j;
    j["command"] = command;
    j["timestamp"] = iso_timestamp();
    return j;
}

sc::BoundReport eval_closed_form(sc::BoundKind kind, double v0, double alpha, double beta,
                                 std::optional<double> M, unsigned N) {
    sc::validate_certificate_params(kind, alpha, beta, M);
    switch (kind) {
        case sc::BoundKind::SafetyUpperT1: return sc::upper_bound_safety_t1(v0, alpha, beta, N);
        case sc::BoundKind::SafetyUpperKushner:
            return sc::upper_bound_safety_kushner(v0, alpha, beta, N);
        case sc::BoundKind::SafetyLower: return sc::lower_bound_safety(v0, *M, alpha, beta, N);
        case sc::BoundKind::RAUpperT3: return sc::upper_bound_ra_t3(v0, alpha, beta, N);
        case sc::BoundKind::RAUpperKushner:
            return sc::upper_bound_ra_kushner(v0, alpha, beta, N);
        case sc::BoundKind::RALower: return sc::lower_bound_ra(v0, *M, alpha, beta, N);
    }
    throw std::logic_error("unreachable");
}

struct GridSpec {
    std::vector<double> alphas{1.0};
    std::vector<std::string> betas{"free"};
    std::vector<unsigned> degrees{2};
    unsigned depth = 3;
    unsigned elevation = 0;
    std::size_t budget = sc::kDefaultCellBudget;
};

sc::SynthesisOptions to_options(const GridSpec& g) {
    sc::SynthesisOptions opt;
    opt.degree_grid = g.degrees;
    opt.depth = g.depth;
    opt.elevation = g.elevation;
    opt.audit_budget = g.budget;
    opt.alpha_grid = g.alphas;
    opt.beta_grid.clear();
    for (const auto& b : g.betas) {
        if (b == "free")
            opt.beta_grid.push_back(std::nullopt);
        else
            opt.beta_grid.push_back(std::stod(b));
    }
    return opt;
}

// One table row of the reproduction study: a (kind, alpha, beta policy)
// condition swept over the degree columns independently.
struct StudyRow {
    sc::BoundKind kind;
    double alpha;
    std::vector<std::optional<double>> betas;  // nullopt = leave beta free
    std::string beta_label;
};

std::string study_table(const sc::ProblemSpec& problem, const std::vector<StudyRow>& rows,
                        const std::vector<unsigned>& degrees, unsigned depth,
                        std::size_t budget) {
    std::ostringstream os;
    os << "condition,alpha,beta";
    for (unsigned d : degrees) os << ",degree_" << d;
    os << '\n';
    for (const auto& row : rows) {
        os << sc::kind_name(row.kind) << ',' << fmt(row.alpha) << ',' << row.beta_label;
        for (unsigned d : degrees) {
            sc::SynthesisOptions opt;
            opt.degree_grid = {d};
            opt.depth = depth;
            opt.audit_budget = budget;
            opt.alpha_grid = {row.alpha};
            opt.beta_grid = row.betas;
            std::optional<double> cell;
            try {
                auto r = sc::sweep(problem, row.kind, opt);
                cell = r.bound.clamped_value;
            } catch (const std::exception&) {
            }
            os << ',' << (cell ? fmt(*cell) : "-");
        }
        os << '\n';
    }
    return os.str();
}

int run_simulate(const std::string& problem_path, std::uint64_t n, std::uint64_t seed,
                 const std::string& out, const std::string& format) {
    auto problem = sc::io::load_problem(problem_path);
    auto r = sc::simulate_event(problem, n, seed);
    json j = envelope("simulate");
    j["problem"] = problem_path;
    j["event"] = problem.kind == sc::ProblemKind::Safety ? "exit" : "reach-avoid";
    j["result"] = sc::io::mc_to_json(r);
    emit(j, out, format, record_csv(sc::io::mc_to_json(r)));
    return 0;
}

int run_exact(const std::string& problem_path, int horizon_override, const std::string& out,
              const std::string& format) {
    auto problem = sc::io::load_problem(problem_path);
    const unsigned N = horizon_override < 0 ? problem.horizon
                                            : static_cast<unsigned>(horizon_override);
    const double value = sc::exact_probability(problem, N);
    json j = envelope("exact");
    j["problem"] = problem_path;
    j["event"] = problem.kind == sc::ProblemKind::Safety ? "exit" : "reach-avoid";
    j["horizon"] = N;
    j["value"] = value;
    json rec;
    rec["value"] = value;
    rec["horizon"] = N;
    emit(j, out, format, record_csv(rec));
    return 0;
}

int run_check(const std::string& problem_path, const std::string& cert_path, std::size_t budget,
              const std::string& out, const std::string& format) {
    auto problem = sc::io::load_problem(problem_path);
    auto cert = sc::io::load_certificate(cert_path, problem.system.state_vars);
    auto report = sc::check_certificate(cert, problem, budget);
    json j = envelope("check");
    j["problem"] = problem_path;
    j["certificate"] = sc::io::certificate_to_json(cert);
    j["check"] = sc::io::check_to_json(report);
    j["verdict"] = sc::verdict_name(report.overall);
    if (report.overall == sc::Verdict::Verified)
        j["bound"] = sc::io::bound_to_json(sc::bound_from_certificate(cert, problem));
    else
        j["bound"] = nullptr;
    emit(j, out, format, check_csv(report));
    return 0;
}

int run_bound(const std::string& kind_str, double v0, double alpha, double beta,
              std::optional<double> M, unsigned N, const std::string& out,
              const std::string& format) {
    auto r = eval_closed_form(sc::parse_kind(kind_str), v0, alpha, beta, M, N);
    json j = envelope("bound");
    j["result"] = sc::io::bound_to_json(r);
    emit(j, out, format, record_csv(sc::io::bound_to_json(r)));
    return 0;
}

int run_synthesize(const std::string& problem_path, const std::string& kind_str,
                   const GridSpec& grid, const std::string& cert_out, const std::string& out,
                   const std::string& format) {
    auto problem = sc::io::load_problem(problem_path);
    auto kind = sc::parse_kind(kind_str);
    auto result = sc::sweep(problem, kind, to_options(grid));
    json j = envelope("synthesize");
    j["problem"] = problem_path;
    j["kind"] = kind_str;
    j["result"] = sc::io::sweep_to_json(result);
    if (!cert_out.empty()) sc::io::write_json_file(cert_out, sc::io::certificate_to_json(result.certificate));
    emit(j, out, format, record_csv(sc::io::bound_to_json(result.bound)));
    return 0;
}

int run_reproduce(const std::string& problems_dir, const std::string& out_dir, std::uint64_t n,
                  std::uint64_t seed, std::vector<unsigned> degrees, unsigned depth,
                  std::size_t budget) {
    namespace fs = std::filesystem;
    if (degrees.empty()) degrees = {2, 4, 6};
    fs::create_directories(out_dir);

    auto load = [&](const std::string& name) {
        return sc::io::load_problem((fs::path(problems_dir) / name).string());
    };
    auto walk_safe = load("random_walk.json");
    auto walk_ra = load("random_walk_reach.json");
    auto contr_safe = load("contraction.json");
    auto contr_ra = load("contraction_reach.json");

    std::vector<std::string> written;
    auto write = [&](const std::string& name, const std::string& body) {
        const std::string path = (fs::path(out_dir) / name).string();
        std::ofstream f(path);
        if (!f) throw std::runtime_error("cannot write file: " + path);
        f << body;
        written.push_back(path);
    };

    {
        std::ostringstream os;
        os << "problem,event,n,estimate,ci_lo,ci_hi,seed\n";
        auto line = [&](const std::string& label, const sc::ProblemSpec& p) {
            auto r = sc::simulate_event(p, n, seed);
            os << label << ',' << (p.kind == sc::ProblemKind::Safety ? "exit" : "reach-avoid")
               << ',' << r.n_paths << ',' << fmt(r.estimate) << ',' << fmt(r.ci_lo) << ','
               << fmt(r.ci_hi) << ',' << r.seed << '\n';
        };
        line("random_walk", walk_safe);
        line("random_walk", walk_ra);
        line("contraction", contr_safe);
        line("contraction", contr_ra);
        write("monte_carlo.csv", os.str());
    }

    const std::vector<std::optional<double>> free_beta{std::nullopt};
    const std::vector<std::optional<double>> small_betas{0.0,    1e-4, 2e-4, 5e-4,
                                                         1e-3,   2e-3, 5e-3, 1e-2};
    std::vector<std::optional<double>> wide_betas = small_betas;
    for (double b : {0.02, 0.05, 0.09, 0.1, 0.12, 0.15, 0.2}) wide_betas.push_back(b);
    write("random_walk_safety_upper.csv",
          study_table(walk_safe,
                      {{sc::BoundKind::SafetyUpperT1, 1.0, free_beta, "free"},
                       {sc::BoundKind::SafetyUpperT1, 1.0 / 1.1, small_betas, "grid"},
                       {sc::BoundKind::SafetyUpperKushner, 1.1, wide_betas, "grid"}},
                      degrees, depth, budget));
    write("random_walk_reach_upper.csv",
          study_table(walk_ra,
                      {{sc::BoundKind::RAUpperT3, 1.0, free_beta, "free"},
                       {sc::BoundKind::RAUpperKushner, 1.1, wide_betas, "grid"}},
                      degrees, depth, budget));
    write("contraction_reach_lower.csv",
          study_table(contr_ra,
                      {{sc::BoundKind::RALower, 1.06, {0.0}, "0"},
                       {sc::BoundKind::RALower, 1.1, {0.0}, "0"}},
                      degrees, depth, budget));

    json j = envelope("reproduce");
    j["out_dir"] = out_dir;
    j["files"] = written;
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"certified exit / reach-avoid probability bounds for stochastic "
                 "polynomial systems"};
    app.require_subcommand(1);

    std::string problem_path, out_path, format = "json";
    std::uint64_t seed = kDefaultSeed;
    auto add_common = [&](CLI::App* cmd, bool needs_problem) {
        if (needs_problem)
            cmd->add_option("--problem", problem_path, "problem JSON file")->required();
        cmd->add_option("--out", out_path, "also write the output to this file");
        cmd->add_option("--format", format, "output format")
            ->check(CLI::IsMember({"json", "csv"}));
        return cmd;
    };

    auto* sim = add_common(app.add_subcommand("simulate", "Monte-Carlo estimate"), true);
    std::uint64_t n_paths = 10000;
    sim->add_option("--n", n_paths, "number of sample paths");
    sim->add_option("--seed", seed, "RNG seed");

    auto* exa = add_common(app.add_subcommand("exact", "exact enumeration oracle"), true);
    int exact_N = -1;
    exa->add_option("--N", exact_N, "horizon override (default: problem horizon)");

    auto* chk = add_common(app.add_subcommand("check", "verify a certificate file"), true);
    std::string cert_path;
    std::size_t budget = sc::kDefaultCellBudget;
    chk->add_option("--certificate", cert_path, "certificate JSON file")->required();
    chk->add_option("--budget", budget, "branch-and-bound cell budget per constraint");

    auto* bnd = add_common(app.add_subcommand("bound", "closed-form bound evaluation"), false);
    std::string kind_str;
    double v0 = 0.0, alpha = 1.0, beta = 0.0;
    double M_val = 0.0;
    unsigned N = 0;
    bnd->add_option("--kind", kind_str, "bound kind")->required();
    bnd->add_option("--v0", v0, "certificate value at the initial state")->required();
    bnd->add_option("--alpha", alpha, "expectation factor alpha")->required();
    bnd->add_option("--beta", beta, "expectation offset beta")->required();
    auto* m_opt = bnd->add_option("--M", M_val, "sup bound M (lower-bound kinds)");
    bnd->add_option("--N", N, "time horizon")->required();

    auto* syn = add_common(app.add_subcommand("synthesize", "LP certificate search"), true);
    GridSpec grid;
    std::string cert_out;
    syn->add_option("--kind", kind_str, "bound kind")->required();
    syn->add_option("--alpha", grid.alphas, "alpha grid")->delimiter(',');
    syn->add_option("--beta", grid.betas, "beta grid; use 'free' to optimize beta (alpha=1 upper kinds)")
        ->delimiter(',');
    syn->add_option("--degree", grid.degrees, "degree grid")->delimiter(',');
    syn->add_option("--depth", grid.depth, "domain subdivision depth");
    syn->add_option("--elevation", grid.elevation, "extra Bernstein degree elevation");
    syn->add_option("--budget", grid.budget, "audit cell budget per constraint");
    syn->add_option("--emit-certificate", cert_out, "write the best certificate JSON here");

    auto* rep = app.add_subcommand("reproduce", "re-run the bundled studies");
    std::string problems_dir = "problems", out_dir = "reproduce_out";
    std::vector<unsigned> rep_degrees;
    unsigned rep_depth = 4;
    rep->add_option("--problems-dir", problems_dir, "directory with the bundled problem files");
    rep->add_option("--out", out_dir, "output directory for the CSV tables");
    rep->add_option("--n", n_paths, "Monte-Carlo paths per estimate")->default_val(200000);
    rep->add_option("--seed", seed, "RNG seed");
    rep->add_option("--degrees", rep_degrees, "degree columns")->delimiter(',');
    rep->add_option("--depth", rep_depth, "domain subdivision depth");
    rep->add_option("--budget", budget, "audit cell budget per constraint");

    CLI11_PARSE(app, argc, argv);

    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        if (sim->parsed()) return run_simulate(problem_path, n_paths, seed, out_path, format);
        if (exa->parsed()) return run_exact(problem_path, exact_N, out_path, format);
        if (chk->parsed()) return run_check(problem_path, cert_path, budget, out_path, format);
        if (bnd->parsed())
            return run_bound(kind_str, v0, alpha, beta,
                             m_opt->count() ? std::optional<double>(M_val) : std::nullopt, N,
                             out_path, format);
        if (syn->parsed())
            return run_synthesize(problem_path, kind_str, grid, cert_out, out_path, format);
        if (rep->parsed())
            return run_reproduce(problems_dir, out_dir, n_paths, seed, rep_degrees, rep_depth,
                                 budget);
    } catch (const std::exception& e) {
        json err;
        err["command"] = cmd;
        err["error"] = e.what();
        std::cout << err.dump(2) << "\n";
        return 1;
    }
    return 0;
}
