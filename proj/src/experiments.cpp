#include "singheat/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

#include "singheat/carleman.hpp"
#include "singheat/hardy.hpp"
#include "singheat/hum.hpp"
#include "singheat/io.hpp"
#include "singheat/parallel.hpp"
#include "singheat/spectral.hpp"
#include "singheat/stabilization.hpp"
#include "singheat/weights.hpp"

namespace singheat {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "experiment", "mesh_n",     "nt",          "T",        "mu",           "mu_list",     "gamma_list",
        "mesh_sizes", "reg",        "reg_param",   "eps",      "eps_list",     "betas",       "shift_list",
        "gamma",      "A1",         "penalty",     "cg_tol",   "cg_max_iter",  "omega",       "omega0",
        "r0",         "lambda",     "lambda_grid", "varpi0_target", "theta_power", "R",        "samples",
        "runs",       "ct_iters",   "seed",        "out_dir"};
    return keys;
}

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorKind::InvalidConfig, msg); }

template <class T>
T get(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        bad(std::string("invalid value for '") + key + "'");
    }
}

Interval get_interval(const json& j, const char* key) {
    const auto v = get<std::vector<double>>(j, key);
    if (v.size() != 2) bad(std::string("'") + key + "' must be a two-element array [lo, hi]");
    return {v[0], v[1]};
}

std::size_t get_count(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) bad(std::string("'") + key + "' must be a nonnegative integer");
    return v.get<std::size_t>();
}

void require(bool ok, const std::string& what) {
    if (!ok) bad(what);
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i] < v[i - 1])) return false;
    }
    return true;
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

/// Short number text for human-readable labels; data files use io::fmt.
std::string label(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

Vec sine_datum(const Mesh1D& mesh) {
    Vec u(mesh.n);
    for (std::size_t i = 0; i < mesh.n; ++i) u[i] = std::sin(std::numbers::pi * mesh.nodes[i]);
    return u;
}

WeightParams weight_params(const ExperimentConfig& c) {
    WeightParams p;
    p.lambda = c.lambda;
    p.r0 = c.r0;
    p.varpi0_target = c.varpi0_target;
    p.gamma = c.gamma;
    p.mu = *c.mu;
    p.T = c.T;
    p.theta_power = c.theta_power;
    p.A1 = c.A1;
    p.R = c.R > 0.0 ? c.R : 1.0;
    p.omega = c.omega;
    p.omega0 = c.omega0;
    return p;
}

/// Output sink for one run: collects artifact names and invariant outcomes.
struct Sink {
    std::filesystem::path dir;
    RunRecord& rec;

    void write(const std::string& name, const std::string& content) {
        io::write_file(dir / name, content);
        rec.artifacts.push_back(name);
    }
    void check(const std::string& name, bool ok) { rec.invariants.emplace_back(name, ok); }
};

void run_hardy(const ExperimentConfig& c, Sink& out) {
    const auto mesh = build_mesh(*c.mesh_n);
    std::vector<std::size_t> sizes = c.mesh_sizes;
    if (sizes.empty()) sizes = {std::max<std::size_t>(10, *c.mesh_n / 4), std::max<std::size_t>(10, *c.mesh_n / 2), *c.mesh_n};
    const double rayleigh = rayleigh_hardy(mesh);
    out.check("rayleigh_min > 1/4", rayleigh > kCriticalMu);

    std::vector<std::pair<double, double>> cases;
    for (double mu : c.mu_list) {
        for (double g : c.gamma_list) cases.emplace_back(mu, g);
    }
    std::vector<HardyReport> reports(cases.size());
    parallel_for(cases.size(), [&](std::size_t k) {
        auto& r = reports[k];
        r.mu = cases[k].first;
        r.gamma = cases[k].second;
        r.mesh_n = mesh.n;
        r.rayleigh_min = rayleigh;
        const auto a1 = operative_A1(r.mu, r.gamma, sizes);
        r.A1 = a1.A1;
        r.A2 = find_A2(mesh, r.mu, r.gamma, r.A1);
        r.A3 = find_A3(mesh, r.mu, r.gamma);
        const auto a45 = find_A4_A5(mesh, r.mu, r.gamma, r.A1);
        r.A4 = a45.A4;
        r.A5 = a45.A5;
        r.A0_gamma = compute_A0_gamma(mesh, r.gamma, r.A1);
        r.converged = a1.found && a45.feasible;
    });
    std::ostringstream csv;
    write_hardy_csv_header(csv);
    for (const auto& r : reports) {
        write_hardy_csv_row(csv, r);
        if (r.mu <= kCriticalMu) {
            out.check("constants found for mu = " + label(r.mu) + ", gamma = " + label(r.gamma), r.converged);
        }
    }
    out.write("hardy_report.csv", csv.str());
}

void run_spectrum(const ExperimentConfig& c, Sink& out) {
    const auto mesh = build_mesh(*c.mesh_n);
    const auto sp = ground_state(mesh, *c.mu, c.eps, c.betas);
    std::ostringstream csv;
    csv << "mu,eps,n,lambda0,lambda1,residual\n";
    csv << io::fmt(sp.mu) << ',' << io::fmt(sp.eps) << ',' << sp.n << ',' << io::fmt(sp.lambda0) << ','
        << io::fmt(sp.lambda1) << ',' << io::fmt(sp.residual) << '\n';
    out.write("spectrum.csv", csv.str());
    std::ostringstream dat;
    dat << "# x phi0\n";
    for (std::size_t i = 0; i < mesh.n; ++i) dat << io::fmt(mesh.nodes[i]) << ' ' << io::fmt(sp.phi0[i]) << '\n';
    out.write("ground_state.dat", dat.str());
    out.check("eigen residual <= 1e-10 |A|", sp.residual <= 1e-10 * std::max(1.0, sp.operator_norm));
    out.check("lambda0 < lambda1", sp.lambda0 < sp.lambda1);
}

void run_blowup(const ExperimentConfig& c, Sink& out) {
    const auto mesh = build_mesh(*c.mesh_n);
    const auto sweep = blowup_sweep(mesh, *c.mu, c.eps_list, c.betas);
    std::ostringstream csv;
    write_blowup_csv(csv, sweep);
    out.write("blowup.csv", csv.str());
    out.write("fit.json", fit_json(sweep));
    std::ostringstream dat;
    dat << "# eps lambda0\n";
    for (const auto& p : sweep.points) dat << io::fmt(p.eps) << ' ' << io::fmt(p.lambda0) << '\n';
    out.write("blowup.dat", dat.str());
    if (sweep.regime == Regime::Supercritical) out.check("lambda0 strictly decreasing", sweep.lambda_decreasing);
}

void run_stabilize(const ExperimentConfig& c, Sink& out) {
    CostProblem p;
    p.n = *c.mesh_n;
    p.mu = *c.mu;
    p.T = c.T;
    p.nt = *c.nt;
    p.cg_tol = c.cg_tol;
    p.cg_max_iter = c.cg_max_iter;
    const auto mesh = build_mesh(p.n);
    p.mask = build_regions(mesh, c.omega, c.omega0, c.r0).in_omega;
    const auto results = cost_sweep(p, c.eps_list);
    std::ostringstream csv, dat;
    write_cost_csv_header(csv);
    dat << "# eps J_opt analytic_lower\n";
    for (std::size_t j = 0; j < results.size(); ++j) {
        CostProblem q = p;
        q.eps = c.eps_list[j];
        const auto& r = results[j];
        write_cost_csv_row(csv, q, r);
        const double lower = r.analytic_lower.applicable ? r.analytic_lower.value : std::nan("");
        dat << io::fmt(q.eps) << ' ' << io::fmt(r.J_opt) << ' ' << io::fmt(lower) << '\n';
        const std::string tag = " at eps = " + label(q.eps);
        out.check("cost minimization converged" + tag, r.converged);
        if (r.analytic_lower.applicable) {
            out.check("J_opt >= analytic lower bound" + tag,
                      r.J_opt >= r.analytic_lower.value - 1e-6 * std::max(1.0, r.J_opt));
        }
        out.check("projected ODE holds" + tag, verify_duhamel(q, r).passed());
    }
    out.write("stabilize.csv", csv.str());
    out.write("stabilize.dat", dat.str());
}

void run_weights(const ExperimentConfig& c, Sink& out) {
    const auto mesh = build_mesh(*c.mesh_n);
    const auto params = weight_params(c);
    const auto fields = build_weights(mesh, params);
    const auto props = sample_propositions(mesh, fields, c.samples);
    const auto search = find_lambda0(mesh, params, c.lambda_grid, c.samples);
    const auto flux = check_boundary_flux(mesh, fields);
    out.write("weights_manifest.json", weights_manifest_json(fields, &props, &search, &flux));
    std::ostringstream fail;
    write_sampler_failures_csv(fail, props);
    out.write("sampler_failures.csv", fail.str());
    std::ostringstream dat;
    dat << "# x psi1 psi alpha\n";
    for (std::size_t i = 0; i < mesh.n; ++i) {
        dat << io::fmt(mesh.nodes[i]) << ' ' << io::fmt(fields.psi1[i]) << ' ' << io::fmt(fields.psi[i]) << ' '
            << io::fmt(fields.alpha[i]) << '\n';
    }
    out.write("weights_profile.dat", dat.str());
    out.check("pointwise inequalities at lambda = " + label(params.lambda), props.all_passed());
    out.check("lambda0 found on the grid", search.found);
    out.check("boundary flux ratio finite", std::isfinite(flux.log_max));
}

void run_carleman(const ExperimentConfig& c, Sink& out) {
    const auto mesh = build_mesh(*c.mesh_n);
    const auto op = assemble({*c.mu, Regularization::None, 0.0}, mesh);
    auto fields = build_weights(mesh, weight_params(c));
    const auto tg = make_time_grid(c.T, *c.nt);
    const auto runs = random_adjoint_runs(mesh, op, tg, c.runs, c.seed);
    ordered_json extra;
    if (c.R <= 0.0) {
        const auto s = find_R0(mesh, fields, tg, runs);
        extra["R0_found"] = s.found;
        auto hist = ordered_json::array();
        for (const auto& [R, m] : s.history) hist.push_back({R, m});
        extra["R_history"] = hist;
        if (s.found) fields.params.R = s.R0;
    }
    extra["R"] = fields.params.R;
    const auto rep = empirical_carleman(mesh, fields, tg, runs);
    const auto tg2 = make_time_grid(c.T, 2 * *c.nt);
    const auto rep2 = empirical_carleman(mesh, fields, tg2, random_adjoint_runs(mesh, op, tg2, c.runs, c.seed));
    std::ostringstream csv;
    write_carleman_csv(csv, rep);
    out.write("carleman.csv", csv.str());
    extra["log_reference"] = rep.log_reference;
    extra["min_ratio"] = rep.min_ratio;
    extra["max_ratio"] = rep.max_ratio;
    extra["max_ratio_nt_doubled"] = rep2.max_ratio;
    extra["property_failures"] = rep.property_failures + rep2.property_failures;
    out.write("carleman_summary.json", extra.dump(2) + "\n");
    out.check("RHS > 0 whenever LHS > 0", rep.property_failures == 0 && rep2.property_failures == 0);
    const bool stable = rep.max_ratio > 0.0 ? rep2.max_ratio <= 2.0 * rep.max_ratio && rep2.max_ratio >= 0.5 * rep.max_ratio
                                            : rep2.max_ratio == 0.0;
    out.check("max ratio stable within 2x under nt doubling", stable);
}

OperatorSpec control_spec(const ExperimentConfig& c, std::size_t n) {
    Regularization reg;
    if (c.reg == "auto") {
        reg = *c.mu == 0.0 ? Regularization::None : Regularization::Shift;
    } else {
        reg = parse_regularization(c.reg);
    }
    double param = c.reg_param;
    if (reg == Regularization::Shift && param == 0.0) param = static_cast<double>(n + 1);
    if (reg == Regularization::None) param = 0.0;
    return {*c.mu, reg, param};
}

HumProblem hum_problem(const ExperimentConfig& c, const OperatorSpec& spec) {
    HumProblem p;
    p.mesh = build_mesh(*c.mesh_n);
    p.op = assemble(spec, p.mesh);
    p.tg = make_time_grid(c.T, *c.nt);
    p.mask = build_regions(p.mesh, c.omega, c.omega0, c.r0).in_omega;
    p.u0 = sine_datum(p.mesh);
    p.penalty = c.penalty;
    p.cg_tol = c.cg_tol;
    p.cg_max_iter = c.cg_max_iter;
    return p;
}

void run_control(const ExperimentConfig& c, Sink& out) {
    const HumSolver solver(hum_problem(c, control_spec(c, *c.mesh_n)));
    const auto r = solver.solve();
    const auto ct = solver.estimate_CT(c.ct_iters);
    std::ostringstream csv, dat;
    write_control_csv_header(csv);
    write_control_csv_row(csv, solver.problem(), r, ct.C_T_est);
    write_control_dat(dat, solver.problem(), r);
    out.write("control.csv", csv.str());
    out.write("control_trajectory.dat", dat.str());
    out.check("CG converged", r.converged);
    out.check("Euler-Lagrange residual <= 1e-9 |u_free(T)|", r.el_residual <= 1e-9 * std::max(r.free_final_norm, 1e-300));
}

void run_observability(const ExperimentConfig& c, Sink& out) {
    std::vector<ObservabilityEstimate> est(c.shift_list.size());
    parallel_for(est.size(), [&](std::size_t k) {
        const HumSolver solver(hum_problem(c, {*c.mu, Regularization::Shift, c.shift_list[k]}));
        est[k] = solver.estimate_CT(c.ct_iters);
    });
    std::ostringstream csv, dat;
    csv << "mu,reg,reg_param,T,n,nt,CT_est,iterations,unbounded\n";
    dat << "# m CT_est\n";
    for (std::size_t k = 0; k < est.size(); ++k) {
        csv << io::fmt(*c.mu) << ",shift," << io::fmt(c.shift_list[k]) << ',' << io::fmt(c.T) << ',' << *c.mesh_n << ','
            << *c.nt << ',' << io::fmt(est[k].C_T_est) << ',' << est[k].iterations << ','
            << (est[k].unbounded ? 1 : 0) << '\n';
        dat << io::fmt(c.shift_list[k]) << ' ' << io::fmt(est[k].C_T_est) << '\n';
        out.check("C_T estimate finite at m = " + label(c.shift_list[k]), std::isfinite(est[k].C_T_est));
    }
    out.write("observability.csv", csv.str());
    out.write("observability.dat", dat.str());
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"hardy",   "spectrum", "blowup",  "stabilize",
                                                "weights", "carleman", "control", "observability"};
    return names;
}

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) bad("configuration must be a JSON object");
    std::vector<std::string> unknown;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known_keys().count(it.key())) unknown.push_back(it.key());
    }
    if (!unknown.empty()) {
        std::string msg = "unknown configuration keys:";
        for (const auto& k : unknown) msg += " " + k;
        throw Error(ErrorKind::UnknownKey, msg);
    }
    ExperimentConfig c;
    if (!j.contains("experiment")) bad("missing 'experiment'");
    c.experiment = get<std::string>(j, "experiment");
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), c.experiment) == names.end()) {
        throw Error(ErrorKind::UnknownExperiment, "unknown experiment '" + c.experiment + "'");
    }
    if (j.contains("mesh_n")) c.mesh_n = get_count(j, "mesh_n");
    if (j.contains("nt")) c.nt = get_count(j, "nt");
    if (j.contains("T")) c.T = get<double>(j, "T");
    if (j.contains("mu")) c.mu = get<double>(j, "mu");
    if (j.contains("mu_list")) c.mu_list = get<std::vector<double>>(j, "mu_list");
    if (j.contains("gamma_list")) c.gamma_list = get<std::vector<double>>(j, "gamma_list");
    if (j.contains("mesh_sizes")) c.mesh_sizes = get<std::vector<std::size_t>>(j, "mesh_sizes");
    if (j.contains("reg")) c.reg = get<std::string>(j, "reg");
    if (j.contains("reg_param")) c.reg_param = get<double>(j, "reg_param");
    if (j.contains("eps")) c.eps = get<double>(j, "eps");
    if (j.contains("eps_list")) c.eps_list = get<std::vector<double>>(j, "eps_list");
    if (j.contains("betas")) c.betas = get<std::vector<double>>(j, "betas");
    if (j.contains("shift_list")) c.shift_list = get<std::vector<double>>(j, "shift_list");
    if (j.contains("gamma")) c.gamma = get<double>(j, "gamma");
    if (j.contains("A1")) c.A1 = get<double>(j, "A1");
    if (j.contains("penalty")) c.penalty = get<double>(j, "penalty");
    if (j.contains("cg_tol")) c.cg_tol = get<double>(j, "cg_tol");
    if (j.contains("cg_max_iter")) c.cg_max_iter = get_count(j, "cg_max_iter");
    if (j.contains("omega")) c.omega = get_interval(j, "omega");
    if (j.contains("omega0")) c.omega0 = get_interval(j, "omega0");
    if (j.contains("r0")) c.r0 = get<double>(j, "r0");
    if (j.contains("lambda")) c.lambda = get<double>(j, "lambda");
    if (j.contains("lambda_grid")) c.lambda_grid = get<std::vector<double>>(j, "lambda_grid");
    if (j.contains("varpi0_target")) c.varpi0_target = get<double>(j, "varpi0_target");
    if (j.contains("theta_power")) c.theta_power = get<double>(j, "theta_power");
    if (j.contains("R")) c.R = get<double>(j, "R");
    if (j.contains("samples")) c.samples = get_count(j, "samples");
    if (j.contains("runs")) c.runs = get_count(j, "runs");
    if (j.contains("ct_iters")) c.ct_iters = get_count(j, "ct_iters");
    if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed");
    if (j.contains("out_dir")) c.out_dir = get<std::string>(j, "out_dir");
    return resolve_defaults(std::move(c));
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) bad("cannot read configuration file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        bad("configuration file is not valid JSON: " + std::string(e.what()));
    }
    return config_from_json(j);
}

void apply_overrides(json& j, const std::vector<std::string>& sets) {
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) bad("override '" + s + "' must have the form key=value");
        const std::string key = s.substr(0, eq);
        const std::string value = s.substr(eq + 1);
        try {
            j[key] = json::parse(value);
        } catch (const json::exception&) {
            j[key] = value;
        }
    }
}

ExperimentConfig resolve_defaults(ExperimentConfig c) {
    const std::string& e = c.experiment;
    if (!c.mesh_n) {
        if (e == "hardy") c.mesh_n = 1000;
        else if (e == "spectrum" || e == "weights") c.mesh_n = 2000;
        else if (e == "blowup") c.mesh_n = 1000;
        else if (e == "stabilize") c.mesh_n = 800;
        else c.mesh_n = 200;
    }
    if (!c.nt) c.nt = e == "carleman" ? 50 : (e == "stabilize" ? 100 : 400);
    if (!c.mu) {
        if (e == "spectrum") c.mu = 0.0;
        else if (e == "blowup" || e == "stabilize") c.mu = 0.5;
        else if (e == "observability") c.mu = 0.3;
        else c.mu = 0.25;
    }
    require(*c.mesh_n >= 10, "mesh_n must be at least 10");
    require(*c.nt >= 2, "nt must be at least 2");
    require(c.T > 0.0 && std::isfinite(c.T), "T must be positive");
    require(std::isfinite(*c.mu), "mu must be finite");
    require(c.gamma > 0.0 && c.gamma < 2.0, "gamma must lie in (0, 2)");
    for (double g : c.gamma_list) require(g > 0.0 && g < 2.0, "gamma_list entries must lie in (0, 2)");
    require(c.penalty >= 0.0, "penalty must be >= 0");
    require(c.cg_tol > 0.0, "cg_tol must be positive");
    require(c.cg_max_iter > 0, "cg_max_iter must be positive");
    require(c.eps > 0.0, "eps must be positive");
    require(!c.eps_list.empty() && strictly_decreasing(c.eps_list), "eps_list must be nonempty and strictly decreasing");
    for (double v : c.eps_list) require(v > 0.0, "eps_list entries must be positive");
    for (double m : c.shift_list) require(m > 0.0, "shift_list entries must be positive");
    require(c.lambda > 1.0, "lambda must be > 1");
    for (double l : c.lambda_grid) require(l > 1.0, "lambda_grid entries must be > 1");
    require(c.samples > 0 && c.runs > 0, "samples and runs must be positive");
    require(c.ct_iters >= 10, "ct_iters must be at least 10");
    require(c.theta_power > 0.0, "theta_power must be positive");
    require(c.A1 > 0.0, "A1 must be positive");
    require(c.reg == "auto" || c.reg == "none" || c.reg == "raw" || c.reg == "shift" || c.reg == "quadratic",
            "reg must be one of auto, none, shift, quadratic");
    require(!c.out_dir.empty(), "out_dir must not be empty");
    build_regions(build_mesh(*c.mesh_n), c.omega, c.omega0, c.r0);
    return c;
}

ordered_json config_to_json(const ExperimentConfig& c) {
    ordered_json j;
    j["experiment"] = c.experiment;
    j["mesh_n"] = c.mesh_n.value_or(0);
    j["nt"] = c.nt.value_or(0);
    j["T"] = c.T;
    j["mu"] = c.mu.value_or(0.0);
    j["mu_list"] = c.mu_list;
    j["gamma_list"] = c.gamma_list;
    j["mesh_sizes"] = c.mesh_sizes;
    j["reg"] = c.reg;
    j["reg_param"] = c.reg_param;
    j["eps"] = c.eps;
    j["eps_list"] = c.eps_list;
    j["betas"] = c.betas;
    j["shift_list"] = c.shift_list;
    j["gamma"] = c.gamma;
    j["A1"] = c.A1;
    j["penalty"] = c.penalty;
    j["cg_tol"] = c.cg_tol;
    j["cg_max_iter"] = c.cg_max_iter;
    j["omega"] = {c.omega.lo, c.omega.hi};
    j["omega0"] = {c.omega0.lo, c.omega0.hi};
    j["r0"] = c.r0;
    j["lambda"] = c.lambda;
    j["lambda_grid"] = c.lambda_grid;
    j["varpi0_target"] = c.varpi0_target;
    j["theta_power"] = c.theta_power;
    j["R"] = c.R;
    j["samples"] = c.samples;
    j["runs"] = c.runs;
    j["ct_iters"] = c.ct_iters;
    j["seed"] = c.seed;
    j["out_dir"] = c.out_dir;
    return j;
}

int exit_code_for(ErrorKind k) {
    switch (k) {
    case ErrorKind::InvalidMesh:
    case ErrorKind::RegionNesting:
    case ErrorKind::R0Overlap:
    case ErrorKind::UnderResolved:
    case ErrorKind::SingularTime:
    case ErrorKind::InfeasibleSlope:
    case ErrorKind::NotApplicable:
    case ErrorKind::InvalidConfig:
    case ErrorKind::UnknownExperiment:
    case ErrorKind::UnknownKey:
        return 2;
    case ErrorKind::PropertyFailure:
        return 1;
    case ErrorKind::SolverBreakdown:
    case ErrorKind::Dimension:
    case ErrorKind::EigenNonConvergence:
    case ErrorKind::BracketFailure:
        return 3;
    }
    return 3;
}

RunRecord run_experiment(const ExperimentConfig& config) {
    RunRecord rec;
    rec.config = config_to_json(config);
    rec.started = timestamp();
    const std::filesystem::path dir(config.out_dir);
    Sink out{dir, rec};
    try {
        const auto& e = config.experiment;
        if (e == "hardy") run_hardy(config, out);
        else if (e == "spectrum") run_spectrum(config, out);
        else if (e == "blowup") run_blowup(config, out);
        else if (e == "stabilize") run_stabilize(config, out);
        else if (e == "weights") run_weights(config, out);
        else if (e == "carleman") run_carleman(config, out);
        else if (e == "control") run_control(config, out);
        else if (e == "observability") run_observability(config, out);
        else throw Error(ErrorKind::UnknownExperiment, "unknown experiment '" + e + "'");
        const bool all = std::all_of(rec.invariants.begin(), rec.invariants.end(),
                                     [](const auto& p) { return p.second; });
        rec.status = all ? "ok" : "invariant_failure";
        rec.exit_code = all ? 0 : 1;
    } catch (const Error& err) {
        rec.status = "error";
        rec.error_kind = err.kind();
        rec.error_message = err.what();
        rec.exit_code = exit_code_for(err.kind());
    } catch (const std::exception& err) {
        rec.status = "error";
        rec.error_message = err.what();
        rec.exit_code = 3;
    }
    rec.finished = timestamp();

    ordered_json m;
    m["status"] = rec.status;
    m["exit_code"] = rec.exit_code;
    m["started"] = rec.started;
    m["finished"] = rec.finished;
    if (rec.status == "error") {
        m["error"] = {{"kind", rec.error_kind ? to_string(*rec.error_kind) : "internal"},
                      {"message", rec.error_message}};
    }
    m["config"] = rec.config;
    m["artifacts"] = rec.artifacts;
    auto inv = ordered_json::array();
    for (const auto& [name, ok] : rec.invariants) inv.push_back({{"name", name}, {"passed", ok}});
    m["invariants"] = inv;
    io::write_file(dir / "manifest.json", m.dump(2) + "\n");
    return rec;
}

}  // namespace singheat
