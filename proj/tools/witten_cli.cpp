// Command-line front end: one subcommand per module operation.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "witten/criterion.hpp"
#include "witten/errors.hpp"
#include "witten/json_io.hpp"
#include "witten/limitpoly.hpp"
#include "witten/localization.hpp"
#include "witten/registry.hpp"
#include "witten/spectral.hpp"

using namespace witten;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr const char* kSequenceForm = "y=v/j^a,tau=j^b,h=j^-c";

struct Outcome {
    json result;
    std::vector<std::string> verdicts;
    int exit_code = 0;
    std::string artifact;  // body for --out when the command has a non-report artifact
};

struct Global {
    std::uint64_t seed = 42;
    std::string out;
    bool json_stdout = false;
    std::string config;
};

struct PotentialArgs {
    std::string potential;
    int k = 4;
};

void add_potential(CLI::App* cmd, PotentialArgs& p) {
    cmd->add_option("--potential", p.potential, "polynomial JSON file or vdelta:<d> / phidelta:<d>")->required();
    cmd->add_option("--k", p.k, "derivative order cap (registered potentials use 4)")->check(CLI::Range(2, 12));
}

Box box_or_default(const std::string& text, std::size_t n, double half) {
    if (!text.empty()) {
        Box b = parse_box(text);
        if (b.size() != n) throw ArgumentError("box dimension differs from potential dimension");
        return b;
    }
    return Box(n, {-half, half});
}

std::vector<std::vector<double>> lattice(const Box& box, double step) {
    if (!(step > 0.0)) throw ArgumentError("lattice step must be positive");
    std::vector<std::vector<double>> pts{{}};
    for (const auto& [lo, hi] : box) {
        std::vector<std::vector<double>> next;
        for (const auto& p : pts) {
            for (double x = lo; x <= hi + 1e-9 * step; x += step) {
                auto q = p;
                q.push_back(std::abs(x) < 1e-12 * step ? 0.0 : x);
                next.push_back(std::move(q));
            }
        }
        pts = std::move(next);
    }
    return pts;
}

// --- check-criterion -------------------------------------------------------

struct CriterionArgs {
    PotentialArgs pot;
    double delta1 = 0.1;
    double delta2 = 0.1;
    std::string plan;
};

Outcome run_criterion(const CriterionArgs& a, const Global& g) {
    const auto lp = load_potential(a.pot.potential, a.pot.k);
    SamplingPlan plan = default_plan(lp.potential, lp.source);
    plan.seed = g.seed;
    if (!a.plan.empty()) {
        std::ifstream in(a.plan);
        if (!in) throw ArgumentError("cannot read plan file " + a.plan);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw ArgumentError(std::string("malformed plan JSON: ") + e.what());
        }
        plan = plan_from_json(j, plan);
    }
    const FullCheckReport r = full_check(lp.potential, a.delta1, a.delta2, plan);
    Outcome out;
    out.result = {{"potential", polynomial_to_json(lp.potential.polynomial())},
                  {"plan", plan_to_json(plan)},
                  {"report", full_report_to_json(r)}};
    for (const auto& c : r.reports) {
        std::ostringstream os;
        os << "condition " << to_string(c.condition) << ": " << to_string(c.verdict) << " (best constant "
           << c.best_constant << ")";
        out.verdicts.push_back(os.str());
    }
    out.verdicts.push_back("verdict: " + r.verdict);
    out.exit_code = r.holds ? 0 : 2;
    return out;
}

// --- limit-poly ------------------------------------------------------------

struct LimitArgs {
    PotentialArgs pot;
    std::string seq = kSequenceForm;
    std::vector<double> v;
    double a = 1.0, b = 1.0, c = 1.0;
    std::vector<double> j = {4, 8, 16, 32, 64};
    double tol = 1e-6;
    std::string box;
    std::size_t res = 41;
    std::string limit_out;
};

Outcome run_limit(const LimitArgs& a, const Global&) {
    if (a.seq != kSequenceForm) throw ArgumentError(std::string("only the power-law family '") + kSequenceForm + "' is supported");
    const auto lp = load_potential(a.pot.potential, a.pot.k);
    const Polynomial& p = lp.potential.polynomial();
    ScalingSequence seq{a.v.empty() ? std::vector<double>(p.dimension(), 0.0) : a.v, a.a, a.b, a.c};
    if (seq.v.size() != p.dimension()) throw ArgumentError("--v needs one entry per variable");
    const LimitResult lim = limit_polynomial(p, seq, a.j, a.tol);
    Outcome out;
    out.result = {{"sequence", seq.describe()}, {"limit", limit_result_to_json(lim)}};
    out.verdicts.push_back("limit: " + to_string(lim.status));
    if (lim.status == LimitStatus::converged && lim.limit) {
        const Polynomial& q = *lim.limit;
        if (!a.limit_out.empty()) write_text_file(a.limit_out, polynomial_to_json(q).dump(2) + "\n");
        const Box box = box_or_default(a.box, q.dimension(), 3.0);
        const auto samples = certificate_samples(q, box, a.res);
        const double est = hessian_gradient_ratio(q, samples);
        const double c_tilde = std::isfinite(est) ? std::max(1.0, est) : 1.0;
        const Certificate cert = no_local_min_certificate(q, c_tilde, samples);
        const auto minima = grid_local_minima(q, box, a.res);
        out.result["c_tilde_estimate"] = std::isfinite(est) ? json(est) : json("inf");
        out.result["certificate"] = certificate_to_json(cert);
        out.result["grid_local_minima"] = minima.size();
        out.verdicts.push_back("certificate: " + to_string(cert.status));
    }
    return out;
}

// --- partition ---------------------------------------------------------------

struct PartitionArgs {
    PotentialArgs pot;
    std::string box;
    double eps = 0.25, r = 0.3;
    std::size_t res = 257;
    std::string csv;
};

Outcome run_partition(const PartitionArgs& a, const Global&) {
    const auto lp = load_potential(a.pot.potential, a.pot.k);
    const Box box = box_or_default(a.box, lp.potential.dimension(), 4.0);
    const PartitionOfUnity part = build_partition(lp.potential, box, a.eps, a.r, a.res);
    const PartitionCheck check = verify_partition(part, lp.potential, a.eps);
    Outcome out;
    out.result = {{"partition", partition_to_json(part)}, {"check", partition_check_to_json(check)}};
    if (!a.csv.empty()) write_text_file(a.csv, partition_nodes_csv(part));
    std::ostringstream os;
    os << "partition: " << part.centers.size() << " centres, overlap " << check.overlap << ", normalization error "
       << check.max_normalization_error << ", gradient constant " << check.gradient_constant;
    out.verdicts.push_back(os.str());
    const bool ok = check.normalization_ok && check.support_ok && check.gradient_finite;
    out.verdicts.push_back(std::string("verdict: ") + (ok ? "partition_verified" : "partition_check_failed"));
    out.exit_code = ok ? 0 : 2;
    return out;
}

// --- spectrum ---------------------------------------------------------------

struct SpectrumArgs {
    PotentialArgs pot;
    double tau = 1.0;
    std::string box;
    std::size_t res = 129;
    std::size_t count = 12;
    double tol = 1e-8;
    std::size_t max_iter = 0;
    bool plain = false;
};

Outcome run_spectrum(const SpectrumArgs& a, const Global& g) {
    const auto lp = load_potential(a.pot.potential, a.pot.k);
    const Grid grid(box_or_default(a.box, lp.potential.dimension(), 6.0), a.res);
    const SparseSymOperator op = assemble_witten(lp.potential, a.tau, grid);
    LanczosOptions opt;
    opt.shift_invert = !a.plain;
    const std::size_t max_iter = a.max_iter ? a.max_iter : std::min(op.dimension, std::max<std::size_t>(300, 10 * a.count));
    const SpectrumResult res = lanczos_smallest(op, a.count, a.tol, max_iter, g.seed, opt);
    Outcome out;
    out.result = {{"unknowns", op.dimension}, {"spectrum", spectrum_to_json(res)}};
    out.artifact = spectrum_csv(res);
    std::ostringstream os;
    os << "spectrum: " << res.eigenvalues.size() << " eigenvalues, "
       << (res.all_converged() ? "all converged" : "some unconverged");
    out.verdicts.push_back(os.str());
    return out;
}

// --- probe-compactness --------------------------------------------------------

struct ProbeArgs {
    PotentialArgs pot;
    double tau = 1.0;
    double lambda = 50.0;
    std::vector<double> boxes = {4, 6, 8, 10};
    double h = 0.1;
    double tol = 1e-6;
};

Outcome run_probe(const ProbeArgs& a, const Global& g) {
    const auto lp = load_potential(a.pot.potential, a.pot.k);
    const BoxStabilityReport r = box_stability_probe(lp.potential, a.tau, a.lambda, a.boxes, a.h, a.tol, g.seed);
    Outcome out;
    out.result = box_stability_to_json(r);
    std::ostringstream os;
    os << "counts:";
    for (const auto& p : r.probes) os << ' ' << p.count;
    out.verdicts.push_back(os.str());
    out.verdicts.push_back("verdict: " + to_string(r.verdict));
    return out;
}

// --- ims-check ----------------------------------------------------------------

struct ImsArgs {
    PotentialArgs pot;
    double tau = 1.0;
    std::string box;
    std::size_t res = 401;
    double eps = 0.25, r = 0.9;
    std::vector<double> u_center;
    double u_radius = 0.0;
};

Outcome run_ims(const ImsArgs& a, const Global&) {
    const auto lp = load_potential(a.pot.potential, a.pot.k);
    const std::size_t n = lp.potential.dimension();
    const Box box = box_or_default(a.box, n, 4.0);
    const PartitionOfUnity part = build_partition(lp.potential, box, a.eps, a.r, a.res);
    const Grid grid(part.grid.box(), part.grid.points());
    std::vector<double> center = a.u_center;
    double half = std::numeric_limits<double>::infinity();
    if (center.empty()) {
        for (const auto& [lo, hi] : box) center.push_back(0.5 * (lo + hi));
    }
    if (center.size() != n) throw ArgumentError("--u-center needs one entry per variable");
    for (std::size_t d = 0; d < n; ++d) half = std::min(half, 0.5 * (box[d].second - box[d].first));
    const double rho = a.u_radius > 0.0 ? a.u_radius : 0.75 * half;
    const auto u = bump_function(grid, center, rho);
    const ImsResult r = ims_identity_check(lp.potential, a.tau, part, u);
    Outcome out;
    out.result = {{"centres", part.centers.size()}, {"u_center", center}, {"u_radius", rho}, {"ims", ims_to_json(r)}};
    std::ostringstream os;
    os << "ims residual: " << r.residual;
    out.verdicts.push_back(os.str());
    return out;
}

// --- maximal-estimate ---------------------------------------------------------

struct MaximalArgs {
    PotentialArgs pot;
    std::vector<double> taus = {1, 2, 4};
    std::string box;
    double h = 0.05;
    std::string center_box;
    double center_step = 1.0;
    double rho = 1.0;
};

Outcome run_maximal(const MaximalArgs& a, const Global&) {
    const auto lp = load_potential(a.pot.potential, a.pot.k);
    const std::size_t n = lp.potential.dimension();
    const Grid grid = Grid::with_spacing(box_or_default(a.box, n, 5.0), a.h);
    const auto centers = lattice(box_or_default(a.center_box, n, 3.0), a.center_step);
    Outcome out;
    out.result["per_tau"] = json::array();
    for (double tau : a.taus) {
        const MaximalEstimate est = maximal_estimate_probe(lp.potential, tau, centers, a.rho, grid);
        json j = maximal_estimate_to_json(est);
        j["tau"] = tau;
        out.result["per_tau"].push_back(j);
        std::ostringstream os;
        os << "tau " << tau << ": max ratio " << est.max_ratio << ", max/min " << est.max_ratio / est.min_ratio;
        out.verdicts.push_back(os.str());
    }
    return out;
}

// --- mtau --------------------------------------------------------------------

struct MtauArgs {
    double tau = 0.5, tau0 = 1.0, c = 1.0;
};

Outcome run_mtau(const MtauArgs& a, const Global&) {
    const double m = m_tau(a.tau, a.tau0, a.c);
    const double q = (m * a.tau / a.tau0) * (m * a.tau / a.tau0);
    Outcome out;
    out.result = {{"m", m}, {"scaled_square", q}, {"lower", 1.0 - 1.0 / (2.0 * a.c)}, {"upper", 1.0}};
    std::ostringstream os;
    os.precision(12);
    os << "m_tau = " << m << ", (m tau / tau0)^2 = " << q;
    out.verdicts.push_back(os.str());
    return out;
}

// --- driver ------------------------------------------------------------------

/// Every option of the chosen subcommand with its effective value as a string,
/// so the echo can be replayed through --config.
json echo_config(const CLI::App& app, const CLI::App& cmd) {
    json opts = json::object();
    for (const CLI::Option* opt : cmd.get_options()) {
        if (opt->get_lnames().empty() || opt->get_lnames()[0] == "help") continue;
        const std::string name = opt->get_lnames()[0];
        if (opt->get_type_size() == 0) {
            opts[name] = opt->count() > 0;
        } else if (opt->count() > 0) {
            std::string joined;
            for (const auto& r : opt->results()) joined += (joined.empty() ? "" : ",") + r;
            opts[name] = joined;
        } else {
            opts[name] = opt->get_default_str();
        }
    }
    json global = json::object();
    for (const char* name : {"seed"}) {
        const CLI::Option* opt = app.get_option(std::string("--") + name);
        global[name] = opt->count() > 0 ? opt->results().front() : opt->get_default_str();
    }
    return {{"command", cmd.get_name()}, {"global", global}, {"options", opts}};
}

/// Rebuilds an argument vector from an echoed config (or a whole report).
std::vector<std::string> replay_arguments(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot read config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ArgumentError(std::string("malformed config JSON: ") + e.what());
    }
    if (j.contains("config")) j = j["config"];
    if (!j.contains("command") || !j.contains("options")) throw ArgumentError("config lacks command/options");
    std::vector<std::string> args;
    const json global = j.value("global", json::object());
    for (const auto& [k, v] : global.items()) {
        args.push_back("--" + k);
        args.push_back(v.get<std::string>());
    }
    args.push_back(j["command"].get<std::string>());
    for (const auto& [k, v] : j["options"].items()) {
        if (v.is_boolean()) {
            if (v.get<bool>()) args.push_back("--" + k);
        } else if (!v.get<std::string>().empty()) {
            args.push_back("--" + k);
            args.push_back(v.get<std::string>());
        }
    }
    return args;
}

int run(int argc, char** argv, bool allow_config) {
    CLI::App app{"Compact-resolvent criterion toolkit for Witten Laplacians on 0-forms"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(allow_config ? 0 : 1, 1);
    app.fallthrough();
    app.set_version_flag("--version", kVersion);
    Global g;
    app.add_option("--seed", g.seed, "seed for every random choice");
    app.add_option("--out", g.out, "output file (report JSON; eigenvalue CSV for spectrum)");
    app.add_flag("--json", g.json_stdout, "print the report JSON on stdout");
    if (allow_config) app.add_option("--config", g.config, "replay the config echoed in an earlier report");

    CriterionArgs crit;
    auto* c_crit = app.add_subcommand("check-criterion", "sample the three assumption conditions");
    add_potential(c_crit, crit.pot);
    c_crit->add_option("--delta1", crit.delta1)->check(CLI::Bound(0.0, 1.0));
    c_crit->add_option("--delta2", crit.delta2)->check(CLI::Bound(0.0, 1.0));
    c_crit->add_option("--plan", crit.plan, "sampling plan JSON overriding the defaults");

    LimitArgs lim;
    auto* c_lim = app.add_subcommand("limit-poly", "limit of a power-law scaling sequence and its certificate");
    add_potential(c_lim, lim.pot);
    c_lim->add_option("--seq", lim.seq, "sequence family");
    c_lim->add_option("--v", lim.v, "direction of y_j")->delimiter(',');
    c_lim->add_option("--a", lim.a);
    c_lim->add_option("--b", lim.b);
    c_lim->add_option("--c", lim.c);
    c_lim->add_option("--j", lim.j, "schedule of j values")->delimiter(',');
    c_lim->add_option("--tol", lim.tol);
    c_lim->add_option("--box", lim.box, "certificate sampling box lo:hi,...");
    c_lim->add_option("--res", lim.res, "certificate grid points per dimension")->check(CLI::Range(3, 2001));
    c_lim->add_option("--limit-out", lim.limit_out, "write the limit polynomial JSON here");

    PartitionArgs part;
    auto* c_part = app.add_subcommand("partition", "quadratic partition of unity for the slowly varying metric");
    add_potential(c_part, part.pot);
    c_part->add_option("--box", part.box);
    c_part->add_option("--eps", part.eps);
    c_part->add_option("--r", part.r);
    c_part->add_option("--res", part.res)->check(CLI::Range(2, 100000));
    c_part->add_option("--csv", part.csv, "write per-node phi values here");

    SpectrumArgs spec;
    auto* c_spec = app.add_subcommand("spectrum", "smallest eigenvalues of the discretized operator");
    add_potential(c_spec, spec.pot);
    c_spec->add_option("--tau", spec.tau);
    c_spec->add_option("--box", spec.box);
    c_spec->add_option("--res", spec.res, "grid points per dimension, boundary included");
    c_spec->add_option("--count", spec.count);
    c_spec->add_option("--tol", spec.tol);
    c_spec->add_option("--max-iter", spec.max_iter, "0 picks a default");
    c_spec->add_flag("--plain", spec.plain, "iterate on A itself instead of (A - sigma)^-1");

    ProbeArgs probe;
    auto* c_probe = app.add_subcommand("probe-compactness", "eigenvalue counts below lambda on growing boxes");
    c_probe->set_help_flag("--help", "print this help");  // frees -h for the spacing flag
    add_potential(c_probe, probe.pot);
    c_probe->add_option("--tau", probe.tau);
    c_probe->add_option("--lambda", probe.lambda);
    c_probe->add_option("--boxes", probe.boxes, "half-widths L of [-L,L]^n")->delimiter(',');
    c_probe->add_option("--h", probe.h);
    c_probe->add_option("--tol", probe.tol);

    ImsArgs ims;
    auto* c_ims = app.add_subcommand("ims-check", "IMS localization identity on a built partition");
    add_potential(c_ims, ims.pot);
    c_ims->add_option("--tau", ims.tau);
    c_ims->add_option("--box", ims.box);
    c_ims->add_option("--res", ims.res);
    c_ims->add_option("--eps", ims.eps);
    c_ims->add_option("--r", ims.r);
    c_ims->add_option("--u-center", ims.u_center)->delimiter(',');
    c_ims->add_option("--u-radius", ims.u_radius, "0 picks 3/4 of the smallest half-width");

    MaximalArgs maxi;
    auto* c_max = app.add_subcommand("maximal-estimate", "empirical constant of the maximal estimate over bumps");
    c_max->set_help_flag("--help", "print this help");
    add_potential(c_max, maxi.pot);
    c_max->add_option("--tau", maxi.taus)->delimiter(',');
    c_max->add_option("--box", maxi.box);
    c_max->add_option("--h", maxi.h);
    c_max->add_option("--center-box", maxi.center_box);
    c_max->add_option("--center-step", maxi.center_step);
    c_max->add_option("--rho", maxi.rho);

    MtauArgs mt;
    auto* c_mt = app.add_subcommand("mtau", "the scaling factor m_tau and its bracketing");
    c_mt->add_option("--tau", mt.tau)->required();
    c_mt->add_option("--tau0", mt.tau0)->required();
    c_mt->add_option("--c", mt.c)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (!g.config.empty()) {
        std::vector<std::string> args = replay_arguments(g.config);
        if (!g.out.empty()) args.insert(args.begin(), {"--out", g.out});
        if (g.json_stdout) args.insert(args.begin(), "--json");
        args.insert(args.begin(), argv[0]);
        std::vector<char*> ptrs;
        for (auto& s : args) ptrs.push_back(s.data());
        return run(static_cast<int>(ptrs.size()), ptrs.data(), false);
    }
    if (app.get_subcommands().empty()) {
        std::cerr << "a subcommand is required\n" << app.help();
        return 1;
    }

    const CLI::App* cmd = app.get_subcommands().front();
    const auto start = std::chrono::steady_clock::now();
    try {
        Outcome out;
        const std::string name = cmd->get_name();
        if (name == "check-criterion") out = run_criterion(crit, g);
        else if (name == "limit-poly") out = run_limit(lim, g);
        else if (name == "partition") out = run_partition(part, g);
        else if (name == "spectrum") out = run_spectrum(spec, g);
        else if (name == "probe-compactness") out = run_probe(probe, g);
        else if (name == "ims-check") out = run_ims(ims, g);
        else if (name == "maximal-estimate") out = run_maximal(maxi, g);
        else out = run_mtau(mt, g);

        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        json report = {{"tool", "witten"},
                       {"version", kVersion},
                       {"config", echo_config(app, *cmd)},
                       {"result", out.result},
                       {"verdicts", out.verdicts},
                       {"exit_code", out.exit_code},
                       {"timing", {{"wall_seconds", wall}}}};
        if (!g.out.empty()) write_text_file(g.out, out.artifact.empty() ? report.dump(2) + "\n" : out.artifact);
        if (g.json_stdout) {
            std::cout << report.dump(2) << '\n';
        } else {
            for (const auto& line : out.verdicts) std::cout << line << '\n';
        }
        return out.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv, true);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
