// rle: experiment runner for Brownian motion and the Riemannian Langevin
// equation on barrier geometries.
//
// Exit codes: 0 pass, 1 computational or test failure, 2 usage/validation.

#include "rle/rle.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using nlohmann::json;

namespace {

enum Exit { kPass = 0, kFail = 1, kUsage = 2 };

struct Common
{
    std::string geometry;
    int dim = 1;
    double beta = 1.0;
    double dt = 1e-3;
    double horizon = 10.0;
    std::size_t replicas = 256;
    std::uint64_t seed = 0;
    std::string out;
    std::string report;
    std::string plot_data;
    double tol = 1e-8;
    bool no_timestamp = false;
    unsigned threads = 0;
    std::string config;  // consumed before parsing; declared so --help lists it
};

std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

rle::SimulationConfig sim_config(const Common& c)
{
    rle::SimulationConfig s;
    s.beta = c.beta;
    s.dt = c.dt;
    s.horizon = c.horizon;
    s.replicas = c.replicas;
    s.seed = c.seed;
    s.threads = c.threads;
    return s;
}

json sim_json(const rle::SimulationConfig& s)
{
    return {{"beta", s.beta}, {"dt", s.dt},          {"horizon", s.horizon},
            {"replicas", s.replicas}, {"seed", s.seed}, {"scheme", rle::scheme_name(s.scheme)}};
}

void open_output(std::ofstream& os, const std::string& path)
{
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty() && !std::filesystem::is_directory(parent))
        throw rle::ValidationError("output directory '" + parent.string() + "' does not exist");
    os.open(path, std::ios::binary);
    if (!os)
        throw rle::ValidationError("cannot write '" + path + "'");
}

// JSON goes to `path`, or to stdout when it is empty.
void emit_json(json doc, const Common& c, const std::string& path)
{
    if (!c.no_timestamp)
        doc["timestamp"] = utc_timestamp();
    const std::string text = doc.dump(2) + "\n";
    if (path.empty())
    {
        std::cout << text;
        return;
    }
    std::ofstream os;
    open_output(os, path);
    os << text;
}

// Two-column whitespace-separated file under the --plot-data directory.
void write_plot(const Common& c, const std::string& name, const std::vector<std::pair<double, double>>& rows)
{
    if (c.plot_data.empty())
        return;
    std::filesystem::create_directories(c.plot_data);
    std::ofstream os;
    open_output(os, (std::filesystem::path(c.plot_data) / name).string());
    for (const auto& [a, b] : rows)
        os << rle::format_double(a) << ' ' << rle::format_double(b) << '\n';
}

//---------------------------------------------------------------------------//
// verify-geometry
//---------------------------------------------------------------------------//
struct VerifyGeometryArgs
{
    std::size_t points = 100;
    double fd_tol = 1e-4;
};

int cmd_verify_geometry(const Common& c, const VerifyGeometryArgs& a)
{
    if (a.points < 1)
        throw rle::ValidationError("--points must be >= 1");
    const auto geometry = rle::make_geometry(c.geometry, c.dim);
    rle::CertifyOptions opt;
    opt.tol = c.tol;
    opt.fd_tol = a.fd_tol;
    const auto cert = std::visit(
        [&](const auto& g) { return rle::certify_geometry(g, a.points, c.seed, opt); }, geometry);

    json checks = json::array();
    for (const auto& ch : cert.checks)
    {
        json rec{{"name", ch.name}, {"threshold", ch.threshold}};
        rec["max_residual"] = ch.skipped ? json(nullptr) : json(ch.max_residual);
        rec["status"] = ch.skipped ? "skipped" : (ch.pass() ? "pass" : "fail");
        checks.push_back(rec);
    }
    json doc{{"command", "verify-geometry"},
             {"geometry", cert.geometry},
             {"dim", cert.dim},
             {"points", cert.points},
             {"seed", c.seed},
             {"tol", c.tol},
             {"fd_tol", a.fd_tol},
             {"checks", checks},
             {"verdict", cert.pass() ? "pass" : "fail"}};
    emit_json(doc, c, c.out);
    return cert.pass() ? kPass : kFail;
}

//---------------------------------------------------------------------------//
// verify-theorems
//---------------------------------------------------------------------------//
struct VerifyTheoremsArgs
{
    std::string qv_convention = "generator";
    bool no_rerun = false;
};

int cmd_verify_theorems(const Common& c, const VerifyTheoremsArgs& a)
{
    const auto geometry = rle::make_geometry(c.geometry, c.dim);
    if (std::holds_alternative<rle::Lorentz>(geometry) && c.beta != 2.0)
        throw rle::UsageError("the Lorentz light-cone theorem holds at temperature 1/2 (beta = 2), got beta = "
                              + rle::format_double(c.beta));

    rle::SuiteConfig suite;
    suite.sim = sim_config(c);
    suite.sim.validate();
    suite.qv_factor = a.qv_convention == "literal" ? 1.0 / c.beta : rle::generator_qv_factor(c.beta);
    suite.rerun_on_failure = !a.no_rerun;

    std::vector<rle::StatReport> reports;
    std::visit(
        [&]<class G>(const G& g) {
            const rle::Vec x0 = rle::default_start(g);
            if constexpr (std::same_as<G, rle::Lorentz>)
            {
                reports.push_back(rle::barrier_process_test(g, x0, suite));
                reports.push_back(rle::lorentz_suite(g, x0, suite));
            }
            else
            {
                if constexpr (std::same_as<G, rle::Orthant>)
                    reports.push_back(rle::barrier_process_test(g, x0, suite));
                for (auto scheme : {rle::Scheme::exact_transform, rle::Scheme::euler_maruyama})
                {
                    rle::SuiteConfig s = suite;
                    s.sim.scheme = scheme;
                    for (auto& r : rle::chart_identity_tests(g, x0, s))
                        reports.push_back(std::move(r));
                }
            }
        },
        geometry);

    json results = json::array();
    bool pass = true;
    for (const auto& r : reports)
    {
        pass = pass && r.verdict();
        for (auto& rec : rle::to_json(r))
            results.push_back(std::move(rec));
    }
    json doc{{"command", "verify-theorems"},
             {"geometry", c.geometry},
             {"dim", c.dim},
             {"qv_convention", a.qv_convention},
             {"qv_factor", suite.qv_factor},
             {"simulation", sim_json(suite.sim)},
             {"results", results},
             {"verdict", pass ? "pass" : "fail"}};
    emit_json(doc, c, c.out);
    return pass ? kPass : kFail;
}

//---------------------------------------------------------------------------//
// simulate
//---------------------------------------------------------------------------//
struct SimulateArgs
{
    std::string energy = "zero";
    std::string scheme = "euler-maruyama";
    std::size_t record_every = 1;
    std::string boundary = "resample";
    int max_tries = 100;
};

int cmd_simulate(const Common& c, const SimulateArgs& a)
{
    const auto geometry = rle::make_geometry(c.geometry, c.dim);
    auto sim = sim_config(c);
    sim.record_every = a.record_every;
    sim.max_tries = a.max_tries;
    sim.boundary_policy = a.boundary == "abort" ? rle::BoundaryPolicy::abort : rle::BoundaryPolicy::resample;
    sim.scheme = a.scheme == "exact-transform" ? rle::Scheme::exact_transform : rle::Scheme::euler_maruyama;
    sim.validate();
    const int dim = std::visit([](const auto& g) { return g.dim(); }, geometry);
    const auto energy = rle::parse_energy(a.energy, dim);
    const bool has_energy = a.energy != "zero";
    if (has_energy && sim.scheme == rle::Scheme::exact_transform)
        throw rle::UsageError("the exact-transform sampler simulates Brownian motion only (energy must be zero)");

    const auto paths = std::visit(
        [&](const auto& g) {
            const rle::Vec x0 = rle::default_start(g);
            return has_energy ? rle::simulate_rle(g, energy, x0, sim) : rle::simulate(g, x0, sim);
        },
        geometry);

    if (!c.out.empty())
    {
        std::ofstream os;
        open_output(os, c.out);
        rle::write_paths_csv(os, paths);
    }
    if (!c.plot_data.empty())
    {
        // ensemble mean of each coordinate against time
        for (int i = 0; i < dim; ++i)
        {
            std::vector<std::pair<double, double>> rows;
            for (std::size_t k = 0; k < paths.front().size(); ++k)
            {
                std::vector<double> v;
                for (const auto& p : paths)
                    v.push_back(p.coord(k, i));
                rows.emplace_back(paths.front().times()[k], rle::stats::mean_estimate(v).mean);
            }
            write_plot(c, "mean_x" + std::to_string(i) + ".dat", rows);
        }
    }

    const std::size_t steps = sim.steps() * sim.replicas;
    json doc{{"command", "simulate"},
             {"geometry", c.geometry},
             {"dim", dim},
             {"energy", a.energy},
             {"simulation", sim_json(sim)},
             {"record_every", sim.record_every},
             {"rows", paths.size() * paths.front().size()},
             {"rejections", rle::total_rejections(paths)},
             {"rejection_rate", double(rle::total_rejections(paths)) / double(steps)},
             {"paths_csv", c.out.empty() ? json(nullptr) : json(c.out)}};
    emit_json(doc, c, c.report);
    return kPass;
}

//---------------------------------------------------------------------------//
// gibbs
//---------------------------------------------------------------------------//
struct GibbsArgs
{
    std::string energy = "zero";
    int bins = 20;
    double tv_tolerance = 0.05;
};

int cmd_gibbs(const Common& c, const GibbsArgs& a)
{
    const auto geometry = rle::make_geometry(c.geometry, c.dim);
    auto sim = sim_config(c);
    sim.validate();
    sim.record_every = sim.steps();
    const auto energy = rle::parse_energy(a.energy, c.dim);
    rle::StationaryOptions opt;
    opt.bins = a.bins;
    opt.tv_tolerance = a.tv_tolerance;

    const auto result = std::visit(
        [&]<class G>(const G& g) -> rle::StationaryResult {
            if constexpr (std::same_as<G, rle::Lorentz>)
                throw rle::UsageError("gibbs supports the one-dimensional cube");
            else
            {
                // fail before simulating if the target cannot be normalized
                rle::gibbs_normalizer(g, energy, c.beta, opt);
                if constexpr (!std::same_as<G, rle::Cube>)
                    throw rle::UsageError("gibbs histograms need the bounded cube");
                const auto paths = rle::simulate_rle(g, energy, rle::default_start(g), sim);
                std::vector<double> ends;
                for (const auto& p : paths)
                    ends.push_back(p.back()[0]);
                auto res = rle::stationary_histogram_test(ends, g, energy, c.beta, opt);
                res.report.config["rejections"] = rle::total_rejections(paths);
                return res;
            }
        },
        geometry);

    const int bins = a.bins;
    const double width = 1.0 / bins;
    if (!c.out.empty())
    {
        std::ofstream os;
        open_output(os, c.out);
        os << "bin_lo,bin_hi,empirical,target\n";
        for (int k = 0; k < bins; ++k)
            os << rle::format_double(result.edges[k]) << ',' << rle::format_double(result.edges[k + 1]) << ','
               << rle::format_double(result.empirical[k]) << ',' << rle::format_double(result.target[k]) << '\n';
    }
    std::vector<std::pair<double, double>> hist, target;
    for (int k = 0; k < bins; ++k)
    {
        const double mid = 0.5 * (result.edges[k] + result.edges[k + 1]);
        hist.emplace_back(mid, result.empirical[k] / width);
        target.emplace_back(mid, result.target[k] / width);
    }
    write_plot(c, "histogram.dat", hist);
    write_plot(c, "target.dat", target);

    const auto& tv = result.report.check("total_variation");
    json doc{{"command", "gibbs"},
             {"geometry", c.geometry},
             {"dim", c.dim},
             {"energy", a.energy},
             {"simulation", sim_json(sim)},
             {"normalizer", result.normalizer},
             {"tv_distance", tv.estimate},
             {"results", rle::to_json(result.report)},
             {"histogram_csv", c.out.empty() ? json(nullptr) : json(c.out)},
             {"verdict", result.report.verdict() ? "pass" : "fail"}};
    emit_json(doc, c, c.report);
    return result.report.verdict() ? kPass : kFail;
}

//---------------------------------------------------------------------------//
// central-path
//---------------------------------------------------------------------------//
struct CentralPathArgs
{
    std::string cost;
    double theta_max = 1024;
    double theta_start = 1;
    double flow_to = 0;  // > 0: also integrate the flow from theta_start
    double flow_step = 1e-3;
};

int cmd_central_path(const Common& c, const CentralPathArgs& a)
{
    const auto geometry = rle::make_geometry(c.geometry, c.dim);
    const rle::Vec cost = rle::detail::broadcast(rle::detail::parse_list(a.cost), c.dim, "--cost");
    rle::NewtonOptions newton;
    newton.tol = std::min(c.tol, 1e-10);

    json doc{{"command", "central-path"},
             {"geometry", c.geometry},
             {"dim", c.dim},
             {"cost", std::vector<double>(cost.data(), cost.data() + cost.size())},
             {"theta_start", a.theta_start},
             {"theta_max", a.theta_max},
             {"newton_tol", newton.tol}};

    std::visit(
        [&](const auto& g) {
            const rle::ConicProgram prog(g, cost);
            const auto traj = rle::solve_conic(prog, a.theta_max, newton, std::nullopt, a.theta_start);
            if (!c.out.empty())
            {
                std::ofstream os;
                open_output(os, c.out);
                os << "theta,objective";
                for (int i = 0; i < c.dim; ++i)
                    os << ",x" << i;
                os << '\n';
                for (const auto& p : traj)
                {
                    os << rle::format_double(p.theta) << ',' << rle::format_double(p.objective);
                    for (int i = 0; i < c.dim; ++i)
                        os << ',' << rle::format_double(p.x[i]);
                    os << '\n';
                }
            }
            std::vector<std::pair<double, double>> rows;
            json stages = json::array();
            bool monotone = true;
            for (std::size_t k = 0; k < traj.size(); ++k)
            {
                const auto& p = traj[k];
                rows.emplace_back(p.theta, p.objective);
                stages.push_back({{"theta", p.theta},
                                  {"objective", p.objective},
                                  {"iterations", p.iterations},
                                  {"residual", rle::central_residual(prog, p.theta, p.x)}});
                if (k > 0 && !(p.objective < traj[k - 1].objective))
                    monotone = false;
            }
            write_plot(c, "objective.dat", rows);
            doc["stages"] = stages;
            doc["final_objective"] = traj.back().objective;
            doc["objective_strictly_decreasing"] = monotone;

            if (a.flow_to > 0)
            {
                const auto start = rle::newton_central_point(prog, a.theta_start, rle::default_start(g), newton);
                const auto flow = rle::flow_central_path(prog, a.theta_start, a.flow_to, start, a.flow_step);
                const auto end = rle::newton_central_point(prog, a.flow_to, flow.back().x, newton);
                doc["flow"] = {{"theta0", a.theta_start},
                               {"theta1", a.flow_to},
                               {"step", a.flow_step},
                               {"endpoint", std::vector<double>(flow.back().x.data(),
                                                                flow.back().x.data() + c.dim)},
                               {"endpoint_residual", flow.back().newton_decrement},
                               {"newton_distance", (flow.back().x - end.x).norm()}};
            }
        },
        geometry);
    emit_json(doc, c, c.report);
    return kPass;
}

//---------------------------------------------------------------------------//
// Options and config file
//---------------------------------------------------------------------------//
void add_common(CLI::App* cmd, Common& c, bool simulation)
{
    cmd->add_option("--geometry", c.geometry, "orthant, cube or lorentz")->required();
    cmd->add_option("--dim", c.dim, "ambient dimension (lorentz: n+1)");
    cmd->add_option("--seed", c.seed, "random seed");
    cmd->add_option("--out", c.out, "primary output file");
    cmd->add_option("--tol", c.tol, "tolerance");
    cmd->add_flag("--no-timestamp", c.no_timestamp, "omit the timestamp from JSON output");
    cmd->add_option("--config", c.config, "flat key=value file; command-line flags take precedence");
    if (simulation)
    {
        cmd->add_option("--beta", c.beta, "inverse temperature");
        cmd->add_option("--dt", c.dt, "time step");
        cmd->add_option("--horizon", c.horizon, "time horizon");
        cmd->add_option("--replicas", c.replicas, "number of replicas");
        cmd->add_option("--threads", c.threads, "worker threads (0: all cores); output does not depend on it");
    }
}

// Turn `key = value` lines into `--key=value` tokens. Booleans become flags.
std::vector<std::string> config_tokens(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw rle::ValidationError("cannot read config file '" + path + "'");
    std::vector<std::string> out;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(is, line))
    {
        ++lineno;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw rle::ValidationError(path + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        std::replace(key.begin(), key.end(), '_', '-');
        if (key == "config")
            throw rle::ValidationError(path + ": config files cannot include other config files");
        if (value == "true")
            out.push_back("--" + key);
        else if (value != "false")
            out.push_back("--" + key + "=" + value);
    }
    return out;
}

// Insert config-file tokens right after the subcommand so later flags win.
std::vector<std::string> expand_config(std::vector<std::string> args)
{
    for (std::size_t i = 1; i < args.size(); ++i)
    {
        std::string path;
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
        else
            continue;
        const auto tokens = config_tokens(path);
        if (args.size() < 2)
            break;
        args.insert(args.begin() + 2, tokens.begin(), tokens.end());
        break;
    }
    return args;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Brownian motion and Riemannian Langevin dynamics on barrier geometries", "rle"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    Common common;
    VerifyGeometryArgs vg;
    VerifyTheoremsArgs vt;
    SimulateArgs sa;
    GibbsArgs ga;
    CentralPathArgs cp;

    auto* verify_geometry = app.add_subcommand("verify-geometry", "closed-form and finite-difference residuals");
    add_common(verify_geometry, common, false);
    verify_geometry->add_option("--points", vg.points, "sampled interior points");
    verify_geometry->add_option("--fd-tol", vg.fd_tol, "relative tolerance of finite-difference checks");

    auto* verify_theorems = app.add_subcommand("verify-theorems", "Monte Carlo checks of the Brownian-motion identities");
    add_common(verify_theorems, common, true);
    verify_theorems->add_option("--qv-convention", vt.qv_convention,
                                "quadratic variation per unit |df|^2: generator (2/beta) or literal (1/beta)")
        ->check(CLI::IsMember({"generator", "literal"}));
    verify_theorems->add_flag("--no-rerun", vt.no_rerun, "do not re-run a failed test with a fresh seed");

    auto* simulate = app.add_subcommand("simulate", "simulate an ensemble and write paths CSV");
    add_common(simulate, common, true);
    simulate->add_option("--energy", sa.energy, "zero, linear:c=.., quadratic:m=..,q=.., barrier:alpha=..");
    simulate->add_option("--scheme", sa.scheme, "euler-maruyama or exact-transform")
        ->check(CLI::IsMember({"euler-maruyama", "exact-transform"}));
    simulate->add_option("--record-every", sa.record_every, "keep every k-th grid state");
    simulate->add_option("--boundary", sa.boundary, "resample or abort")->check(CLI::IsMember({"resample", "abort"}));
    simulate->add_option("--max-tries", sa.max_tries, "resamples per step before failing");
    simulate->add_option("--report", common.report, "JSON summary file (default stdout)");
    simulate->add_option("--plot-data", common.plot_data, "directory for two-column plot files");

    auto* gibbs = app.add_subcommand("gibbs", "endpoint histogram against the Gibbs density");
    add_common(gibbs, common, true);
    gibbs->add_option("--energy", ga.energy, "zero, linear:c=.., quadratic:m=..,q=.., barrier:alpha=..");
    gibbs->add_option("--bins", ga.bins, "histogram bins");
    gibbs->add_option("--tv-tol", ga.tv_tolerance, "total-variation tolerance");
    gibbs->add_option("--report", common.report, "JSON report file (default stdout)");
    gibbs->add_option("--plot-data", common.plot_data, "directory for two-column plot files");

    auto* central = app.add_subcommand("central-path", "follow the central path of min c.x");
    add_common(central, common, false);
    central->add_option("--cost", cp.cost, "comma-separated cost vector")->required();
    central->add_option("--theta-max", cp.theta_max, "last barrier parameter");
    central->add_option("--theta-start", cp.theta_start, "first barrier parameter");
    central->add_option("--flow-to", cp.flow_to, "also integrate the gradient flow up to this theta");
    central->add_option("--flow-step", cp.flow_step, "flow step in theta");
    central->add_option("--report", common.report, "JSON summary file (default stdout)");
    central->add_option("--plot-data", common.plot_data, "directory for two-column plot files");

    for (auto* sub : app.get_subcommands({}))
        sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    try
    {
        std::vector<std::string> args(argv, argv + argc);
        args = expand_config(std::move(args));
        std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
        app.parse(std::move(reversed));
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? kPass : kUsage;
    }
    catch (const rle::Error& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }

    try
    {
        if (*verify_geometry)
            return cmd_verify_geometry(common, vg);
        if (*verify_theorems)
            return cmd_verify_theorems(common, vt);
        if (*simulate)
            return cmd_simulate(common, sa);
        if (*gibbs)
            return cmd_gibbs(common, ga);
        if (*central)
            return cmd_central_path(common, cp);
    }
    catch (const rle::ValidationError& e)
    {
        std::cerr << "validation error: " << e.what() << '\n';
        return kUsage;
    }
    catch (const rle::UsageError& e)
    {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    }
    catch (const rle::StepFailure& e)
    {
        std::cerr << "simulation failed: replica " << e.replica() << " at t=" << e.time() << ": " << e.what()
                  << '\n';
        return kFail;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return kFail;
    }
    return kUsage;
}
