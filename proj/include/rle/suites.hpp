#pragma once

#include "rle/analysis.hpp"
#include "rle/cones.hpp"
#include "rle/sde.hpp"

#include <functional>
#include <string>
#include <vector>

namespace rle {

/*!
 * Monte Carlo suites that check the distributional claims on the built-in
 * geometries.
 *
 * `qv_factor` is the quadratic variation per unit time of an observable with
 * |df|_g^2 = 1. The integrators realize generator (1/beta) Delta, for which
 * it is generator_qv_factor(beta) = 2/beta.
 */
struct SuiteConfig
{
    SimulationConfig sim;
    double qv_factor = 2.0;
    ConformanceOptions conformance;
    double covariation_rel_tol = 0.10;  // Lorentz pairwise covariation
    bool rerun_on_failure = true;
};

/// Run a seeded test; if it fails, run it once more with a fresh seed.
inline StatReport with_rerun(const std::function<StatReport(std::uint64_t)>& test, std::uint64_t seed,
                             bool rerun)
{
    StatReport first = test(seed);
    first.config["seed"] = seed;
    if (first.verdict() || !rerun)
        return first;
    const std::uint64_t fresh = splitmix64(seed ^ 0x5DEECE66Dull);
    StatReport second = test(fresh);
    second.config["seed"] = fresh;
    second.config["rerun_of_seed"] = seed;
    return second;
}

inline std::string scheme_name(Scheme s)
{
    return s == Scheme::exact_transform ? "exact_transform" : "euler_maruyama";
}

/// sqrt(beta/n) (F(X_t) - F(X_0)) on a cone: zero drift, QV rate beta * qv_factor.
template<BarrierGeometry G>
StatReport barrier_process_test(const G& geometry, const Vec& x0, const SuiteConfig& cfg)
{
    if (!geometry.is_cone())
        throw UsageError("the scaled barrier process is defined on cones");
    const double beta = cfg.sim.beta;
    const double scale = std::sqrt(beta / geometry.dim());
    const double f_start = geometry.barrier(x0);
    return with_rerun(
        [&](std::uint64_t seed) {
            SimulationConfig sim = cfg.sim;
            sim.seed = seed;
            const auto paths = simulate(geometry, x0, sim);
            const auto obs = observable_ensemble(
                paths, [&](const Vec& x) { return scale * (geometry.barrier(x) - f_start); });
            auto report = bm_conformance_test(obs, 0.0, beta * cfg.qv_factor, cfg.conformance);
            report.test = std::string("barrier_process/") + std::string(geometry.name()) + "/n="
                          + std::to_string(geometry.dim()) + "/" + scheme_name(sim.scheme);
            report.config["beta"] = beta;
            report.config["dt"] = sim.dt;
            report.config["rejections"] = total_rejections(paths);
            return report;
        },
        cfg.sim.seed, cfg.rerun_on_failure);
}

/// Flattening coordinate of one axis: log x (orthant) or log tan(pi x/2) (cube).
template<BarrierGeometry G>
double chart_observable(const G&, double x)
{
    if constexpr (std::same_as<G, Cube>)
        return std::log(std::tan(std::numbers::pi * x / 2));
    else if constexpr (std::same_as<G, Orthant>)
        return std::log(x);
    else
        throw UsageError("no flattening chart for this geometry");
}

/// Each chart coordinate: zero drift, QV rate qv_factor.
template<BarrierGeometry G>
std::vector<StatReport> chart_identity_tests(const G& geometry, const Vec& x0, const SuiteConfig& cfg)
{
    std::vector<StatReport> out;
    const Ensemble base = simulate(geometry, x0, cfg.sim);
    for (int i = 0; i < geometry.dim(); ++i)
    {
        out.push_back(with_rerun(
            [&, i](std::uint64_t seed) {
                SimulationConfig sim = cfg.sim;
                sim.seed = seed;
                Ensemble fresh;
                if (seed != cfg.sim.seed)
                    fresh = simulate(geometry, x0, sim);
                const Ensemble& paths = seed == cfg.sim.seed ? base : fresh;
                const auto obs = observable_ensemble(
                    paths, [&](const Vec& x) { return chart_observable(geometry, x[i]); });
                auto report = bm_conformance_test(obs, 0.0, cfg.qv_factor, cfg.conformance);
                report.test = std::string("chart_coordinate/") + std::string(geometry.name()) + "/n="
                              + std::to_string(geometry.dim()) + "/i=" + std::to_string(i) + "/"
                              + scheme_name(sim.scheme);
                report.config["beta"] = sim.beta;
                report.config["dt"] = sim.dt;
                report.config["rejections"] = total_rejections(paths);
                return report;
            },
            cfg.sim.seed, cfg.rerun_on_failure));
    }
    return out;
}

/// Light-cone observables f^0, f^i with b_i = (1, e_i) at beta = 2.
inline StatReport lorentz_suite(const Lorentz& cone, const Vec& x0, const SuiteConfig& cfg)
{
    if (cfg.sim.beta != 2.0)
        throw UsageError("the Lorentz light-cone theorem holds at beta = 2 (temperature 1/2), got beta = "
                         + std::to_string(cfg.sim.beta));
    const auto lights = axis_light_vectors(cone.spatial_dim());
    LorentzTestOptions opt;
    opt.qv_factor = cfg.qv_factor;
    opt.z = cfg.conformance.z;
    opt.covariation_rel_tol = cfg.covariation_rel_tol;
    opt.min_replicas = cfg.conformance.min_replicas;
    return with_rerun(
        [&](std::uint64_t seed) {
            SimulationConfig sim = cfg.sim;
            sim.seed = seed;
            const auto paths = simulate_bm(cone, x0, sim);
            auto report = lorentz_theorem_test(paths, sim.beta, lights, opt);
            report.config["dt"] = sim.dt;
            report.config["rejections"] = total_rejections(paths);
            return report;
        },
        cfg.sim.seed, cfg.rerun_on_failure);
}

}  // namespace rle
