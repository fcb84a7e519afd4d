#include "rle/analysis.hpp"
#include "rle/suites.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace rle;

namespace {
constexpr double pi = std::numbers::pi;

SimulationConfig config(double beta, double dt, double horizon, std::size_t replicas, std::uint64_t seed)
{
    SimulationConfig cfg;
    cfg.beta = beta;
    cfg.dt = dt;
    cfg.horizon = horizon;
    cfg.replicas = replicas;
    cfg.seed = seed;
    return cfg;
}

// Gaussian walks with the given drift and QV rate, built directly.
ScalarEnsemble gaussian_walks(double drift, double rate, std::size_t replicas, std::size_t steps,
                              double dt, std::uint64_t seed)
{
    ScalarEnsemble out;
    for (std::size_t r = 0; r < replicas; ++r)
    {
        RandomStream rng(seed, r);
        ScalarPath p;
        double v = 0;
        for (std::size_t k = 0; k <= steps; ++k)
        {
            p.times.push_back(k * dt);
            p.values.push_back(v);
            v += drift * dt + std::sqrt(rate * dt) * rng.normal();
        }
        out.push_back(std::move(p));
    }
    return out;
}

// Ensemble mean of realized minus predicted covariation, in units of its stderr.
template<class G>
double covariation_zscore(const G& g, const Ensemble& paths, const std::function<double(const Vec&)>& f1,
                          const std::function<Vec(const Vec&)>& d1,
                          const std::function<double(const Vec&)>& f2,
                          const std::function<Vec(const Vec&)>& d2, double beta)
{
    std::vector<double> diff;
    for (const auto& p : paths)
    {
        const double realized
            = realized_covariation(observable_path(p, f1), observable_path(p, f2)).values.back();
        const double predicted = predicted_covariation(g, p, d1, d2, generator_qv_factor(beta)).values.back();
        diff.push_back(realized - predicted);
    }
    const auto e = stats::mean_estimate(diff);
    return e.mean / e.stderr_;
}
}  // namespace

//---------------------------------------------------------------------------//
// Observables and covariation
//---------------------------------------------------------------------------//
TEST(ObservablePath, EvaluatesOnEveryState)
{
    Path p(2, 3);
    p.push(0, make_vec({1, 2}));
    p.push(0.5, make_vec({3, 4}));
    const auto s = observable_path(p, [](const Vec& x) { return x[0] * x[1]; });
    EXPECT_EQ(s.values, (std::vector<double>{2, 12}));
    EXPECT_DOUBLE_EQ(s.horizon(), 0.5);
}

TEST(ObservablePath, ReportsFailingStep)
{
    const Orthant g(1);
    Path p(1, 3);
    p.set_stride(10);
    p.push(0, make_vec({1}));
    p.push(1, make_vec({-1}));
    try
    {
        observable_path(p, [&](const Vec& x) { return g.barrier(x); });
        FAIL();
    }
    catch (const DomainError& e)
    {
        // log(-1) is NaN; the path reports the grid step, not the stored index
        EXPECT_NE(std::string(e.what()).find("step 10"), std::string::npos);
    }
}

TEST(RealizedCovariation, Ramp)
{
    ScalarPath a{{0, 1, 2, 3}, {0, 1, 2, 3}};
    ScalarPath b{{0, 1, 2, 3}, {0, -2, -4, -6}};
    EXPECT_EQ(realized_covariation(a, a).values.back(), 3);
    EXPECT_EQ(realized_covariation(a, b).values.back(), -6);
    ScalarPath c{{0, 1, 2, 4}, {0, 1, 2, 3}};
    EXPECT_THROW(realized_covariation(a, c), UsageError);
}

TEST(PredictedCovariation, ConstantIntegrand)
{
    // Orthant n = 1 at x = 1: g^{-1} = 1, so 1 * 1 * factor * T.
    const Orthant g(1);
    Path p(1, 3);
    for (double t : {0.0, 0.5, 1.0})
        p.push(t, make_vec({1}));
    const auto one = [](const Vec&) { return make_vec({1}); };
    EXPECT_DOUBLE_EQ(predicted_covariation(g, p, one, one, 2.0).values.back(), 2.0);
}

//---------------------------------------------------------------------------//
// Conformance harness
//---------------------------------------------------------------------------//
TEST(BmConformance, AcceptsMatchingWalks)
{
    const auto walks = gaussian_walks(0.2, 0.5, 256, 1000, 1e-2, 1);
    const auto r = bm_conformance_test(walks, 0.2, 0.5);
    EXPECT_TRUE(r.verdict()) << to_json(r).dump(1);
    EXPECT_EQ(r.checks.size(), 3u);
}

TEST(BmConformance, RejectsWrongRates)
{
    const auto walks = gaussian_walks(0.0, 2.0, 256, 1000, 1e-2, 2);
    EXPECT_FALSE(bm_conformance_test(walks, 0.0, 1.0).check("qv_rate").pass);
    EXPECT_FALSE(bm_conformance_test(walks, 0.0, 1.0).check("ks_block_increments").pass);
    EXPECT_FALSE(bm_conformance_test(walks, 0.5, 2.0).check("drift").pass);
}

TEST(BmConformance, NeedsEnoughReplicas)
{
    EXPECT_THROW(bm_conformance_test(gaussian_walks(0, 1, 63, 100, 1e-2, 3), 0, 1), UsageError);
}

TEST(StatReportJson, Fields)
{
    const auto r = bm_conformance_test(gaussian_walks(0, 1, 64, 100, 1e-2, 4), 0, 1);
    const auto j = to_json(r);
    ASSERT_EQ(j.size(), 3u);
    for (const char* key : {"test", "estimate", "stderr", "expected", "ks_p", "verdict", "config"})
        EXPECT_TRUE(j[0].contains(key)) << key;
    EXPECT_TRUE(j[0]["ks_p"].is_null());
    EXPECT_TRUE(j[2]["ks_p"].is_number());
}

TEST(BmConformance, ExactSamplersPassWithGeneratorRate)
{
    for (double beta : {1.0, 4.0})
    {
        auto cfg = config(beta, 1e-2, 10, 256, 5);
        cfg.scheme = Scheme::exact_transform;
        const Orthant o(2);
        const auto po = simulate(o, make_vec({1, 2}), cfg);
        const auto obs = observable_ensemble(po, [](const Vec& x) { return std::log(x[1]); });
        EXPECT_TRUE(bm_conformance_test(obs, 0, generator_qv_factor(beta)).verdict());
        // the harness can tell the two conventions apart
        EXPECT_FALSE(bm_conformance_test(obs, 0, 1 / beta).verdict());

        const Cube c(1);
        const auto pc = simulate(c, make_vec({0.2}), cfg);
        const auto obc
            = observable_ensemble(pc, [](const Vec& x) { return std::log(std::tan(pi * x[0] / 2)); });
        EXPECT_TRUE(bm_conformance_test(obc, 0, generator_qv_factor(beta)).verdict());
    }
}

//---------------------------------------------------------------------------//
// Quadratic variation along simulated paths
//---------------------------------------------------------------------------//
TEST(QuadraticVariation, CoordinatesAndBarrierOnOrthant)
{
    const Orthant g(2);
    const double beta = 1.5;
    const auto paths = simulate_bm(g, make_vec({1, 2}), config(beta, 1e-3, 1, 256, 6));
    auto x0 = [](const Vec& x) { return x[0]; };
    auto dx0 = [](const Vec&) { return make_vec({1, 0}); };
    auto F = [&](const Vec& x) { return g.barrier(x); };
    auto dF = [&](const Vec& x) { return g.barrier_gradient(x); };
    EXPECT_LT(std::abs(covariation_zscore(g, paths, x0, dx0, x0, dx0, beta)), 3);
    EXPECT_LT(std::abs(covariation_zscore(g, paths, F, dF, F, dF, beta)), 3);
}

TEST(QuadraticVariation, LightConeObservable)
{
    const Lorentz g(4);
    const auto paths = simulate_bm(g, default_start(g), config(2, 1e-3, 1, 256, 7));
    const auto b = axis_light_vectors(3)[0];
    auto f = [&](const Vec& x) { return lorentz_aux_f(b, x); };
    auto df = [&](const Vec& x) { return lorentz_aux_gradient(b, x); };
    EXPECT_LT(std::abs(covariation_zscore(g, paths, f, df, f, df, 2)), 3);
}

TEST(Covariation, LorentzCoordinates)
{
    // g^{-1} has off-diagonal entries 2 x^0 x^1 / m, so the coordinates co-vary.
    const Lorentz g(3);
    const auto paths = simulate_bm(g, make_vec({2, 0.8, 0.3}), config(1, 1e-3, 1, 256, 8));
    auto x0 = [](const Vec& x) { return x[0]; };
    auto x1 = [](const Vec& x) { return x[1]; };
    auto d0 = [](const Vec&) { return make_vec({1, 0, 0}); };
    auto d1 = [](const Vec&) { return make_vec({0, 1, 0}); };
    EXPECT_LT(std::abs(covariation_zscore(g, paths, x0, d0, x1, d1, 1)), 3);
}

//---------------------------------------------------------------------------//
// Lorentz observables
//---------------------------------------------------------------------------//
TEST(LorentzTheorem, Guards)
{
    const Lorentz g(4);
    const auto lights = axis_light_vectors(3);
    const auto few = simulate_bm(g, default_start(g), config(2, 1e-2, 0.1, 8, 9));
    EXPECT_THROW(lorentz_theorem_test(few, 1.0, lights), UsageError);
    EXPECT_THROW(lorentz_theorem_test(few, 2.0, lights), UsageError);
    SuiteConfig cfg;
    cfg.sim = config(1, 1e-2, 0.1, 64, 9);
    try
    {
        lorentz_suite(g, default_start(g), cfg);
        FAIL();
    }
    catch (const UsageError& e)
    {
        EXPECT_NE(std::string(e.what()).find("temperature"), std::string::npos);
    }
}

TEST(LorentzTheorem, DriftAndCovarianceWithGeneratorRate)
{
    const Lorentz g(4);
    // Short horizon: the Euler-Maruyama bias of realized QV is O(dt) while its
    // standard error shrinks like 1/sqrt(horizon).
    const auto paths = simulate_bm(g, default_start(g), config(2, 1e-3, 0.5, 256, 10));
    LorentzTestOptions opt;
    opt.qv_factor = generator_qv_factor(2);
    const auto r = lorentz_theorem_test(paths, 2, axis_light_vectors(3), opt);
    EXPECT_NEAR(r.check("f1/drift").expected, 0.5, 1e-15);
    for (const auto& c : r.checks)
        EXPECT_TRUE(c.pass) << c.name << " " << c.estimate << " vs " << c.expected << " " << c.note;
}

//---------------------------------------------------------------------------//
// Gibbs stationarity
//---------------------------------------------------------------------------//
TEST(Stationary, RejectsNonNormalizableTargets)
{
    const Cube c(1);
    EXPECT_THROW(stationary_histogram_test({0.5}, c, EnergySpec::linear(make_vec({0})), 1.0), PreconditionError);
    const Orthant o(1);
    EXPECT_THROW(stationary_histogram_test({0.5}, o, EnergySpec::linear(make_vec({1})), 1.0), PreconditionError);
    EXPECT_THROW(stationary_histogram_test({0.5}, o, EnergySpec::barrier(1), 1.0), PreconditionError);
    // e^{-2F} sqrt(det g) = sin(pi x)/pi on the cube: fine
    EXPECT_NO_THROW(stationary_histogram_test({0.5}, c, EnergySpec::barrier(2), 1.0));
}

TEST(Stationary, TargetBinsMatchClosedForms)
{
    const Cube c(1);
    const auto uniform = stationary_histogram_test({0.5}, c, EnergySpec::barrier(1), 1.0);
    for (double p : uniform.target)
        EXPECT_NEAR(p, 0.05, 1e-6);  // chart window truncation ~1e-7
    EXPECT_NEAR(uniform.normalizer, 1.0, 1e-6);  // e^{-F} sqrt(det g) = 1

    const auto sine = stationary_histogram_test({0.5}, c, EnergySpec::barrier(2), 1.0);
    for (int k = 0; k < 20; ++k)
    {
        const double a = sine.edges[k], b = sine.edges[k + 1];
        EXPECT_NEAR(sine.target[k], (std::cos(pi * a) - std::cos(pi * b)) / 2, 1e-6);
    }
}

TEST(Stationary, ExactSamplesPassAndWrongSamplesFail)
{
    const Cube c(1);
    RandomStream rng(12, 0);
    std::vector<double> uniform, sine;
    for (int i = 0; i < 4096; ++i)
    {
        uniform.push_back(rng.uniform());
        sine.push_back(std::acos(1 - 2 * rng.uniform()) / pi);
    }
    EXPECT_TRUE(stationary_histogram_test(uniform, c, EnergySpec::barrier(1), 1.0).report.verdict());
    EXPECT_TRUE(stationary_histogram_test(sine, c, EnergySpec::barrier(2), 1.0).report.verdict());
    EXPECT_FALSE(stationary_histogram_test(uniform, c, EnergySpec::barrier(2), 1.0).report.verdict());
}

TEST(Stationary, Guards)
{
    const Cube c2(2);
    EXPECT_THROW(stationary_histogram_test({0.5}, c2, EnergySpec::barrier(1), 1.0), UsageError);
    const Cube c(1);
    EXPECT_THROW(stationary_histogram_test({1.5}, c, EnergySpec::barrier(1), 1.0), DomainError);
    EXPECT_THROW(stationary_histogram_test({}, c, EnergySpec::barrier(1), 1.0), UsageError);
}

TEST(BetaSweep, EndpointVarianceDecreases)
{
    // E = (x - 0.3)^2 on the cube; the Gibbs law concentrates as beta grows.
    const Cube c(1);
    const auto energy = parse_energy("quadratic:m=0.3,q=2", 1);
    double previous = std::numeric_limits<double>::infinity();
    for (double beta : {1.0, 10.0, 100.0})
    {
        auto cfg = config(beta, 2e-3, 20, 256, 13);
        cfg.record_every = cfg.steps();
        const auto paths = simulate_rle(c, energy, make_vec({0.5}), cfg);
        std::vector<double> ends;
        for (const auto& p : paths)
            ends.push_back(p.back()[0]);
        const double var = std::pow(stats::mean_estimate(ends).stddev, 2);
        EXPECT_LT(var, previous) << "beta=" << beta;
        previous = var;
    }
}

//---------------------------------------------------------------------------//
// Suites
//---------------------------------------------------------------------------//
TEST(Suites, ChartIdentitiesOnExactSampler)
{
    const Cube c(2);
    SuiteConfig cfg;
    cfg.sim = config(1, 1e-2, 10, 128, 14);
    cfg.sim.scheme = Scheme::exact_transform;
    cfg.qv_factor = generator_qv_factor(1);
    const auto reports = chart_identity_tests(c, default_start(c), cfg);
    ASSERT_EQ(reports.size(), 2u);
    for (const auto& r : reports)
        EXPECT_TRUE(r.verdict()) << r.test;
}

TEST(Suites, BarrierProcessRejectsNonCones)
{
    const Cube c(1);
    EXPECT_THROW(barrier_process_test(c, default_start(c), SuiteConfig{}), UsageError);
}

TEST(Suites, RerunUsesFreshSeedOnlyOnFailure)
{
    int calls = 0;
    auto pass = [&](std::uint64_t) {
        ++calls;
        StatReport r;
        r.checks.push_back({"x", 0, 0, 0, std::nullopt, true, ""});
        return r;
    };
    EXPECT_TRUE(with_rerun(pass, 1, true).verdict());
    EXPECT_EQ(calls, 1);
    std::vector<std::uint64_t> seeds;
    auto fail = [&](std::uint64_t s) {
        seeds.push_back(s);
        return StatReport{};
    };
    const auto r = with_rerun(fail, 1, true);
    ASSERT_EQ(seeds.size(), 2u);
    EXPECT_NE(seeds[0], seeds[1]);
    EXPECT_EQ(r.config["rerun_of_seed"], 1);
}
