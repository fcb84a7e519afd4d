#pragma once

#include "rle/cones.hpp"
#include "rle/energy.hpp"
#include "rle/sde.hpp"
#include "rle/stats.hpp"

#include "json.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rle {

/// Quadratic variation of f(X) per unit time and unit |df|_g^2 for the
/// diffusion with generator (1/beta) Delta: d[f] = (2/beta) |df|_g^2 dt.
constexpr double generator_qv_factor(double beta)
{
    return 2.0 / beta;
}

//---------------------------------------------------------------------------//
/*!
 * An observable evaluated along a Path.
 */
struct ScalarPath
{
    std::vector<double> times;
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    double horizon() const { return times.back() - times.front(); }
};

using ScalarEnsemble = std::vector<ScalarPath>;

inline ScalarPath observable_path(const Path& path, const std::function<double(const Vec&)>& f)
{
    ScalarPath out;
    out.times = path.times();
    out.values.resize(path.size());
    for (std::size_t k = 0; k < path.size(); ++k)
    {
        try
        {
            out.values[k] = f(path.state(k));
        }
        catch (const Error& e)
        {
            throw DomainError("observable failed at step " + std::to_string(path.step_index(k))
                              + ": " + e.what());
        }
        if (!std::isfinite(out.values[k]))
            throw DomainError("observable is not finite at step "
                              + std::to_string(path.step_index(k)));
    }
    return out;
}

inline ScalarEnsemble observable_ensemble(const Ensemble& ensemble,
                                          const std::function<double(const Vec&)>& f)
{
    ScalarEnsemble out;
    out.reserve(ensemble.size());
    for (const auto& p : ensemble)
        out.push_back(observable_path(p, f));
    return out;
}

/// Cumulative sum of increment products; p = q gives realized quadratic variation.
inline ScalarPath realized_covariation(const ScalarPath& p, const ScalarPath& q)
{
    if (p.times != q.times || p.values.size() != q.values.size())
        throw UsageError("realized_covariation needs identical time grids");
    ScalarPath out;
    out.times = p.times;
    out.values.resize(p.size());
    double acc = 0;
    for (std::size_t k = 1; k < p.size(); ++k)
    {
        acc += (p.values[k] - p.values[k - 1]) * (q.values[k] - q.values[k - 1]);
        out.values[k] = acc;
    }
    return out;
}

/*!
 * Left-point quadrature of factor * g^{ij} d_i f1 d_j f2 along a path.
 *
 * This is the covariation predicted by Ito's formula; compare it with
 * realized_covariation of f1 and f2 on the same path.
 */
template<BarrierGeometry G>
ScalarPath predicted_covariation(const G& geometry, const Path& path,
                                 const std::function<Vec(const Vec&)>& grad1,
                                 const std::function<Vec(const Vec&)>& grad2, double factor)
{
    ScalarPath out;
    out.times = path.times();
    out.values.resize(path.size());
    double acc = 0;
    for (std::size_t k = 1; k < path.size(); ++k)
    {
        const Vec x = path.state(k - 1);
        const double dt = path.times()[k] - path.times()[k - 1];
        acc += factor * cometric_product(geometry, x, grad1(x), grad2(x)) * dt;
        out.values[k] = acc;
    }
    return out;
}

//---------------------------------------------------------------------------//
// Reports
//---------------------------------------------------------------------------//
struct Check
{
    std::string name;
    double estimate = 0;
    double stderr_ = 0;
    double expected = 0;
    std::optional<double> ks_p;
    bool pass = false;
    std::string note;
};

struct StatReport
{
    std::string test;
    std::vector<Check> checks;
    nlohmann::json config = nlohmann::json::object();

    bool verdict() const
    {
        for (const auto& c : checks)
            if (!c.pass)
                return false;
        return !checks.empty();
    }
    const Check& check(const std::string& name) const
    {
        for (const auto& c : checks)
            if (c.name == name)
                return c;
        throw UsageError("report '" + test + "' has no check '" + name + "'");
    }
};

/// One JSON record per check with fields test, estimate, stderr, expected,
/// ks_p, verdict, config.
inline nlohmann::json to_json(const StatReport& report)
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& c : report.checks)
    {
        nlohmann::json rec;
        rec["test"] = report.test + "/" + c.name;
        rec["estimate"] = c.estimate;
        rec["stderr"] = c.stderr_;
        rec["expected"] = c.expected;
        rec["ks_p"] = c.ks_p ? nlohmann::json(*c.ks_p) : nlohmann::json(nullptr);
        rec["verdict"] = c.pass ? "pass" : "fail";
        rec["config"] = report.config;
        if (!c.note.empty())
            rec["note"] = c.note;
        out.push_back(rec);
    }
    return out;
}

namespace detail {
inline Check mean_check(std::string name, std::span<const double> samples, double expected,
                        double z)
{
    const auto est = stats::mean_estimate(samples);
    Check c;
    c.name = std::move(name);
    c.estimate = est.mean;
    c.stderr_ = est.stderr_;
    c.expected = expected;
    c.pass = std::abs(est.mean - expected) <= z * est.stderr_ + 1e-12 * std::max(1.0, std::abs(expected));
    return c;
}

inline void check_common_grid(const ScalarEnsemble& ensemble, std::size_t min_replicas)
{
    if (ensemble.size() < min_replicas)
        throw UsageError("need at least " + std::to_string(min_replicas) + " replicas, got "
                         + std::to_string(ensemble.size()));
    for (const auto& p : ensemble)
        if (p.times != ensemble.front().times)
            throw UsageError("scalar paths are not on a common time grid");
    if (ensemble.front().size() < 2)
        throw UsageError("scalar paths need at least two samples");
}

inline std::vector<double> terminal_rates(const ScalarEnsemble& ensemble)
{
    std::vector<double> out;
    for (const auto& p : ensemble)
        out.push_back((p.values.back() - p.values.front()) / p.horizon());
    return out;
}

inline std::vector<double> qv_rates(const ScalarEnsemble& a, const ScalarEnsemble& b)
{
    std::vector<double> out;
    for (std::size_t r = 0; r < a.size(); ++r)
        out.push_back(realized_covariation(a[r], b[r]).values.back() / a[r].horizon());
    return out;
}
}  // namespace detail

struct ConformanceOptions
{
    double block = 0.1;      // time units per KS block increment
    double alpha = 0.01;     // KS significance level
    double z = 3.0;          // standard errors allowed for drift and QV
    std::size_t min_replicas = 64;
};

/*!
 * Is the scalar process a Brownian motion with the given drift and
 * quadratic-variation rate?
 *
 * (i) mean of (p(T) - p(0))/T against expected_drift, (ii) mean realized
 * QV / T against expected_qv_rate, both within z standard errors;
 * (iii) KS test of block increments standardized with the expected rates
 * against N(0,1) at level alpha.
 */
inline StatReport bm_conformance_test(const ScalarEnsemble& ensemble, double expected_drift,
                                      double expected_qv_rate, const ConformanceOptions& opt = {})
{
    detail::check_common_grid(ensemble, opt.min_replicas);
    if (!(expected_qv_rate > 0))
        throw UsageError("expected QV rate must be positive");
    const auto& times = ensemble.front().times;
    const double grid_dt = times[1] - times[0];
    const auto block_steps = static_cast<std::size_t>(std::llround(opt.block / grid_dt));
    if (block_steps < 1)
        throw UsageError("KS block shorter than the grid spacing");
    const double tau = static_cast<double>(block_steps) * grid_dt;

    StatReport report;
    report.test = "bm_conformance";
    report.config = {{"replicas", ensemble.size()},
                     {"horizon", ensemble.front().horizon()},
                     {"grid_dt", grid_dt},
                     {"block", tau},
                     {"alpha", opt.alpha}};

    report.checks.push_back(
        detail::mean_check("drift", detail::terminal_rates(ensemble), expected_drift, opt.z));
    report.checks.push_back(
        detail::mean_check("qv_rate", detail::qv_rates(ensemble, ensemble), expected_qv_rate, opt.z));

    std::vector<double> z;
    const double scale = std::sqrt(expected_qv_rate * tau);
    for (const auto& p : ensemble)
        for (std::size_t k = block_steps; k < p.size(); k += block_steps)
            z.push_back((p.values[k] - p.values[k - block_steps] - expected_drift * tau) / scale);
    const auto ks = stats::ks_test_normal(std::move(z));
    Check c;
    c.name = "ks_block_increments";
    c.estimate = ks.statistic;
    c.expected = 0;
    c.ks_p = ks.p_value;
    c.pass = ks.p_value > opt.alpha;
    report.checks.push_back(c);
    return report;
}

//---------------------------------------------------------------------------//
// Lorentz cone observables
//---------------------------------------------------------------------------//
struct LorentzTestOptions
{
    // QV per unit time of an observable with |df|_g^2 = 1. Unset means 1/beta.
    std::optional<double> qv_factor;
    double z = 3.0;
    double covariation_rel_tol = 0.10;
    std::size_t min_replicas = 64;
};

/*!
 * Drift and covariance structure of f^0 = F/sqrt(m) and f^i = f_{b_i} along
 * Brownian paths on the Lorentz cone at beta = 2.
 *
 * Checks: drift of f^i against lorentz_mu; QV rate of f^i and f^0 against
 * qv_factor; drift of f^0 against 0; realized covariation of (f^i, f^j),
 * i < j, against qv_factor * integral of Sigma^{ij}(f^i_t, f^j_t) dt (ensemble
 * means, relative error); covariation of (f^0, f^i) against 0.
 */
inline StatReport lorentz_theorem_test(const Ensemble& ensemble, double beta,
                                       const std::vector<LightVector>& lights,
                                       const LorentzTestOptions& opt = {})
{
    if (beta != 2.0)
        throw UsageError("the Lorentz light-cone theorem is stated at beta = 2, got beta = "
                         + std::to_string(beta));
    if (ensemble.size() < opt.min_replicas)
        throw UsageError("need at least " + std::to_string(opt.min_replicas) + " replicas");
    const int m = ensemble.front().dim();
    const int n = m - 1;
    for (const auto& b : lights)
        if (b.ambient_dim() != m)
            throw ValidationError("light vector dimension does not match the paths");
    const double qv = opt.qv_factor.value_or(1.0 / beta);
    const Lorentz cone(m);
    const double root_m = std::sqrt(double(m));

    const auto f0 = observable_ensemble(ensemble, [&](const Vec& x) { return cone.barrier(x) / root_m; });
    std::vector<ScalarEnsemble> fi;
    for (const auto& b : lights)
        fi.push_back(observable_ensemble(ensemble, [&](const Vec& x) { return lorentz_aux_f(b, x); }));

    StatReport report;
    report.test = "lorentz_light_cone";
    report.config = {{"beta", beta},
                     {"ambient_dim", m},
                     {"replicas", ensemble.size()},
                     {"horizon", f0.front().horizon()},
                     {"qv_factor", qv}};

    report.checks.push_back(detail::mean_check("f0/drift", detail::terminal_rates(f0), 0.0, opt.z));
    report.checks.push_back(detail::mean_check("f0/qv_rate", detail::qv_rates(f0, f0), qv, opt.z));
    const double mu = lorentz_mu(n);
    for (std::size_t i = 0; i < fi.size(); ++i)
    {
        const std::string tag = "f" + std::to_string(i + 1);
        report.checks.push_back(detail::mean_check(tag + "/drift", detail::terminal_rates(fi[i]), mu, opt.z));
        report.checks.push_back(detail::mean_check(tag + "/qv_rate", detail::qv_rates(fi[i], fi[i]), qv, opt.z));
        report.checks.push_back(
            detail::mean_check("f0," + tag + "/covariation_rate", detail::qv_rates(f0, fi[i]), 0.0, opt.z));
    }

    for (std::size_t i = 0; i < fi.size(); ++i)
        for (std::size_t j = i + 1; j < fi.size(); ++j)
        {
            std::vector<double> realized, predicted, diff;
            for (std::size_t r = 0; r < ensemble.size(); ++r)
            {
                const auto& a = fi[i][r];
                const auto& b = fi[j][r];
                double integral = 0;
                for (std::size_t k = 1; k < a.size(); ++k)
                    integral += lorentz_sigma(lights[i], lights[j], a.values[k - 1], b.values[k - 1])
                                * (a.times[k] - a.times[k - 1]);
                realized.push_back(realized_covariation(a, b).values.back());
                predicted.push_back(qv * integral);
                diff.push_back(realized.back() - predicted.back());
            }
            const auto re = stats::mean_estimate(realized);
            const auto pr = stats::mean_estimate(predicted);
            const auto df = stats::mean_estimate(diff);
            Check c;
            c.name = "f" + std::to_string(i + 1) + ",f" + std::to_string(j + 1) + "/covariation";
            c.estimate = re.mean;
            c.expected = pr.mean;
            c.stderr_ = df.stderr_;
            const double rel = std::abs(re.mean - pr.mean) / std::max(std::abs(pr.mean), 1e-300);
            c.pass = rel < opt.covariation_rel_tol;
            c.note = "relative error " + std::to_string(rel);
            report.checks.push_back(c);
        }
    return report;
}

//---------------------------------------------------------------------------//
// Gibbs stationarity
//---------------------------------------------------------------------------//
struct StationaryResult
{
    StatReport report;
    std::vector<double> edges;      // bins + 1 edges
    std::vector<double> empirical;  // probabilities per bin
    std::vector<double> target;
    double normalizer = 0;          // Z = int e^{-beta E} sqrt(det g) dx
};

struct StationaryOptions
{
    int bins = 20;
    double tv_tolerance = 0.05;
    double chart_half_width = 16;  // quadrature window in the chart coordinate
    int intervals_per_unit = 400;
};

namespace detail {
// One-dimensional flattening charts: x = chart_inverse(y), dx/dy.
template<class G>
constexpr bool has_chart = std::same_as<G, Cube> || std::same_as<G, Orthant>;

template<class G>
std::pair<double, double> chart_point(double y)
{
    constexpr double pi = std::numbers::pi;
    if constexpr (std::same_as<G, Cube>)
    {
        const double x = 2.0 / pi * std::atan(std::exp(y));
        return {x, std::sin(pi * x) / pi};
    }
    else
    {
        const double x = std::exp(y);
        return {x, x};
    }
}

template<class G>
double chart_coordinate(double x)
{
    if constexpr (std::same_as<G, Cube>)
        return std::log(std::tan(std::numbers::pi * x / 2));
    else
        return std::log(x);
}

template<class G>
double chart_mass(const G& geometry, const EnergySpec& energy, double beta, const StationaryOptions& opt,
                  double lo, double hi)
{
    auto integrand = [&](double y) {
        const auto [x, jac] = chart_point<G>(y);
        Vec p(1);
        p[0] = x;
        if (!geometry.contains(p))
            return 0.0;
        return std::exp(-beta * energy.value(geometry, p) + log_volume_density(geometry, p)) * jac;
    };
    const int intervals = std::max(2, static_cast<int>(std::ceil((hi - lo) * opt.intervals_per_unit)));
    return stats::simpson(integrand, lo, hi, intervals);
}
}  // namespace detail


/*!
 * Normalizer Z = int e^{-beta E} sqrt(det g) dx of the Gibbs density on a
 * one-dimensional cube or orthant.
 *
 * Quadrature is done in the flattening chart y (log tan(pi x/2), resp. log x)
 * over windows of half-width L/4, L/2 and L. If the mass keeps growing at the
 * same pace in the outer window the integral diverges and a PreconditionError
 * is thrown.
 */
template<BarrierGeometry G>
double gibbs_normalizer(const G& geometry, const EnergySpec& energy, double beta,
                        const StationaryOptions& opt = {})
{
    if constexpr (!detail::has_chart<G>)
    {
        throw UsageError("Gibbs quadrature supports one-dimensional cube or orthant");
    }
    else
    {
        if (geometry.dim() != 1)
            throw UsageError("Gibbs quadrature needs a one-dimensional geometry");
        if (!(beta > 0))
            throw ValidationError("beta must be positive");
        energy.check_dim(1);
        const double L = opt.chart_half_width;
        const double i_quarter = detail::chart_mass(geometry, energy, beta, opt, -L / 4, L / 4);
        const double i_half = detail::chart_mass(geometry, energy, beta, opt, -L / 2, L / 2);
        const double i_full = detail::chart_mass(geometry, energy, beta, opt, -L, L);
        const double growth_outer = i_full - i_half;
        const double growth_inner = i_half - i_quarter;
        if (!std::isfinite(i_full) || (growth_outer > 0.5 * growth_inner && growth_outer > 1e-9 * i_full))
            throw PreconditionError(
                "Gibbs target is not normalizable: the integral of exp(-beta E) sqrt(det g) dx over the "
                + std::string(geometry.name()) + " diverges (partial masses "
                + std::to_string(i_quarter) + ", " + std::to_string(i_half) + ", "
                + std::to_string(i_full) + ")");
        return i_full;
    }
}

/*!
 * Compare endpoint samples with the Gibbs density rho ~ e^{-beta E} sqrt(det g).
 *
 * Bins are uniform in x, so only the one-dimensional cube is binned; the
 * orthant is accepted by gibbs_normalizer only to report divergence.
 */
template<BarrierGeometry G>
StationaryResult stationary_histogram_test(const std::vector<double>& endpoints, const G& geometry,
                                           const EnergySpec& energy, double beta,
                                           const StationaryOptions& opt = {})
{
    if constexpr (!detail::has_chart<G>)
    {
        throw UsageError("stationary_histogram_test supports one-dimensional cube or orthant");
    }
    else
    {
        if (opt.bins < 2)
            throw ValidationError("need at least two bins");
        if (endpoints.empty())
            throw UsageError("no endpoints");
        const double i_full = gibbs_normalizer(geometry, energy, beta, opt);
        const double L = opt.chart_half_width;
        auto mass = [&](double lo, double hi) {
            return detail::chart_mass(geometry, energy, beta, opt, lo, hi);
        };

        if constexpr (!std::same_as<G, Cube>)
        {
            throw UsageError("histogram binning needs a bounded domain");
        }
        else
        {
            StationaryResult res;
            res.normalizer = i_full;
            const int bins = opt.bins;
            for (int k = 0; k <= bins; ++k)
                res.edges.push_back(static_cast<double>(k) / bins);
            res.target.resize(bins);
            for (int k = 0; k < bins; ++k)
            {
                const double lo = k == 0 ? -L : detail::chart_coordinate<G>(res.edges[k]);
                const double hi = k == bins - 1 ? L : detail::chart_coordinate<G>(res.edges[k + 1]);
                res.target[k] = mass(lo, hi) / i_full;
            }
            std::vector<double> counts(bins, 0.0);
            for (double x : endpoints)
            {
                if (!(x > 0 && x < 1))
                    throw DomainError("endpoint " + std::to_string(x) + " outside the cube");
                counts[std::min(bins - 1, static_cast<int>(x * bins))] += 1;
            }
            const double total = static_cast<double>(endpoints.size());
            double tv = 0, chi2 = 0;
            res.empirical.resize(bins);
            for (int k = 0; k < bins; ++k)
            {
                res.empirical[k] = counts[k] / total;
                tv += std::abs(res.empirical[k] - res.target[k]);
                const double expected = total * res.target[k];
                if (expected > 0)
                    chi2 += (counts[k] - expected) * (counts[k] - expected) / expected;
            }
            tv *= 0.5;
            const double chi2_p = stats::chi_squared_p_value(chi2, bins - 1);

            res.report.test = "gibbs_stationarity";
            res.report.config = {{"beta", beta},
                                 {"bins", bins},
                                 {"samples", endpoints.size()},
                                 {"normalizer", i_full}};
            Check tv_check;
            tv_check.name = "total_variation";
            tv_check.estimate = tv;
            tv_check.expected = 0;
            tv_check.ks_p = std::nullopt;
            tv_check.pass = tv < opt.tv_tolerance;
            tv_check.note = "chi2 " + std::to_string(chi2) + ", chi2 p " + std::to_string(chi2_p);
            res.report.checks.push_back(tv_check);
            res.report.config["chi2"] = chi2;
            res.report.config["chi2_p"] = chi2_p;
            return res;
        }
    }
}

}  // namespace rle
