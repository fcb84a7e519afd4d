#pragma once

#include "rle/cones.hpp"
#include "rle/energy.hpp"
#include "rle/geometry.hpp"
#include "rle/parallel.hpp"
#include "rle/random.hpp"

#include <cinttypes>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace rle {

enum class BoundaryPolicy { resample, abort };
enum class Scheme { euler_maruyama, exact_transform };

//---------------------------------------------------------------------------//
/*!
 * Parameters shared by the integrators.
 *
 * The diffusion has generator (1/beta) Delta: drift (1/beta) b(x) and noise
 * sqrt(2/beta) S(x) dW with S S^T = g^{-1}.
 */
struct SimulationConfig
{
    double beta = 1.0;
    double dt = 1e-3;
    double horizon = 10.0;
    std::uint64_t seed = 0;
    std::size_t replicas = 256;
    BoundaryPolicy boundary_policy = BoundaryPolicy::resample;
    int max_tries = 100;
    Scheme scheme = Scheme::euler_maruyama;
    // Keep every k-th grid state; the horizon must be a multiple of k*dt.
    std::size_t record_every = 1;
    // Worker threads; 0 means hardware concurrency. Results never depend on it.
    unsigned threads = 0;

    std::size_t steps() const
    {
        return static_cast<std::size_t>(std::llround(horizon / dt));
    }

    void validate() const
    {
        if (!(beta > 0) || !std::isfinite(beta))
            throw ValidationError("beta must be positive");
        if (!(dt > 0) || !(horizon > 0) || !(dt < horizon))
            throw ValidationError("need 0 < dt < horizon");
        const double k = horizon / dt;
        if (std::abs(k - std::round(k)) > 1e-9 * k)
            throw ValidationError("horizon must be an integer multiple of dt");
        if (replicas < 1)
            throw ValidationError("replicas must be >= 1");
        if (max_tries < 1)
            throw ValidationError("max_tries must be >= 1");
        if (record_every < 1 || steps() % record_every != 0)
            throw ValidationError("record_every must divide the number of steps");
    }
};

//---------------------------------------------------------------------------//
/*!
 * One trajectory sampled on a uniform grid, states stored row-major.
 */
class Path
{
  public:
    Path() = default;
    Path(int dim, std::size_t reserve_states) : dim_(dim)
    {
        times_.reserve(reserve_states);
        data_.reserve(reserve_states * static_cast<std::size_t>(dim));
    }

    int dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return times_.size(); }
    const std::vector<double>& times() const noexcept { return times_; }
    std::size_t rejections() const noexcept { return rejections_; }
    std::size_t step_index(std::size_t k) const noexcept { return k * stride_; }

    Vec state(std::size_t k) const
    {
        return Eigen::Map<const Eigen::VectorXd>(data_.data() + k * dim_, dim_);
    }
    double coord(std::size_t k, int i) const { return data_[k * dim_ + i]; }
    Vec back() const { return state(size() - 1); }

    void push(double t, const Vec& x)
    {
        times_.push_back(t);
        data_.insert(data_.end(), x.data(), x.data() + dim_);
    }
    void add_rejections(std::size_t n) noexcept { rejections_ += n; }
    void set_stride(std::size_t stride) noexcept { stride_ = stride; }

    friend bool operator==(const Path&, const Path&) = default;

  private:
    int dim_ = 0;
    std::size_t stride_ = 1;
    std::vector<double> times_;
    std::vector<double> data_;
    std::size_t rejections_ = 0;
};

using Ensemble = std::vector<Path>;

inline std::size_t total_rejections(const Ensemble& e)
{
    std::size_t n = 0;
    for (const auto& p : e)
        n += p.rejections();
    return n;
}

//---------------------------------------------------------------------------//
// Euler-Maruyama
//---------------------------------------------------------------------------//
namespace detail {

template<BarrierGeometry G>
Mat noise_factor(const G& geometry, const Vec& x, const Mat& inverse_metric)
{
    if constexpr (requires { geometry.noise_factor(x); })
        return geometry.noise_factor(x);
    else
    {
        Eigen::LLT<Mat> llt(inverse_metric);
        if (llt.info() != Eigen::Success)
            throw NumericalError("inverse metric is not positive definite at " + format_vec(x));
        return llt.matrixL();
    }
}

template<BarrierGeometry G>
Path integrate_replica(const G& geometry, const Vec& x0, const SimulationConfig& cfg,
                       const EnergySpec* energy, std::size_t replica)
{
    const std::size_t steps = cfg.steps();
    const int n = geometry.dim();
    const double inv_beta = 1.0 / cfg.beta;
    const double amplitude = std::sqrt(2.0 * cfg.dt / cfg.beta);
    const int tries = cfg.boundary_policy == BoundaryPolicy::abort ? 1 : cfg.max_tries;

    RandomStream rng(cfg.seed, replica);
    Path path(n, steps / cfg.record_every + 1);
    path.set_stride(cfg.record_every);
    path.push(0.0, x0);

    Vec x = x0;
    Vec xi(n);
    Vec proposal(n);
    std::size_t rejected = 0;
    for (std::size_t k = 1; k <= steps; ++k)
    {
        const Mat ginv = geometry.inverse_metric(x);
        Vec drift = inv_beta
                    * (geometry.inverse_metric_divergence(x) + ginv * log_volume_gradient(geometry, x));
        if (energy)
            drift -= ginv * energy->gradient(geometry, x);
        const Mat s = noise_factor(geometry, x, ginv);

        bool accepted = false;
        for (int attempt = 0; attempt < tries; ++attempt)
        {
            for (int i = 0; i < n; ++i)
                xi[i] = rng.normal();
            proposal = x + cfg.dt * drift + amplitude * (s * xi);
            if (proposal.allFinite() && geometry.contains(proposal))
            {
                accepted = true;
                break;
            }
            ++rejected;
        }
        if (!accepted)
        {
            const double t = static_cast<double>(k - 1) * cfg.dt;
            throw StepFailure(replica, t,
                              "replica " + std::to_string(replica) + " left the domain at t="
                                  + std::to_string(t) + " from state " + format_vec(x) + " after "
                                  + std::to_string(tries) + " tries");
        }
        x = proposal;
        if (k % cfg.record_every == 0)
            path.push(static_cast<double>(k) * cfg.dt, x);
    }
    path.add_rejections(rejected);
    return path;
}

template<class Fn>
Ensemble run_ensemble(const SimulationConfig& cfg, Fn&& replica_fn)
{
    Ensemble out(cfg.replicas);
    parallel_for(cfg.replicas, cfg.threads, [&](std::size_t r) { out[r] = replica_fn(r); });
    return out;
}

}  // namespace detail

/*!
 * Brownian motion at temperature 1/beta by Euler-Maruyama in ambient
 * coordinates. Each replica r draws from the stream (cfg.seed, r).
 */
template<BarrierGeometry G>
Ensemble simulate_bm(const G& geometry, const Vec& x0, const SimulationConfig& cfg)
{
    cfg.validate();
    require_interior(geometry, x0);
    return detail::run_ensemble(cfg, [&](std::size_t r) {
        return detail::integrate_replica(geometry, x0, cfg, nullptr, r);
    });
}

/// Riemannian Langevin equation dX = -grad E dt + dB^{g,beta}.
template<BarrierGeometry G>
Ensemble simulate_rle(const G& geometry, const EnergySpec& energy, const Vec& x0,
                      const SimulationConfig& cfg)
{
    cfg.validate();
    require_interior(geometry, x0);
    energy.check_dim(geometry.dim());
    return detail::run_ensemble(cfg, [&](std::size_t r) {
        return detail::integrate_replica(geometry, x0, cfg, &energy, r);
    });
}

//---------------------------------------------------------------------------//
// Exact samplers
//---------------------------------------------------------------------------//

/*!
 * Brownian motion sampled exactly through a flattening chart.
 *
 * Orthant: y = log x. Cube: y = log tan(pi x / 2). In these coordinates each
 * y^i is a Gaussian walk with zero drift and variance 2 dt/beta per step, the
 * law of the diffusion with generator (1/beta) Delta. There is no time
 * discretization error at grid times.
 */
template<BarrierGeometry G>
Ensemble exact_transform_bm(const G& geometry, const Vec& x0, const SimulationConfig& cfg)
{
    constexpr bool is_orthant = std::same_as<G, Orthant>;
    constexpr bool is_cube = std::same_as<G, Cube>;
    if constexpr (!is_orthant && !is_cube)
    {
        throw UsageError("exact_transform_bm supports only the orthant and the cube, not '"
                         + std::string(geometry.name()) + "'");
    }
    else
    {
        cfg.validate();
        require_interior(geometry, x0);
        constexpr double pi = std::numbers::pi;
        auto to_chart = [](double x) {
            if constexpr (is_orthant)
                return std::log(x);
            else
                return std::log(std::tan(pi * x / 2));
        };
        auto from_chart = [](double y) {
            if constexpr (is_orthant)
                return std::exp(y);
            else
                return 2.0 / pi * std::atan(std::exp(y));
        };
        const double amplitude = std::sqrt(2.0 * cfg.dt / cfg.beta);
        const int n = geometry.dim();
        return detail::run_ensemble(cfg, [&](std::size_t r) {
            RandomStream rng(cfg.seed, r);
            const std::size_t steps = cfg.steps();
            Path path(n, steps / cfg.record_every + 1);
            path.set_stride(cfg.record_every);
            path.push(0.0, x0);
            Vec y(n), x(n);
            for (int i = 0; i < n; ++i)
                y[i] = to_chart(x0[i]);
            for (std::size_t k = 1; k <= steps; ++k)
            {
                for (int i = 0; i < n; ++i)
                    y[i] += amplitude * rng.normal();
                if (k % cfg.record_every != 0)
                    continue;
                for (int i = 0; i < n; ++i)
                    x[i] = from_chart(y[i]);
                const double t = static_cast<double>(k) * cfg.dt;
                if (!geometry.contains(x))
                    throw StepFailure(r, t, "exact sampler lost floating-point resolution at the boundary");
                path.push(t, x);
            }
            return path;
        });
    }
}

/// Dispatch on cfg.scheme.
template<BarrierGeometry G>
Ensemble simulate(const G& geometry, const Vec& x0, const SimulationConfig& cfg)
{
    if (cfg.scheme == Scheme::exact_transform)
        return exact_transform_bm(geometry, x0, cfg);
    return simulate_bm(geometry, x0, cfg);
}

//---------------------------------------------------------------------------//
// CSV
//---------------------------------------------------------------------------//
inline std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Header `replica,step,time,x0..x{n-1}`; 17 significant digits.
inline void write_paths_csv(std::ostream& os, const Ensemble& ensemble)
{
    if (ensemble.empty())
        return;
    const int n = ensemble.front().dim();
    os << "replica,step,time";
    for (int i = 0; i < n; ++i)
        os << ",x" << i;
    os << '\n';
    std::string line;
    for (std::size_t r = 0; r < ensemble.size(); ++r)
    {
        const Path& p = ensemble[r];
        for (std::size_t k = 0; k < p.size(); ++k)
        {
            line = std::to_string(r);
            line += ',';
            line += std::to_string(p.step_index(k));
            line += ',';
            line += format_double(p.times()[k]);
            for (int i = 0; i < n; ++i)
            {
                line += ',';
                line += format_double(p.coord(k, i));
            }
            line += '\n';
            os << line;
        }
    }
}

}  // namespace rle
