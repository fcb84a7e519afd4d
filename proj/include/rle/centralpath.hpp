#pragma once

#include "rle/cones.hpp"
#include "rle/geometry.hpp"

#include <optional>
#include <vector>

namespace rle {

//---------------------------------------------------------------------------//
/*!
 * min c.x over the closure of a cone, approached along the central path
 * x(theta) = argmin F(x) + theta c.x.
 *
 * For built-in cones c must lie in the interior of the dual cone. The cube
 * is accepted as a bounded convex set with any c.
 */
template<BarrierGeometry G>
class ConicProgram
{
  public:
    ConicProgram(G geometry, Vec cost) : geometry_(std::move(geometry)), cost_(std::move(cost))
    {
        if (cost_.size() != geometry_.dim())
            throw ValidationError("cost vector has dimension " + std::to_string(cost_.size())
                                  + ", geometry has " + std::to_string(geometry_.dim()));
        if (!cost_.allFinite())
            throw ValidationError("cost vector is not finite");
        if constexpr (std::same_as<G, Orthant>)
        {
            if (!(cost_.array() > 0).all())
                throw ValidationError("orthant program needs c > 0 componentwise (dual cone interior)");
        }
        else if constexpr (std::same_as<G, Lorentz>)
        {
            if (!(cost_[0] > cost_.tail(cost_.size() - 1).norm()))
                throw ValidationError("Lorentz program needs c0 > |spatial(c)| (dual cone interior)");
        }
    }

    const G& geometry() const noexcept { return geometry_; }
    const Vec& cost() const noexcept { return cost_; }

  private:
    G geometry_;
    Vec cost_;
};

struct CentralPathPoint
{
    double theta = 0;
    Vec x;
    double newton_decrement = 0;  // |dF + theta c|_{g^{-1}}
    int iterations = 0;
};

/// Local norm |dF(x) + theta c|_{g^{-1}}, the first-order residual.
template<BarrierGeometry G>
double central_residual(const ConicProgram<G>& prog, double theta, const Vec& x)
{
    const auto& geom = prog.geometry();
    const Vec r = geom.barrier_gradient(x) + theta * prog.cost();
    return std::sqrt(std::max(0.0, r.dot(solve_metric(geom.metric(x), r))));
}

struct NewtonOptions
{
    double tol = 1e-10;
    int max_iterations = 200;
};

/*!
 * Damped Newton for argmin F(x) + theta c.x.
 *
 * Step -g^{-1}(dF + theta c); full step while the decrement is below 1/4,
 * otherwise scaled by 1/(1 + decrement).
 */
template<BarrierGeometry G>
CentralPathPoint newton_central_point(const ConicProgram<G>& prog, double theta, const Vec& x_init,
                                      const NewtonOptions& opt = {})
{
    const auto& geom = prog.geometry();
    if (geom.is_cone() ? !(theta > 0) : !(theta >= 0))
        throw ValidationError("theta must be positive (non-negative on bounded sets)");
    require_interior(geom, x_init);

    Vec x = x_init;
    for (int it = 0; it <= opt.max_iterations; ++it)
    {
        const Vec r = geom.barrier_gradient(x) + theta * prog.cost();
        const Vec step = -solve_metric(geom.metric(x), r);
        const double decrement = std::sqrt(std::max(0.0, -r.dot(step)));
        if (decrement < opt.tol)
            return {theta, x, decrement, it};
        if (it == opt.max_iterations)
            throw ConvergenceError(decrement, "Newton did not converge in "
                                                  + std::to_string(opt.max_iterations)
                                                  + " iterations (decrement "
                                                  + std::to_string(decrement) + ")");
        const double scale = decrement < 0.25 ? 1.0 : 1.0 / (1.0 + decrement);
        const Vec next = x + scale * step;
        if (!geom.contains(next))
            throw ConvergenceError(decrement, "Newton iterate left the domain at " + format_vec(next));
        x = next;
    }
    return {};  // unreachable
}

/*!
 * Integrate dx/dtheta = -g^{-1}(x) c from theta0 to theta1 with classical
 * RK4. Returns every step with its first-order residual.
 */
template<BarrierGeometry G>
std::vector<CentralPathPoint> flow_central_path(const ConicProgram<G>& prog, double theta0,
                                                double theta1, const CentralPathPoint& start,
                                                double step, double on_path_tol = 1e-6)
{
    const auto& geom = prog.geometry();
    if (!(theta0 > 0) || theta1 < theta0)
        throw ValidationError("need 0 < theta0 <= theta1");
    if (!(step > 0))
        throw ValidationError("flow step must be positive");
    require_interior(geom, start.x);
    if (start.theta != theta0)
        throw UsageError("start point is not at theta0");
    const double start_residual = central_residual(prog, theta0, start.x);
    if (start_residual > on_path_tol)
        throw UsageError("start point is not on the central path (residual "
                         + std::to_string(start_residual) + ")");

    std::vector<CentralPathPoint> out{{theta0, start.x, start_residual, 0}};
    if (theta1 == theta0)
        return out;

    const auto count = static_cast<int>(std::ceil((theta1 - theta0) / step - 1e-12));
    const double h = (theta1 - theta0) / count;
    auto velocity = [&](const Vec& x, double theta) -> Vec {
        if (!geom.contains(x))
            throw DomainError("central-path flow left the domain at theta = " + std::to_string(theta));
        return -solve_metric(geom.metric(x), prog.cost());
    };
    Vec x = start.x;
    for (int k = 0; k < count; ++k)
    {
        const double t = theta0 + k * h;
        const Vec k1 = velocity(x, t);
        const Vec k2 = velocity(x + 0.5 * h * k1, t + 0.5 * h);
        const Vec k3 = velocity(x + 0.5 * h * k2, t + 0.5 * h);
        const Vec k4 = velocity(x + h * k3, t + h);
        x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        const double theta = k + 1 == count ? theta1 : theta0 + (k + 1) * h;
        if (!geom.contains(x))
            throw DomainError("central-path flow left the domain at theta = " + std::to_string(theta));
        out.push_back({theta, x, central_residual(prog, theta, x), 0});
    }
    return out;
}

struct ConicTrajectoryPoint
{
    double theta = 0;
    Vec x;
    double objective = 0;
    double newton_decrement = 0;
    int iterations = 0;
};

/*!
 * Path following by theta-doubling: Newton re-centering at theta_start,
 * 2 theta_start, ... up to theta_max, warm-started from the previous point.
 */
template<BarrierGeometry G>
std::vector<ConicTrajectoryPoint> solve_conic(const ConicProgram<G>& prog, double theta_max,
                                              const NewtonOptions& opt = {},
                                              std::optional<Vec> x_start = std::nullopt,
                                              double theta_start = 1.0)
{
    if (!(theta_start > 0) || theta_max < theta_start)
        throw ValidationError("need 0 < theta_start <= theta_max");
    Vec x = x_start ? *x_start : default_start(prog.geometry());
    std::vector<ConicTrajectoryPoint> out;
    for (double theta = theta_start; theta <= theta_max * (1 + 1e-12); theta *= 2)
    {
        const auto pt = newton_central_point(prog, theta, x, opt);
        x = pt.x;
        out.push_back({theta, x, prog.cost().dot(x), pt.newton_decrement, pt.iterations});
    }
    return out;
}

}  // namespace rle
