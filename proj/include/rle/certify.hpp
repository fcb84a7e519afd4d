#pragma once

#include "rle/cones.hpp"
#include "rle/geometry.hpp"
#include "rle/sampling.hpp"

#include <string>
#include <vector>

namespace rle {

struct ResidualCheck
{
    std::string name;
    double max_residual = 0;
    double threshold = 0;
    bool skipped = false;

    bool pass() const { return skipped || max_residual < threshold; }
};

struct GeometryCertificate
{
    std::string geometry;
    int dim = 0;
    std::size_t points = 0;
    std::vector<ResidualCheck> checks;

    bool pass() const
    {
        for (const auto& c : checks)
            if (!c.pass())
                return false;
        return true;
    }
    const ResidualCheck& check(const std::string& name) const
    {
        for (const auto& c : checks)
            if (c.name == name)
                return c;
        throw UsageError("certificate has no check '" + name + "'");
    }
};

struct CertifyOptions
{
    double tol = 1e-8;          // closed-form identities
    double fd_tol = 1e-4;       // finite-difference cross-checks (relative)
    double fd_step = 1e-5;      // gradient and Monge-Ampere stencils
    double fd_hessian_step = 1e-4;
    std::size_t light_vectors = 10;
};

namespace detail {
inline double rel_err(const Mat& approx, const Mat& exact)
{
    return (approx - exact).cwiseAbs().maxCoeff() / std::max(exact.cwiseAbs().maxCoeff(), 1e-300);
}
}  // namespace detail

/*!
 * Evaluate every closed-form identity of a built-in geometry at sampled
 * interior points and record the largest residual of each.
 *
 * Closed-form checks: Monge-Ampere residual, metric symmetry, g g^{-1} - I,
 * and on cones grad F + x, |dF|^2 - n, Delta F, log-homogeneity. On the
 * Lorentz cone also |df_b|^2 - 1, <df_b, dF>, the pairwise <df_b, df_b'>
 * formula and Delta f_b. Finite-difference checks: gradient, Hessian,
 * inverse-metric divergence and the Monge-Ampere residual from a
 * finite-difference Hessian.
 */
template<BarrierGeometry G>
GeometryCertificate certify_geometry(const G& geometry, std::size_t points, std::uint64_t seed,
                                     const CertifyOptions& opt = {})
{
    GeometryCertificate cert;
    cert.geometry = std::string(geometry.name());
    cert.dim = geometry.dim();
    cert.points = points;
    const auto xs = sample_interior_points(geometry, points, seed);
    const int n = geometry.dim();
    const bool cone = geometry.is_cone();
    auto inside = [&](const Vec& y) { return geometry.contains(y); };
    auto F = [&](const Vec& y) { return geometry.barrier(y); };

    auto add = [&](std::string name, double threshold, bool skipped, auto&& per_point) {
        ResidualCheck c{std::move(name), 0.0, threshold, skipped};
        if (!skipped)
            for (const auto& x : xs)
                c.max_residual = std::max(c.max_residual, per_point(x));
        cert.checks.push_back(c);
    };

    add("monge_ampere", opt.tol, false,
        [&](const Vec& x) { return std::abs(monge_ampere_residual(geometry, x)); });
    add("metric_symmetry", opt.tol, false, [&](const Vec& x) {
        const Mat g = geometry.metric(x);
        return (g - g.transpose()).cwiseAbs().maxCoeff();
    });
    add("metric_inverse", opt.tol, false, [&](const Vec& x) {
        return (geometry.metric(x) * geometry.inverse_metric(x) - Mat::Identity(n, n)).cwiseAbs().maxCoeff();
    });
    add("cone_gradient", opt.tol, !cone, [&](const Vec& x) {
        return cone_identity_check(geometry, x).gradient_plus_x.cwiseAbs().maxCoeff();
    });
    add("cone_norm", opt.tol, !cone,
        [&](const Vec& x) { return std::abs(cone_identity_check(geometry, x).norm_minus_dim); });
    add("cone_laplacian", opt.tol, !cone,
        [&](const Vec& x) { return std::abs(cone_identity_check(geometry, x).laplacian); });
    add("log_homogeneity", opt.tol, !cone, [&](const Vec& x) {
        double worst = 0;
        for (double lambda : {0.5, 2.0, 10.0})
            worst = std::max(worst, std::abs(geometry.barrier(lambda * x) - geometry.barrier(x)
                                             + n * std::log(lambda)));
        return worst;
    });

    constexpr bool lorentz = std::same_as<G, Lorentz>;
    std::vector<LightVector> lights;
    if constexpr (lorentz)
    {
        RandomStream rng(seed, 1);
        for (std::size_t k = 0; k < opt.light_vectors; ++k)
        {
            Vec u(n - 1);
            for (int i = 0; i < n - 1; ++i)
                u[i] = rng.normal();
            u /= u.norm();
            // renormalize once more so | |u| - 1 | stays below 1e-12
            u /= u.norm();
            lights.push_back(make_light_vector(u));
        }
    }
    auto for_lights = [&](auto&& fn) {
        return [&, fn](const Vec& x) {
            double worst = 0;
            for (const auto& b : lights)
                worst = std::max(worst, fn(b, x));
            return worst;
        };
    };
    add("light_norm", opt.tol, !lorentz, for_lights([&](const LightVector& b, const Vec& x) {
            const Vec d = lorentz_aux_gradient(b, x);
            return std::abs(cometric_product(geometry, x, d, d) - 1.0);
        }));
    add("light_orthogonality", opt.tol, !lorentz, for_lights([&](const LightVector& b, const Vec& x) {
            return std::abs(cometric_product(geometry, x, lorentz_aux_gradient(b, x),
                                             geometry.barrier_gradient(x)));
        }));
    add("light_covariance", opt.tol, !lorentz, [&](const Vec& x) {
        double worst = 0;
        for (std::size_t i = 0; i < lights.size(); ++i)
            for (std::size_t j = 0; j < lights.size(); ++j)
            {
                const auto& b = lights[i].coords();
                const auto& c = lights[j].coords();
                const double inner = cometric_product(geometry, x, lorentz_aux_gradient(lights[i], x),
                                                      lorentz_aux_gradient(lights[j], x));
                const double formula
                    = 1.0 - Lorentz::dual_form(b, c) * Lorentz::minkowski(x) / (b.dot(x) * c.dot(x));
                const double sigma = lorentz_sigma(lights[i], lights[j], lorentz_aux_f(lights[i], x),
                                                   lorentz_aux_f(lights[j], x));
                worst = std::max({worst, std::abs(inner - formula), std::abs(inner - sigma)});
            }
        return worst;
    });
    add("light_laplacian", opt.tol, !lorentz, for_lights([&](const LightVector& b, const Vec& x) {
            const double expected = (n - 2) / std::sqrt(double(n));  // (k-1)/sqrt(k+1), k = n-1
            return std::abs(laplace_beltrami(geometry, lorentz_aux_field(b), x) - expected);
        }));

    add("fd_gradient", opt.fd_tol, false, [&](const Vec& x) {
        return detail::rel_err(fd_gradient(F, x, opt.fd_step, inside), geometry.barrier_gradient(x));
    });
    add("fd_hessian", opt.fd_tol, false, [&](const Vec& x) {
        return detail::rel_err(fd_hessian(F, x, opt.fd_hessian_step, inside), geometry.metric(x));
    });
    add("fd_inverse_metric_divergence", opt.fd_tol, false, [&](const Vec& x) {
        Vec div = Vec::Zero(n);
        for (int j = 0; j < n; ++j)
        {
            Vec xp = x, xm = x;
            xp[j] += opt.fd_step;
            xm[j] -= opt.fd_step;
            div += (geometry.inverse_metric(xp).col(j) - geometry.inverse_metric(xm).col(j))
                   / (2 * opt.fd_step);
        }
        return detail::rel_err(div, geometry.inverse_metric_divergence(x));
    });
    add("fd_monge_ampere", opt.fd_tol, false, [&](const Vec& x) {
        const Mat h = fd_hessian(F, x, opt.fd_step, inside);
        Eigen::LLT<Mat> llt(h);
        if (llt.info() != Eigen::Success)
            return std::numeric_limits<double>::infinity();
        const Mat& l = llt.matrixLLT();
        return std::abs(geometry.barrier(x) - l.diagonal().array().log().sum());
    });
    return cert;
}

}  // namespace rle
