#pragma once

#include "rle/types.hpp"

#include <concepts>
#include <functional>
#include <iostream>
#include <string>
#include <string_view>
#include <utility>

namespace rle {

//---------------------------------------------------------------------------//
/*!
 * A convex domain equipped with the Hessian metric of a barrier F.
 *
 * Implementations supply closed forms for F, its gradient, the metric D^2F,
 * the inverse metric, and the divergence d_j g^{ij} of the inverse metric.
 * A geometry is "canonical" when its barrier solves F = 1/2 log det D^2F, in
 * which case the log-volume density log sqrt(det g) is F itself.
 */
template<class G>
concept BarrierGeometry = requires(const G& g, const Vec& x) {
    { g.dim() } -> std::convertible_to<int>;
    { g.is_cone() } -> std::convertible_to<bool>;
    { g.is_canonical() } -> std::convertible_to<bool>;
    { g.name() } -> std::convertible_to<std::string_view>;
    { g.contains(x) } -> std::convertible_to<bool>;
    { g.barrier(x) } -> std::convertible_to<double>;
    { g.barrier_gradient(x) } -> std::convertible_to<Vec>;
    { g.metric(x) } -> std::convertible_to<Mat>;
    { g.inverse_metric(x) } -> std::convertible_to<Mat>;
    { g.inverse_metric_divergence(x) } -> std::convertible_to<Vec>;
};

//---------------------------------------------------------------------------//
// Warnings (ill-conditioned metrics). Default sink is stderr.
//---------------------------------------------------------------------------//
using WarningHandler = std::function<void(const std::string&)>;

inline WarningHandler& warning_handler()
{
    static WarningHandler handler
        = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
    return handler;
}

inline void set_warning_handler(WarningHandler handler)
{
    warning_handler() = std::move(handler);
}

inline constexpr double kConditionWarning = 1e12;

//---------------------------------------------------------------------------//
/*!
 * A point known to lie in the open domain of a geometry.
 */
class InteriorPoint
{
  public:
    template<BarrierGeometry G>
    InteriorPoint(const G& geometry, Vec coords) : coords_(std::move(coords))
    {
        if (coords_.size() != geometry.dim())
            throw ValidationError("point has dimension " + std::to_string(coords_.size())
                                  + ", geometry '" + std::string(geometry.name())
                                  + "' has dimension " + std::to_string(geometry.dim()));
        if (!coords_.allFinite())
            throw DomainError("non-finite coordinates " + format_vec(coords_));
        if (!geometry.contains(coords_))
            throw DomainError("point " + format_vec(coords_) + " is not interior to '"
                              + std::string(geometry.name()) + "'");
    }

    const Vec& coords() const noexcept { return coords_; }
    int dim() const noexcept { return static_cast<int>(coords_.size()); }
    operator const Vec&() const noexcept { return coords_; }

  private:
    Vec coords_;
};

template<BarrierGeometry G>
void require_interior(const G& geometry, const Vec& x)
{
    if (x.size() != geometry.dim())
        throw ValidationError("point has dimension " + std::to_string(x.size())
                              + ", expected " + std::to_string(geometry.dim()));
    if (!x.allFinite() || !geometry.contains(x))
        throw DomainError("point " + format_vec(x) + " is not interior to '"
                          + std::string(geometry.name()) + "'");
}

//---------------------------------------------------------------------------//
/*!
 * Solve g(x) v = rhs with a Cholesky factorization of the metric.
 *
 * Throws NumericalError (with an eigenvalue-based condition estimate) if the
 * metric is not positive definite; warns when the condition number exceeds
 * 1e12.
 */
inline Vec solve_metric(const Mat& metric, const Vec& rhs)
{
    Eigen::LLT<Mat> llt(metric);
    if (llt.info() != Eigen::Success)
    {
        Eigen::SelfAdjointEigenSolver<Mat> eig(metric, Eigen::EigenvaluesOnly);
        const auto& ev = eig.eigenvalues();
        throw NumericalError("metric is not positive definite (eigenvalues in ["
                             + std::to_string(ev.minCoeff()) + ", "
                             + std::to_string(ev.maxCoeff()) + "])");
    }
    const double rcond = llt.rcond();
    if (rcond > 0 && 1.0 / rcond > kConditionWarning)
        warning_handler()("metric condition number ~" + std::to_string(1.0 / rcond)
                          + " exceeds 1e12");
    return llt.solve(rhs);
}

/// Riemannian gradient g^{-1}(x) df of a covector df.
template<BarrierGeometry G>
Vec riemannian_gradient(const G& geometry, const Vec& x, const Vec& df)
{
    require_interior(geometry, x);
    if (df.size() != geometry.dim())
        throw ValidationError("covector has dimension " + std::to_string(df.size()));
    return solve_metric(geometry.metric(x), df);
}

/// g-inner product g^{ij} a_i b_j of two covectors.
template<BarrierGeometry G>
double cometric_product(const G& geometry, const Vec& x, const Vec& a, const Vec& b)
{
    return a.dot(geometry.inverse_metric(x) * b);
}

//---------------------------------------------------------------------------//
// Finite differences
//---------------------------------------------------------------------------//
using DomainPredicate = std::function<bool(const Vec&)>;

namespace detail {
inline void check_stencil(const DomainPredicate& inside, const Vec& y, int coord)
{
    if (inside && !inside(y))
        throw StencilError(coord, "finite-difference stencil leaves the domain along coordinate "
                                      + std::to_string(coord) + " at " + format_vec(y));
}
}  // namespace detail

/// Central-difference gradient, O(h^2).
template<class F>
Vec fd_gradient(F&& f, const Vec& x, double h, const DomainPredicate& inside = {})
{
    if (!(h > 0))
        throw ValidationError("finite-difference step must be positive");
    const auto n = x.size();
    Vec grad(n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        detail::check_stencil(inside, xp, static_cast<int>(i));
        detail::check_stencil(inside, xm, static_cast<int>(i));
        grad[i] = (f(xp) - f(xm)) / (2 * h);
    }
    return grad;
}

/// Central-difference Hessian, O(h^2).
template<class F>
Mat fd_hessian(F&& f, const Vec& x, double h, const DomainPredicate& inside = {})
{
    if (!(h > 0))
        throw ValidationError("finite-difference step must be positive");
    const auto n = x.size();
    Mat hess(n, n);
    const double f0 = f(x);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        detail::check_stencil(inside, xp, static_cast<int>(i));
        detail::check_stencil(inside, xm, static_cast<int>(i));
        hess(i, i) = (f(xp) - 2 * f0 + f(xm)) / (h * h);
        for (Eigen::Index j = 0; j < i; ++j)
        {
            Vec xpp = x, xpm = x, xmp = x, xmm = x;
            xpp[i] += h, xpp[j] += h;
            xpm[i] += h, xpm[j] -= h;
            xmp[i] -= h, xmp[j] += h;
            xmm[i] -= h, xmm[j] -= h;
            for (const Vec* y : {&xpp, &xpm, &xmp, &xmm})
                detail::check_stencil(inside, *y, static_cast<int>(i));
            hess(i, j) = hess(j, i) = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4 * h * h);
        }
    }
    return hess;
}

/// Central-difference Jacobian of a vector field: J(i, k) = d v_i / d x_k.
template<class F>
Mat fd_jacobian(F&& v, const Vec& x, double h, const DomainPredicate& inside = {})
{
    const auto n = x.size();
    Mat jac(n, n);
    for (Eigen::Index k = 0; k < n; ++k)
    {
        Vec xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        detail::check_stencil(inside, xp, static_cast<int>(k));
        detail::check_stencil(inside, xm, static_cast<int>(k));
        jac.col(k) = (v(xp) - v(xm)) / (2 * h);
    }
    return jac;
}

//---------------------------------------------------------------------------//
// Differential operators
//---------------------------------------------------------------------------//

inline constexpr double kFallbackStep = 1e-5;

/// log sqrt(det D^2F(x)) via Cholesky. Throws if the metric is not PD.
template<BarrierGeometry G>
double log_volume_density(const G& geometry, const Vec& x)
{
    Eigen::LLT<Mat> llt(geometry.metric(x));
    if (llt.info() != Eigen::Success)
        throw NumericalError("metric is not positive definite at " + format_vec(x));
    const Mat& factor = llt.matrixLLT();
    return factor.diagonal().array().log().sum();
}

/*!
 * Gradient of log sqrt(det g).
 *
 * For canonical barriers this is dF. Otherwise it falls back to central
 * differences of 1/2 log det g.
 */
template<BarrierGeometry G>
Vec log_volume_gradient(const G& geometry, const Vec& x)
{
    if (geometry.is_canonical())
        return geometry.barrier_gradient(x);
    return fd_gradient([&](const Vec& y) { return log_volume_density(geometry, y); }, x,
                       kFallbackStep, [&](const Vec& y) { return geometry.contains(y); });
}

/*!
 * Drift of the Laplace-Beltrami operator: Delta f = g^{ij} d_i d_j f + b^i d_i f.
 *
 * b^i = d_j g^{ij} + g^{ij} d_j log sqrt(det g). On canonical barriers the
 * second term is g^{ij} d_j F, which equals -x on cones.
 */
template<BarrierGeometry G>
Vec drift_vector(const G& geometry, const Vec& x)
{
    require_interior(geometry, x);
    return geometry.inverse_metric_divergence(x)
           + geometry.inverse_metric(x) * log_volume_gradient(geometry, x);
}

/*!
 * Smooth scalar observable with gradient and Hessian evaluators.
 */
struct ScalarField
{
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;
    std::function<Mat(const Vec&)> hessian;

    // Builds gradient and Hessian by central differences of `value`.
    static ScalarField from_value(std::function<double(const Vec&)> fn, double h = 1e-4)
    {
        ScalarField field;
        field.value = fn;
        field.gradient = [fn, h](const Vec& x) { return fd_gradient(fn, x, h); };
        field.hessian = [fn, h](const Vec& x) { return fd_hessian(fn, x, h); };
        return field;
    }
};

/// The barrier F of a geometry as a ScalarField, Hessian = metric.
template<BarrierGeometry G>
ScalarField barrier_field(const G& geometry)
{
    return ScalarField{[geometry](const Vec& x) { return geometry.barrier(x); },
                       [geometry](const Vec& x) { return geometry.barrier_gradient(x); },
                       [geometry](const Vec& x) { return geometry.metric(x); }};
}

template<BarrierGeometry G>
double laplace_beltrami(const G& geometry, const ScalarField& f, const Vec& x)
{
    require_interior(geometry, x);
    const Mat ginv = geometry.inverse_metric(x);
    const Vec b = drift_vector(geometry, x);
    return (ginv.cwiseProduct(f.hessian(x))).sum() + b.dot(f.gradient(x));
}

/// F(x) - 1/2 log det D^2F(x); zero for canonical barriers.
template<BarrierGeometry G>
double monge_ampere_residual(const G& geometry, const Vec& x)
{
    require_interior(geometry, x);
    return geometry.barrier(x) - log_volume_density(geometry, x);
}

struct ConeIdentityResidual
{
    Vec gradient_plus_x;     // grad F + x
    double norm_minus_dim;   // |dF|_g^2 - n
    double laplacian;        // Delta F
};

/// Residuals of grad F = -x, |dF|^2 = n and Delta F = 0 on a cone.
template<BarrierGeometry G>
ConeIdentityResidual cone_identity_check(const G& geometry, const Vec& x)
{
    if (!geometry.is_cone())
        throw UsageError("cone identities requested on non-cone geometry '"
                         + std::string(geometry.name()) + "'");
    require_interior(geometry, x);
    const Vec dF = geometry.barrier_gradient(x);
    const Vec grad = riemannian_gradient(geometry, x, dF);
    ConeIdentityResidual r;
    r.gradient_plus_x = grad + x;
    r.norm_minus_dim = grad.dot(dF) - geometry.dim();
    r.laplacian = laplace_beltrami(geometry, barrier_field(geometry), x);
    return r;
}

}  // namespace rle
